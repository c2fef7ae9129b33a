#include "aou/pipeline/cards.hpp"

#include <map>

#include "aou/errors.hpp"

namespace aou::pipeline {

namespace {

std::string assumption_list(const std::vector<AssumptionLine>& assumptions) {
    std::string out;
    for (const auto& a : assumptions)
        out += "G" + std::to_string(a.index) + ": " + a.text + "\n";
    return out;
}

std::string audited_list(const std::vector<AuditLine>& audits) {
    std::string out;
    for (const auto& a : audits) {
        out += "G" + std::to_string(a.index) + ": [" + verdict_name(a.verdict) + "]";
        if (!a.reason.empty()) out += " " + a.reason;
        out += "\n";
    }
    return out;
}

}  // namespace

std::string render_card1(const std::string& question) {
    std::string p;
    p += "Instruction. Given a task or question, enumerate the minimal set of assumptions, "
         "facts, or subgoals required to reach a solution. Do not solve the task.\n";
    p += "\n";
    p += "Constraints.\n";
    p += "- List only essential items, labeled G1, G2, G3, ...\n";
    p += "- Avoid trivial, vague, or redundant statements\n";
    p += "- Each entry must be precise, concise, and problem-specific\n";
    p += "\n";
    p += "Input.\n";
    p += "Question: " + question + "\n";
    p += "\n";
    p += "Output. G1, G2, G3, ...\n";
    return p;
}

std::string render_card2(const std::string& question,
                         const std::vector<AssumptionLine>& assumptions) {
    std::string p;
    p += "Instruction. Given (i) a question and (ii) a set of assumptions (G1, G2, ...), "
         "assess whether each assumption is supported by the question or by unambiguous "
         "implications thereof. Do not introduce external knowledge.\n";
    p += "\n";
    p += "Evaluation Rules.\n";
    p += "- For each Gi, assign a label: [SUPPORTED] or [MISSING].\n";
    p += "- Provide a brief justification for every label; be strict and conservative.\n";
    p += "- Do not invent facts; rely only on what is explicitly stated or clearly "
         "inferable.\n";
    p += "\n";
    p += "Input.\n";
    p += "Question: " + question + "\n";
    p += "Assumptions:\n";
    p += assumption_list(assumptions);
    p += "\n";
    p += "Output. One line per assumption, e.g.:\n";
    p += "G1 \xE2\x80\x94 [SUPPORTED]: <short reason>\n";
    p += "G2 \xE2\x80\x94 [MISSING]: <short reason>\n";
    p += "G3 \xE2\x80\x94 [SUPPORTED]: <short reason>\n";
    return p;
}

std::string render_card3(const std::string& question,
                         const std::vector<AssumptionLine>& assumptions,
                         const std::vector<AuditLine>& audits) {
    std::map<int, AuditVerdict> verdicts;
    for (const auto& a : audits) verdicts[a.index] = a.verdict;
    std::vector<AssumptionLine> supported;
    for (const auto& a : assumptions) {
        auto it = verdicts.find(a.index);
        if (it != verdicts.end() && it->second == AuditVerdict::Supported)
            supported.push_back(a);
    }

    std::string p;
    p += "Instruction. Given a question and a set of audited assumptions (G1, G2, ...) with "
         "labels [SUPPORTED] or [MISSING], answer the question using only the [SUPPORTED] "
         "assumptions.\n";
    p += "\n";
    p += "Rules.\n";
    p += "- Reference assumptions by index (e.g., \"Using G2, ...\").\n";
    p += "- If any critical assumptions are [MISSING], provide a conditional answer or state "
         "why an exact answer is not possible.\n";
    p += "- Keep the explanation clear, concise, and strictly grounded in the cited "
         "assumptions.\n";
    p += "\n";
    p += "Input.\n";
    p += "Question: " + question + "\n";
    if (!supported.empty()) {
        p += "Assumptions:\n";
        p += assumption_list(supported);
    }
    p += "Audited Assumptions:\n";
    p += audited_list(audits);
    p += "\n";
    p += "Output. A brief answer grounded in [SUPPORTED] assumptions, with inline citations "
         "to Gi, ending with a line \"Answer: <number>\". For example:\n";
    p += "Answer: <2-4 sentences referencing G1, G3, ...>\n";
    p += "If missing: \"Under G1 and G3, the result is X; however, without G2 [MISSING], the "
         "exact value of Y cannot be determined.\"\n";
    return p;
}

std::string render_card(int card, const std::string& question,
                        const std::vector<AssumptionLine>* assumptions,
                        const std::vector<AuditLine>* audits) {
    switch (card) {
        case 1:
            return render_card1(question);
        case 2:
            if (assumptions == nullptr)
                throw InvalidArgumentError("card 2 requires the parsed assumptions");
            return render_card2(question, *assumptions);
        case 3:
            if (assumptions == nullptr || audits == nullptr)
                throw InvalidArgumentError("card 3 requires assumptions and audit verdicts");
            return render_card3(question, *assumptions, *audits);
        default:
            throw InvalidArgumentError("card must be 1, 2, or 3");
    }
}

std::string render_cot_prompt(const std::string& question) {
    std::string p;
    p += "Solve the following problem. Let's think step by step, then give the final "
         "numeric result on its own last line in the form \"Answer: <number>\".\n";
    p += "\n";
    p += "Question: " + question + "\n";
    return p;
}

}  // namespace aou::pipeline
