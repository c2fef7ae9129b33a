#include "aou/pipeline/strategies.hpp"

#include <json.hpp>

#include "aou/errors.hpp"

namespace aou::pipeline {

using nlohmann::json;

namespace {

PhaseRecord make_phase(int card, std::string prompt, const LlmResult& result) {
    PhaseRecord p;
    p.card = card;
    p.prompt = std::move(prompt);
    p.response = result.text;
    p.usage = result.usage;
    p.latency_ms = result.latency_ms;
    return p;
}

void finalize(Transcript& t) {
    t.total_usage = {};
    t.total_latency_ms = 0.0;
    for (const auto& p : t.phases) {
        t.total_usage += p.usage;
        t.total_latency_ms += p.latency_ms;
    }
}

}  // namespace

Transcript run_aou(const std::string& item_id, const std::string& question, LlmClient& client) {
    Transcript t;
    t.item_id = item_id;
    t.question = question;
    t.strategy = "aou";

    std::string prompt1 = render_card1(question);
    auto r1 = client.call({{"user", prompt1}});
    t.phases.push_back(make_phase(1, std::move(prompt1), r1));

    auto parsed = parse_assumptions(r1.text);
    t.assumptions = parsed.lines;
    t.warnings.insert(t.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
    if (t.assumptions.empty()) {
        t.empty_decomposition = true;
        t.abstained = true;
        t.warnings.push_back("empty decomposition: no assumption lines parsed");
        finalize(t);
        return t;
    }

    std::string prompt2 = render_card2(question, t.assumptions);
    auto r2 = client.call({{"user", prompt2}});
    t.phases.push_back(make_phase(2, std::move(prompt2), r2));

    std::vector<int> known;
    for (const auto& a : t.assumptions) known.push_back(a.index);
    auto audit = parse_audit(r2.text, known);
    t.audits = audit.lines;
    t.warnings.insert(t.warnings.end(), audit.warnings.begin(), audit.warnings.end());
    for (const auto& a : t.audits)
        if (a.verdict == AuditVerdict::Supported) t.supported_indices.push_back(a.index);
    t.all_missing = t.supported_indices.empty();

    // Card 3 is issued even when every assumption is MISSING.
    std::string prompt3 = render_card3(question, t.assumptions, t.audits);
    auto r3 = client.call({{"user", prompt3}});
    t.phases.push_back(make_phase(3, std::move(prompt3), r3));

    t.final_text = r3.text;
    t.extracted_answer = extract_answer(t.final_text);
    t.abstained = !t.extracted_answer.has_value();
    t.conditional = t.all_missing && t.extracted_answer.has_value();
    finalize(t);
    return t;
}

Transcript run_cot(const std::string& item_id, const std::string& question, LlmClient& client) {
    Transcript t;
    t.item_id = item_id;
    t.question = question;
    t.strategy = "cot";

    std::string prompt = render_cot_prompt(question);
    auto r = client.call({{"user", prompt}});
    t.phases.push_back(make_phase(0, std::move(prompt), r));
    t.final_text = r.text;
    t.extracted_answer = extract_answer(t.final_text);
    t.abstained = !t.extracted_answer.has_value();
    finalize(t);
    return t;
}

Transcript run_self_consistency(const std::string& item_id, const std::string& question,
                                LlmClient& client, int n) {
    if (n < 1) throw InvalidArgumentError("self-consistency requires n >= 1");
    Transcript t;
    t.item_id = item_id;
    t.question = question;
    t.strategy = "self_consistency";

    struct Group {
        double value = 0.0;       // representative: earliest sampled member
        int count = 0;
        int first_sample = 0;
        std::string first_text;
    };
    std::vector<Group> groups;

    const std::string prompt = render_cot_prompt(question);
    for (int j = 0; j < n; ++j) {
        auto r = client.call({{"user", prompt}}, j);
        t.phases.push_back(make_phase(0, prompt, r));
        auto answer = extract_answer(r.text);
        if (!answer) continue;
        bool merged = false;
        for (auto& g : groups) {
            if (answers_equal(*answer, g.value)) {
                g.count += 1;
                merged = true;
                break;
            }
        }
        if (!merged) groups.push_back({*answer, 1, j, r.text});
    }

    const Group* winner = nullptr;
    for (const auto& g : groups) {
        if (winner == nullptr || g.count > winner->count ||
            (g.count == winner->count && g.first_sample < winner->first_sample))
            winner = &g;
    }
    if (winner != nullptr) {
        t.extracted_answer = winner->value;
        t.final_text = winner->first_text;
    }
    t.abstained = !t.extracted_answer.has_value();
    finalize(t);
    return t;
}

// ---------------------------------------------------------------------------
// JSONL persistence. Raw prompts and responses are stored verbatim.

std::string transcript_to_jsonl(const Transcript& t) {
    json phases = json::array();
    for (const auto& p : t.phases) {
        phases.push_back({{"card", p.card},
                          {"prompt", p.prompt},
                          {"response", p.response},
                          {"prompt_tokens", p.usage.prompt_tokens},
                          {"completion_tokens", p.usage.completion_tokens},
                          {"latency_ms", p.latency_ms}});
    }
    json assumptions = json::array();
    for (const auto& a : t.assumptions)
        assumptions.push_back({{"index", a.index}, {"text", a.text}});
    json audits = json::array();
    for (const auto& a : t.audits)
        audits.push_back(
            {{"index", a.index}, {"verdict", verdict_name(a.verdict)}, {"reason", a.reason}});

    json doc{{"item_id", t.item_id},
             {"question", t.question},
             {"strategy", t.strategy},
             {"phases", std::move(phases)},
             {"assumptions", std::move(assumptions)},
             {"audits", std::move(audits)},
             {"supported_indices", t.supported_indices},
             {"final_text", t.final_text},
             {"abstained", t.abstained},
             {"conditional", t.conditional},
             {"all_missing", t.all_missing},
             {"empty_decomposition", t.empty_decomposition},
             {"failed", t.failed},
             {"warnings", t.warnings},
             {"prompt_tokens", t.total_usage.prompt_tokens},
             {"completion_tokens", t.total_usage.completion_tokens},
             {"latency_ms", t.total_latency_ms},
             {"config_hash", t.config_hash}};
    if (t.extracted_answer) {
        doc["extracted_answer"] = *t.extracted_answer;
    } else {
        doc["extracted_answer"] = nullptr;
    }
    return doc.dump();
}

Transcript transcript_from_jsonl(const std::string& line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const std::exception& e) {
        throw LoadError(std::string("transcript line is not valid JSON: ") + e.what());
    }
    Transcript t;
    t.item_id = doc.value("item_id", "");
    t.question = doc.value("question", "");
    t.strategy = doc.value("strategy", "");
    for (const auto& p : doc.value("phases", json::array())) {
        PhaseRecord rec;
        rec.card = p.value("card", 0);
        rec.prompt = p.value("prompt", "");
        rec.response = p.value("response", "");
        rec.usage.prompt_tokens = p.value("prompt_tokens", 0LL);
        rec.usage.completion_tokens = p.value("completion_tokens", 0LL);
        rec.latency_ms = p.value("latency_ms", 0.0);
        t.phases.push_back(std::move(rec));
    }
    for (const auto& a : doc.value("assumptions", json::array()))
        t.assumptions.push_back({a.value("index", 0), a.value("text", "")});
    for (const auto& a : doc.value("audits", json::array())) {
        AuditLine line_out;
        line_out.index = a.value("index", 0);
        line_out.verdict = a.value("verdict", "MISSING") == std::string("SUPPORTED")
                               ? AuditVerdict::Supported
                               : AuditVerdict::Missing;
        line_out.reason = a.value("reason", "");
        t.audits.push_back(std::move(line_out));
    }
    for (const auto& v : doc.value("supported_indices", json::array()))
        t.supported_indices.push_back(v.get<int>());
    t.final_text = doc.value("final_text", "");
    if (doc.contains("extracted_answer") && !doc.at("extracted_answer").is_null())
        t.extracted_answer = doc.at("extracted_answer").get<double>();
    t.abstained = doc.value("abstained", false);
    t.conditional = doc.value("conditional", false);
    t.all_missing = doc.value("all_missing", false);
    t.empty_decomposition = doc.value("empty_decomposition", false);
    t.failed = doc.value("failed", false);
    for (const auto& w : doc.value("warnings", json::array()))
        t.warnings.push_back(w.get<std::string>());
    t.total_usage.prompt_tokens = doc.value("prompt_tokens", 0LL);
    t.total_usage.completion_tokens = doc.value("completion_tokens", 0LL);
    t.total_latency_ms = doc.value("latency_ms", 0.0);
    t.config_hash = doc.value("config_hash", "");
    return t;
}

}  // namespace aou::pipeline
