#pragma once

#include <string>
#include <vector>

#include "aou/pipeline/parsers.hpp"

namespace aou::pipeline {

// Three-phase prompt templates. Rendering is byte-stable for identical
// inputs: assumption lists as "G<i>: <text>" lines, audited lists as
// "G<i>: [<VERDICT>] <reason>" lines. Card 3 re-embeds the text of
// SUPPORTED assumptions only.
std::string render_card(int card, const std::string& question,
                        const std::vector<AssumptionLine>* assumptions = nullptr,
                        const std::vector<AuditLine>* audits = nullptr);

std::string render_card1(const std::string& question);
std::string render_card2(const std::string& question,
                         const std::vector<AssumptionLine>& assumptions);
std::string render_card3(const std::string& question,
                         const std::vector<AssumptionLine>& assumptions,
                         const std::vector<AuditLine>& audits);

// Single-prompt step-by-step baseline template.
std::string render_cot_prompt(const std::string& question);

}  // namespace aou::pipeline
