#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aou/errors.hpp"

namespace aou::pipeline {

// Line grammars (bit-exact):
//   assumption: ws* ('G'|'g') integer ws* sep ws* text
//   audit:      ws* ('G'|'g') integer ws* sep ws* '[' verdict ']' ':'? reason
// where sep is one of ':' '.' '-' or the UTF-8 en/em dash, and verdict is
// SUPPORTED or MISSING, case-insensitive. Non-matching lines are ignored.

struct AssumptionLine {
    int index = 0;  // 1-based, from the G-token
    std::string text;
};

enum class AuditVerdict { Supported, Missing };

struct AuditLine {
    int index = 0;
    AuditVerdict verdict = AuditVerdict::Missing;
    std::string reason;
};

struct ParsedAssumptions {
    std::vector<AssumptionLine> lines;  // sorted by index, duplicates resolved
    std::vector<std::string> warnings;
    bool empty() const { return lines.empty(); }
};

struct ParsedAudit {
    std::vector<AuditLine> lines;  // one per known index, sorted
    std::vector<std::string> warnings;
};

// Total on arbitrary bytes; never throws on input content.
ParsedAssumptions parse_assumptions(const std::string& raw);

// Unknown indices are dropped with a warning; known indices missing from the
// response default to MISSING with reason "unaudited".
ParsedAudit parse_audit(const std::string& raw, const std::vector<int>& known_indices);

// Last numeric literal, currency/thousands-separator tolerant; a final
// "Answer:" line takes precedence when it contains a numeral.
std::optional<double> extract_answer(const std::string& final_text);

// Harness-side numeric comparison, relative tolerance 1e-6.
bool answers_equal(double a, double b);

const char* verdict_name(AuditVerdict v);

}  // namespace aou::pipeline
