#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aou/pipeline/cards.hpp"
#include "aou/pipeline/client.hpp"

namespace aou::pipeline {

struct PhaseRecord {
    int card = 0;  // 1..3 for the audited pipeline; 0 for baseline samples
    std::string prompt;
    std::string response;
    LlmUsage usage;
    double latency_ms = 0.0;
};

struct Transcript {
    std::string item_id;
    std::string question;
    std::string strategy;  // aou | cot | self_consistency
    std::vector<PhaseRecord> phases;
    std::vector<AssumptionLine> assumptions;
    std::vector<AuditLine> audits;
    std::vector<int> supported_indices;
    std::string final_text;
    std::optional<double> extracted_answer;
    bool abstained = false;
    bool conditional = false;  // answered despite an all-MISSING audit
    bool all_missing = false;
    bool empty_decomposition = false;
    bool failed = false;
    std::vector<std::string> warnings;
    LlmUsage total_usage;
    double total_latency_ms = 0.0;
    std::string config_hash;  // assigned by the experiment runner
};

std::string transcript_to_jsonl(const Transcript& t);
Transcript transcript_from_jsonl(const std::string& line);

// Three-phase audited pipeline: decompose, audit, solve. One decoding pass
// per phase; parse degradations are recorded as warnings, never aborts. An
// empty decomposition skips phases 2-3 and abstains.
Transcript run_aou(const std::string& item_id, const std::string& question,
                   LlmClient& client);

Transcript run_cot(const std::string& item_id, const std::string& question, LlmClient& client);

// n independent step-by-step samples, majority vote over normalized answers,
// ties broken by the earliest-sampled answer.
Transcript run_self_consistency(const std::string& item_id, const std::string& question,
                                LlmClient& client, int n = 20);

}  // namespace aou::pipeline
