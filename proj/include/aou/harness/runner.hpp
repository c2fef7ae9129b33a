#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aou/harness/dataset.hpp"
#include "aou/pipeline/strategies.hpp"

namespace aou::harness {

struct RunConfig {
    std::string dataset_path;
    DatasetFormat format = DatasetFormat::GenericJsonl;
    std::string strategy = "aou";  // aou | cot | self_consistency
    int n_samples = 20;            // self-consistency paths
    pipeline::LlmConfig llm;
    std::string out_dir = "runs/out";
    long long limit = -1;  // <0 means all items
    int jobs = 1;
    std::uint64_t master_seed = 0;
};

// Stable hash over the decision-relevant configuration; part of the resume
// key so one transcript file never silently mixes configs.
std::string config_hash(const RunConfig& config);

struct ItemResult {
    std::string id;
    std::string strategy;
    std::optional<double> predicted;
    double gold = 0.0;
    Verdict verdict = Verdict::Abstained;
    long long tokens = 0;
    double latency_ms = 0.0;
    bool failed = false;
    std::vector<std::string> warnings;
};

struct Metrics {
    long long n_items = 0;
    long long n_answered = 0;
    long long n_correct = 0;
    long long n_failed = 0;
    double accuracy = 0.0;
    double answered_accuracy = 0.0;
    double abstention_rate = 0.0;
    std::vector<ItemResult> items;
};

Metrics score_items(std::vector<ItemResult> items);

// Iterates dataset items, skipping (id, strategy, config-hash) keys already
// present in the run's transcript file, appending one JSONL transcript per
// item as it completes. Per-item transport failures are recorded and the run
// continues; configuration errors abort before any call.
Metrics run_experiment(const RunConfig& config);

// Re-scores existing transcripts against a dataset (the `eval` subcommand).
Metrics evaluate_transcripts(const std::string& transcripts_path,
                             const std::vector<DatasetRecord>& records,
                             const std::string& strategy_filter = "",
                             const std::string& config_hash_filter = "");

void write_report(const RunConfig& config, const Metrics& metrics, const std::string& out_dir);

}  // namespace aou::harness
