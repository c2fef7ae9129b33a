#include "aou/harness/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>

#include <json.hpp>

#include "aou/errors.hpp"
#include "aou/util.hpp"

namespace aou::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_hash(const RunConfig& config) {
    json doc{{"strategy", config.strategy},
             {"n_samples", config.strategy == "self_consistency" ? config.n_samples : 1},
             {"model", config.llm.model},
             {"temperature", config.llm.temperature},
             {"max_tokens", config.llm.max_tokens},
             {"endpoint", config.llm.base_url + config.llm.chat_path},
             {"master_seed", config.master_seed}};
    if (config.llm.seed) doc["seed"] = *config.llm.seed;
    return hash128_hex(doc.dump()).substr(0, 16);
}

namespace {

bool cache_has_entries(const std::string& dir) {
    std::error_code ec;
    if (dir.empty() || !fs::exists(dir, ec)) return false;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        (void)entry;
        return true;
    }
    return false;
}

pipeline::Transcript execute_item(const RunConfig& config, pipeline::LlmClient& client,
                                  const DatasetRecord& record) {
    if (config.strategy == "aou") return pipeline::run_aou(record.id, record.question, client);
    if (config.strategy == "cot") return pipeline::run_cot(record.id, record.question, client);
    return pipeline::run_self_consistency(record.id, record.question, client, config.n_samples);
}

ItemResult result_from(const pipeline::Transcript& t, double gold) {
    ItemResult r;
    r.id = t.item_id;
    r.strategy = t.strategy;
    r.predicted = t.extracted_answer;
    r.gold = gold;
    r.verdict = score(t.extracted_answer, gold);
    r.tokens = t.total_usage.prompt_tokens + t.total_usage.completion_tokens;
    r.latency_ms = t.total_latency_ms;
    r.failed = t.failed;
    r.warnings = t.warnings;
    return r;
}

}  // namespace

Metrics score_items(std::vector<ItemResult> items) {
    Metrics m;
    m.items = std::move(items);
    m.n_items = static_cast<long long>(m.items.size());
    for (const auto& item : m.items) {
        if (item.verdict != Verdict::Abstained) ++m.n_answered;
        if (item.verdict == Verdict::Correct) ++m.n_correct;
        if (item.failed) ++m.n_failed;
    }
    if (m.n_items > 0) {
        m.accuracy = static_cast<double>(m.n_correct) / static_cast<double>(m.n_items);
        m.abstention_rate =
            static_cast<double>(m.n_items - m.n_answered) / static_cast<double>(m.n_items);
    }
    if (m.n_answered > 0)
        m.answered_accuracy = static_cast<double>(m.n_correct) / static_cast<double>(m.n_answered);
    return m;
}

Metrics run_experiment(const RunConfig& config) {
    if (config.strategy != "aou" && config.strategy != "cot" &&
        config.strategy != "self_consistency")
        throw ConfigError("unknown strategy " + config.strategy);
    if (config.strategy == "self_consistency" && config.n_samples < 1)
        throw ConfigError("self_consistency requires n_samples >= 1");
    {
        auto errs = pipeline::validate_config(config.llm);
        if (!errs.empty()) throw ConfigError("llm config invalid: " + errs.front());
    }
    // Fail before any item when there is no credential and no warm cache.
    if (!config.llm.api_key_env.empty()) {
        const char* key = std::getenv(config.llm.api_key_env.c_str());
        if ((key == nullptr || *key == '\0') && !cache_has_entries(config.llm.cache_dir))
            throw ConfigError("credential environment variable " + config.llm.api_key_env +
                              " is not set and the cache is cold");
    }

    std::vector<std::string> skipped;
    auto records = load_dataset(config.dataset_path, config.format, &skipped);
    if (config.limit >= 0 && static_cast<long long>(records.size()) > config.limit)
        records.resize(static_cast<std::size_t>(config.limit));

    fs::create_directories(config.out_dir);
    const std::string hash = config_hash(config);
    const fs::path transcripts_path = fs::path(config.out_dir) / "transcripts.jsonl";

    // Resume: collect keys already present and keep their transcripts.
    std::map<std::string, pipeline::Transcript> done;
    if (fs::exists(transcripts_path)) {
        std::ifstream in(transcripts_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto t = pipeline::transcript_from_jsonl(line);
            if (t.strategy == config.strategy && t.config_hash == hash)
                done.emplace(t.item_id, std::move(t));
        }
    }

    pipeline::LlmClient client(config.llm);
    std::vector<const DatasetRecord*> pending;
    for (const auto& r : records)
        if (done.count(r.id) == 0) pending.push_back(&r);

    std::ofstream out(transcripts_path, std::ios::binary | std::ios::app);
    if (!out) throw ConfigError("cannot open " + transcripts_path.string() + " for append");

    auto run_one = [&](const DatasetRecord& record) {
        pipeline::Transcript t;
        try {
            t = execute_item(config, client, record);
        } catch (const TransportError& e) {
            t = pipeline::Transcript{};
            t.item_id = record.id;
            t.question = record.question;
            t.strategy = config.strategy;
            t.failed = true;
            t.abstained = true;
            t.warnings.push_back(std::string("item failed: ") + e.what());
        } catch (const ProtocolError& e) {
            t = pipeline::Transcript{};
            t.item_id = record.id;
            t.question = record.question;
            t.strategy = config.strategy;
            t.failed = true;
            t.abstained = true;
            t.warnings.push_back(std::string("item failed: ") + e.what());
        }
        t.config_hash = hash;
        return t;
    };

    // Bounded-parallel execution with writes funneled through this thread in
    // item order, so transcript files are byte-stable under any width.
    const int width = std::max(1, config.jobs);
    std::vector<std::future<pipeline::Transcript>> inflight;
    std::size_t next_launch = 0;
    auto launch_upto = [&](std::size_t target) {
        while (next_launch < pending.size() && inflight.size() < target) {
            const DatasetRecord* rec = pending[next_launch++];
            inflight.push_back(
                std::async(std::launch::async, [&run_one, rec] { return run_one(*rec); }));
        }
    };
    launch_upto(static_cast<std::size_t>(width));
    std::size_t next_write = 0;
    while (next_write < pending.size()) {
        pipeline::Transcript t = inflight[next_write].get();
        ++next_write;
        launch_upto(next_write + static_cast<std::size_t>(width));
        out << pipeline::transcript_to_jsonl(t) << "\n";
        out.flush();
        done.emplace(t.item_id, std::move(t));
    }
    out.close();

    std::vector<ItemResult> items;
    for (const auto& record : records) {
        auto it = done.find(record.id);
        if (it == done.end()) continue;
        items.push_back(result_from(it->second, record.gold));
    }
    Metrics metrics = score_items(std::move(items));
    write_report(config, metrics, config.out_dir);
    return metrics;
}

Metrics evaluate_transcripts(const std::string& transcripts_path,
                             const std::vector<DatasetRecord>& records,
                             const std::string& strategy_filter,
                             const std::string& config_hash_filter) {
    std::ifstream in(transcripts_path, std::ios::binary);
    if (!in) throw LoadError("cannot open transcripts " + transcripts_path);
    std::map<std::string, pipeline::Transcript> latest;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto t = pipeline::transcript_from_jsonl(line);
        if (!strategy_filter.empty() && t.strategy != strategy_filter) continue;
        if (!config_hash_filter.empty() && t.config_hash != config_hash_filter) continue;
        latest[t.item_id] = std::move(t);
    }
    std::vector<ItemResult> items;
    for (const auto& record : records) {
        auto it = latest.find(record.id);
        if (it == latest.end()) {
            ItemResult r;
            r.id = record.id;
            r.gold = record.gold;
            r.verdict = Verdict::Abstained;
            r.warnings.push_back("no transcript for item");
            items.push_back(std::move(r));
            continue;
        }
        items.push_back(result_from(it->second, record.gold));
    }
    return score_items(std::move(items));
}

void write_report(const RunConfig& config, const Metrics& metrics, const std::string& out_dir) {
    fs::create_directories(out_dir);

    json snapshot{{"strategy", config.strategy},
                  {"n_samples", config.n_samples},
                  {"model", config.llm.model},
                  {"temperature", config.llm.temperature},
                  {"max_tokens", config.llm.max_tokens},
                  {"base_url", config.llm.base_url},
                  {"chat_path", config.llm.chat_path},
                  {"dataset", config.dataset_path},
                  {"format", dataset_format_name(config.format)},
                  {"master_seed", config.master_seed},
                  {"config_hash", config_hash(config)}};
    if (config.llm.seed) snapshot["seed"] = *config.llm.seed;

    json items = json::array();
    for (const auto& item : metrics.items) {
        json row{{"id", item.id},
                 {"strategy", item.strategy},
                 {"gold", item.gold},
                 {"verdict", verdict_label(item.verdict)},
                 {"tokens", item.tokens},
                 {"latency_ms", item.latency_ms},
                 {"failed", item.failed},
                 {"warnings", item.warnings}};
        if (item.predicted) {
            row["predicted"] = *item.predicted;
        } else {
            row["predicted"] = nullptr;
        }
        items.push_back(std::move(row));
    }
    json doc{{"config", std::move(snapshot)},
             {"metrics",
              {{"n_items", metrics.n_items},
               {"n_answered", metrics.n_answered},
               {"n_correct", metrics.n_correct},
               {"n_failed", metrics.n_failed},
               {"accuracy", metrics.accuracy},
               {"answered_accuracy", metrics.answered_accuracy},
               {"abstention_rate", metrics.abstention_rate}}},
             {"items", std::move(items)}};

    {
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        out << doc.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "report.tsv", std::ios::binary);
        out << "id\tstrategy\tpredicted\tgold\tverdict\ttokens\tlatency_ms\n";
        for (const auto& item : metrics.items) {
            out << item.id << "\t" << item.strategy << "\t";
            if (item.predicted) {
                out << *item.predicted;
            } else {
                out << "-";
            }
            out << "\t" << item.gold << "\t" << verdict_label(item.verdict) << "\t" << item.tokens
                << "\t" << item.latency_ms << "\n";
        }
    }
}

}  // namespace aou::harness
