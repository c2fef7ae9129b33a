// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "aou/harness/parse_fixtures.hpp"
#include "aou/harness/runner.hpp"
#include "aou/mock/scripted_server.hpp"
#include "aou/risk.hpp"

using namespace aou;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

// Exact-run reports collected across criteria; criterion 2 checks the
// decomposition identity on every one of them.
std::vector<RiskReport> g_exact_runs;

// --- 1: trace containment and no-hallucination, exhaustively ---------------
Outcome criterion1() {
    const int n_worlds = 200;
    long long checked = 0;
    for (int k = 0; k < n_worlds; ++k) {
        const int m = 2 + k % 5;  // 2..6
        auto world = random_world(1000 + static_cast<std::uint64_t>(k), m, 3, 2);
        const std::uint32_t n_outcomes = 1U << m;
        for (std::uint32_t vmask = 0; vmask < n_outcomes; ++vmask) {
            std::vector<int> verdicts(m);
            for (int i = 0; i < m; ++i) verdicts[i] = static_cast<int>(vmask >> i & 1U);
            auto outcome = ValidationOutcome::from_verdicts(verdicts);
            for (auto kind : {KernelKind::AoUEvent, KernelKind::AoUValue}) {
                auto kernel = build_kernel(world, outcome, kind);
                auto report = reasoning_trace(kernel, world);
                ++checked;
                for (int i : report.trace) {
                    if (outcome.validated.count(i) == 0)
                        return {false, "trace escaped the validated set on world " +
                                           std::to_string(k)};
                }
                if (hallucination_event(report, outcome.rejected))
                    return {false, "hallucination under an audited kernel on world " +
                                       std::to_string(k)};
            }
        }
        // Perfect validation over every realizable assignment: the
        // hallucination event must be impossible.
        for (const auto& [g, pg] : enumerate_assignments(world)) {
            (void)pg;
            auto outcome = audit_perfect(world, g);
            for (auto kind : {KernelKind::AoUEvent, KernelKind::AoUValue}) {
                auto kernel = build_kernel(world, outcome, kind);
                auto report = reasoning_trace(kernel, world);
                ++checked;
                if (hallucination_event(report, outcome.rejected))
                    return {false, "hallucination under perfect validation on world " +
                                       std::to_string(k)};
            }
        }
    }
    return {true, std::to_string(n_worlds) + " worlds, " + std::to_string(checked) +
                      " kernel traces, zero violations"};
}

// --- 3: excess-risk bounds on the grid --------------------------------------
Outcome criterion3() {
    const int n_worlds = 200;
    const std::vector<double> rates{0.0, 0.05, 0.2, 0.5};
    long long instances = 0;
    long long satisfied = 0;
    for (int k = 0; k < n_worlds; ++k) {
        const int m = 2 + k % 5;
        auto world = random_world(1000 + static_cast<std::uint64_t>(k), m, 3, 2);
        std::vector<ValidatorSpec> specs;
        for (double a : rates)
            for (double b : rates) specs.push_back(ValidatorSpec::homogeneous(m, a, b));
        auto reports = verify_bounds_grid(world, specs);
        for (std::size_t s = 0; s < specs.size(); ++s) {
            const auto& report = reports[s];
            ++instances;
            g_exact_runs.push_back(report.audited);
            if (report.per_premise_satisfied && report.homogeneous_satisfied) ++satisfied;
            const bool zero_rates = specs[s].alpha[0] == 0.0 && specs[s].beta[0] == 0.0;
            if (zero_rates && report.empirical_excess != 0.0)
                return {false, "nonzero excess at alpha=beta=0 on world " + std::to_string(k)};
        }
    }
    if (satisfied != instances)
        return {false, std::to_string(instances - satisfied) + "/" +
                           std::to_string(instances) + " instances violated a bound"};
    return {true, std::to_string(satisfied) + "/" + std::to_string(instances) +
                      " instances satisfied both bounds; excess exactly 0 at zero rates"};
}

// --- 2: decomposition identity over every exact run ------------------------
Outcome criterion2() {
    if (g_exact_runs.empty()) return {false, "no exact runs collected"};
    double worst = 0.0;
    for (const auto& report : g_exact_runs) {
        const double gap =
            std::abs(report.assumption_term + report.inference_term - report.total_risk);
        worst = std::max(worst, gap);
        if (gap > 1e-12) return {false, "identity gap " + fmt(gap)};
    }
    return {true, std::to_string(g_exact_runs.size()) + " exact runs, max identity gap " +
                      fmt(worst)};
}

// --- 4: elimination equals brute force on trees -----------------------------
Outcome criterion4() {
    SplitMix64 rng(424242);
    long long cases = 0;
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
        const int m = 3 + k % 6;  // 3..8
        auto world = random_tree_world(5000 + static_cast<std::uint64_t>(k), m, 3, 2);
        for (int variant = 0; variant < 3; ++variant) {
            std::set<int> validated;
            if (variant > 0) {
                for (int i = 0; i < m; ++i)
                    if (rng.below(3) == 0) validated.insert(i);
            }
            Evidence evidence;
            if (variant == 2) {
                Assignment g(m);
                for (int i = 0; i < m; ++i)
                    g[i] = static_cast<int>(rng.below(world.premises[i].domain_size));
                evidence = Evidence::value(validated, g);
            } else {
                evidence = Evidence::event(validated);
            }
            PosteriorReport brute;
            try {
                brute = constrained_posterior(world, evidence);
            } catch (const ImpossibleEvidenceError&) {
                continue;  // floored factors make this unreachable, but stay safe
            }

            std::vector<int> rejected;
            for (int i = 0; i < m; ++i)
                if (validated.count(i) == 0) rejected.push_back(i);
            for (int order_id = 0; order_id < 6; ++order_id) {
                std::vector<int> order = rejected;
                if (order_id == 1) {
                    std::reverse(order.begin(), order.end());
                } else if (order_id >= 2) {
                    for (std::size_t j = order.size(); j > 1; --j)
                        std::swap(order[j - 1], order[rng.below(j)]);
                }
                auto elim = posterior_via_elimination(world, order, evidence);
                ++cases;
                for (int y = 0; y < world.n_labels; ++y)
                    worst = std::max(worst, std::abs(elim.probs[y] - brute.probs[y]));
                worst = std::max(worst, std::abs(elim.evidence_mass - brute.evidence_mass));
            }
        }
    }
    if (cases < 1000) return {false, "only " + std::to_string(cases) + " cases exercised"};
    if (worst >= 1e-10) return {false, "max deviation " + fmt(worst)};
    return {true, std::to_string(cases) + " cases, max deviation " + fmt(worst)};
}

// --- 5: cost accounting ------------------------------------------------------
Outcome criterion5() {
    // Validation charges exactly m oracle calls per audit.
    for (int k = 0; k < 100; ++k) {
        const int m = 2 + k % 5;
        auto world = random_world(9000 + static_cast<std::uint64_t>(k), m, 3, 2);
        auto rows = enumerate_assignments(world);
        const auto& g = rows[k % rows.size()].first;
        CostLedger ledger;
        audit_perfect(world, g, &ledger);
        if (ledger.validator_calls != m) return {false, "perfect audit charged wrong call count"};
        CounterRng rng(5, static_cast<std::uint64_t>(k));
        audit_probabilistic(ValidatorSpec::homogeneous(m, 0.2, 0.2), support_status(world, g),
                            rng, &ledger);
        if (ledger.validator_calls != 2 * m)
            return {false, "probabilistic audit charged wrong call count"};
    }

    // Binary chains: op counts fit op(n) = a*n + b with zero residual.
    const std::vector<int> lengths{4, 8, 16, 32};
    std::vector<double> ops;
    for (int n : lengths) {
        auto world = binary_chain_world(n);
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        auto post = posterior_via_elimination(world, order, Evidence::none());
        ops.push_back(static_cast<double>(post.ledger.score_evals));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        sx += lengths[i];
        sy += ops[i];
        sxx += static_cast<double>(lengths[i]) * lengths[i];
        sxy += lengths[i] * ops[i];
    }
    const double n_pts = static_cast<double>(lengths.size());
    const double slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n_pts;
    double max_residual = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i)
        max_residual =
            std::max(max_residual, std::abs(ops[i] - (slope * lengths[i] + intercept)));
    if (max_residual > 1e-9)
        return {false, "chain op counts deviate from a line, residual " + fmt(max_residual)};
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (ops[i] > (slope + 1e-9) * lengths[i] + std::abs(intercept) + 1e-9)
            return {false, "op(n) exceeds c*n"};
    }

    // Independent premises: total ops proportional to the summed domain sizes.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SplitMix64 rng(seed + 77);
        std::vector<int> domains;
        long long dom_sum = 0;
        const int m = 3 + static_cast<int>(rng.below(4));
        for (int i = 0; i < m; ++i) {
            domains.push_back(2 + static_cast<int>(rng.below(3)));
            dom_sum += domains.back();
        }
        auto world = independent_world(domains, 2);
        std::vector<int> order(m);
        for (int i = 0; i < m; ++i) order[i] = i;
        auto post = posterior_via_elimination(world, order, Evidence::none());
        const long long expected =
            (dom_sum - domains[0]) + static_cast<long long>(domains[0]) * 2;
        if (post.ledger.score_evals != expected)
            return {false, "independent-world op count mismatch"};
        if (post.ledger.score_evals > 2 * dom_sum)
            return {false, "independent-world ops not proportional to domain sum"};
    }
    return {true, "m calls per audit; chain ops fit " + fmt(slope) + "*n+" + fmt(intercept) +
                      " exactly; independent ops = sum of domains (label factor x|Y|)"};
}

// --- 6: Chow abstention ------------------------------------------------------
Outcome criterion6() {
    // (a) The rule fires iff max posterior <= 1 - lambda, 0-1 loss.
    SplitMix64 rng(606060);
    for (int p = 0; p < 100; ++p) {
        const int n_labels = 2 + static_cast<int>(rng.below(4));
        PosteriorReport post;
        post.probs.resize(n_labels);
        double total = 0.0;
        for (double& v : post.probs) total += v = rng.uniform() + 1e-12;
        for (double& v : post.probs) v /= total;
        const auto loss = zero_one_loss(n_labels);
        double maxp = 0.0;
        for (double v : post.probs) maxp = std::max(maxp, v);
        for (int l = 0; l <= 10; ++l) {
            const double lambda = l / 10.0;
            auto [action, expected] = bayes_action(post, loss);
            (void)action;
            const bool rule = expected >= lambda;          // abstain decision
            const bool max_form = maxp <= 1.0 - lambda;    // the 0-1 equivalence
            if (rule != max_form)
                return {false, "rule/max-posterior mismatch at lambda " + fmt(lambda)};
            // Dominance identity for the fixed posterior.
            const double with_abstain = std::min(lambda, expected);
            if (with_abstain > expected + 1e-15)
                return {false, "abstention raised the posterior expected loss"};
        }
    }

    // (b) Exact-risk dominance for predictors whose decision posterior is the
    // class conditional (standard and full-conditioning kernels).
    long long comparisons = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const int m = 2 + static_cast<int>(seed % 3);
        auto world = random_world(7000 + seed, m, 3, 2);
        for (auto kind : {KernelKind::Standard, KernelKind::Credulous}) {
            for (const auto& vspec :
                 {ValidatorSpec::perfect(m), ValidatorSpec::homogeneous(m, 0.2, 0.2)}) {
                for (int l = 0; l <= 10; ++l) {
                    PredictorSpec with;
                    with.kind = kind;
                    with.use_abstention = true;
                    with.lambda = l / 10.0;
                    PredictorSpec without;
                    without.kind = kind;
                    without.use_abstention = false;
                    auto a = exact_risk(world, vspec, with);
                    auto b = exact_risk(world, vspec, without);
                    g_exact_runs.push_back(a);
                    g_exact_runs.push_back(b);
                    ++comparisons;
                    if (a.total_risk > b.total_risk + 1e-12)
                        return {false, "abstaining policy exceeded always-answer by " +
                                           fmt(a.total_risk - b.total_risk)};
                }
            }
        }
    }
    return {true, "1100 rule/max-form agreements; " + std::to_string(comparisons) +
                      " exact-risk dominance comparisons hold"};
}

// --- 7: parser fixtures and fuzz ---------------------------------------------
Outcome criterion7() {
    auto results = harness::run_parse_fixtures(AOU_SOURCE_DIR "/fixtures/parse");
    if (results.size() < 40)
        return {false, "only " + std::to_string(results.size()) + " fixtures shipped"};
    for (const auto& r : results)
        if (!r.pass) return {false, r.name + ": " + r.message};

    SplitMix64 rng(789);
    const std::string alphabet = "Gg0123456789:.-[]supportedMISSING \t\n\xE2\x80\x93";
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t len = rng.below(256);
        std::string raw;
        for (std::size_t i = 0; i < len; ++i) {
            raw.push_back(rng.below(3) == 0 ? static_cast<char>(rng.below(256))
                                            : alphabet[rng.below(alphabet.size())]);
        }
        try {
            auto assumptions = pipeline::parse_assumptions(raw);
            for (const auto& line : assumptions.lines)
                if (line.index < 1 || line.text.empty())
                    return {false, "assumption invariant violated under fuzz"};
            auto audit = pipeline::parse_audit(raw, {1, 2, 3});
            if (audit.lines.size() != 3) return {false, "audit totality violated under fuzz"};
            (void)pipeline::extract_answer(raw);
        } catch (const std::exception& e) {
            return {false, std::string("parser aborted on fuzz input: ") + e.what()};
        }
    }
    return {true, std::to_string(results.size()) + " fixtures pass; 10^4 fuzz inputs, no aborts"};
}

// --- 8 & 9: end-to-end pipeline against the shipped mock ----------------------
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("aou-acceptance-" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Outcome criterion8(nlohmann::json* sc_report_out) {
    ::setenv("AOU_API_KEY", "acceptance-key", 1);
    TempDir dir("e2e");

    mock::ScriptedServer server(
        mock::ScriptedServer::load_script(AOU_SOURCE_DIR "/fixtures/mock/script.json"));
    server.start();

    harness::RunConfig config;
    config.dataset_path = AOU_SOURCE_DIR "/fixtures/mock/items.jsonl";
    config.format = harness::DatasetFormat::GenericJsonl;
    config.strategy = "aou";
    config.llm.base_url = server.base_url();
    config.llm.temperature = 1.0;
    config.llm.max_tokens = 526;
    config.llm.backoff_initial_s = 0.0;
    config.llm.cache_dir = (dir.path / "cache").string();
    config.out_dir = (dir.path / "aou").string();

    auto metrics = harness::run_experiment(config);
    if (metrics.n_items != 10)
        return {false, "expected 10 items, got " + std::to_string(metrics.n_items)};
    if (metrics.accuracy != 1.0) return {false, "audited accuracy " + fmt(metrics.accuracy)};
    for (const auto& item : metrics.items) {
        if (!item.warnings.empty())
            return {false, "warning on item " + item.id + ": " + item.warnings.front()};
    }
    if (server.unmatched_count() != 0) return {false, "mock served an unmatched request"};

    // Self-consistency vote, protocol constants as configured.
    mock::ScriptedServer sc_server(
        mock::ScriptedServer::load_script(AOU_SOURCE_DIR "/fixtures/mock/sc_script.json"));
    sc_server.start();
    harness::RunConfig sc = config;
    sc.dataset_path = AOU_SOURCE_DIR "/fixtures/mock/sc_items.jsonl";
    sc.strategy = "self_consistency";
    sc.n_samples = 20;
    sc.llm.base_url = sc_server.base_url();
    sc.llm.cache_dir = (dir.path / "sc-cache").string();
    sc.out_dir = (dir.path / "sc").string();
    auto sc_metrics = harness::run_experiment(sc);
    if (sc_metrics.n_items != 1 || sc_metrics.accuracy != 1.0)
        return {false, "self-consistency vote did not return the majority answer"};
    if (!sc_metrics.items[0].predicted || *sc_metrics.items[0].predicted != 5.0)
        return {false, "8-vs-12 vote returned the minority answer"};

    std::ifstream report_file(fs::path(sc.out_dir) / "report.json");
    if (!report_file) return {false, "self-consistency run wrote no report"};
    nlohmann::json report;
    report_file >> report;
    *sc_report_out = report;
    return {true, "audited strategy 10/10 correct with zero warnings; 8-vs-12 vote -> 5"};
}

Outcome criterion9(const nlohmann::json& sc_report) {
    if (sc_report.is_null()) return {false, "no report captured from the mock run"};
    const auto& config = sc_report.at("config");
    if (config.value("temperature", 0.0) != 1.0)
        return {false, "report temperature is not 1.0"};
    if (config.value("max_tokens", 0) != 526) return {false, "report max_tokens is not 526"};
    if (config.value("n_samples", 0) != 20) return {false, "report n_samples is not 20"};
    if (!config.contains("master_seed")) return {false, "report lacks the seed snapshot"};
    if (!config.contains("model") || !config.contains("base_url"))
        return {false, "report lacks endpoint identification"};
    return {true, "protocol constants (temperature 1.0, 526 tokens, n=20, seeds) embedded in "
                  "the report and runnable against any compatible endpoint"};
}

}  // namespace

int main() {
    struct Row {
        int id;
        const char* name;
        Outcome outcome;
        double seconds;
        double budget;  // <= 0 means no stated budget
    };
    std::vector<Row> rows;

    auto run = [&rows](int id, const char* name, double budget, auto&& fn) {
        Timer timer;
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = timer.seconds();
        if (budget > 0 && elapsed > budget && outcome.pass)
            outcome = {false, "runtime " + fmt(elapsed) + "s exceeds budget"};
        rows.push_back({id, name, outcome, elapsed, budget});
    };

    run(1, "trace containment and no-hallucination under perfect validation", 120.0,
        criterion1);
    run(3, "excess-risk bounds on the 200-world rate grid", 600.0, criterion3);
    run(2, "risk decomposition identity on every exact run", 0.0, criterion2);
    run(4, "elimination matches brute-force marginalization", 0.0, criterion4);
    run(5, "cost accounting: audits, chains, independent worlds", 0.0, criterion5);
    run(6, "abstention rule equivalence and risk dominance", 0.0, criterion6);
    run(7, "phase-output grammars: fixtures and fuzz", 0.0, criterion7);
    nlohmann::json sc_report;
    run(8, "end-to-end pipeline against the scripted endpoint", 0.0,
        [&sc_report] { return criterion8(&sc_report); });
    run(9, "protocol constants embedded in the run report", 0.0,
        [&sc_report] { return criterion9(sc_report); });

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
    bool all_pass = true;
    for (const auto& row : rows) {
        all_pass = all_pass && row.outcome.pass;
        std::cout << (row.outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << row.id << ": "
                  << row.name << " (" << fmt(row.seconds) << "s)";
        if (!row.outcome.detail.empty()) std::cout << " - " << row.outcome.detail;
        std::cout << "\n";
    }
    std::cout << (all_pass ? "ACCEPTANCE: all criteria passed"
                           : "ACCEPTANCE: at least one criterion failed")
              << "\n";
    return all_pass ? 0 : 1;
}
