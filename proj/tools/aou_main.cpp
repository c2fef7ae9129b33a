// Command-line entry point: the discrete risk lab (sim, bounds, trace) and
// the LLM experiment harness (run, eval, parse) behind one binary.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aou/harness/parse_fixtures.hpp"
#include "aou/harness/runner.hpp"
#include "aou/risk.hpp"
#include "aou/world_io.hpp"

namespace fs = std::filesystem;
using namespace aou;

namespace {

KernelKind kernel_kind_from(const std::string& name) {
    if (name == "aou-event") return KernelKind::AoUEvent;
    if (name == "aou-value") return KernelKind::AoUValue;
    if (name == "standard") return KernelKind::Standard;
    if (name == "credulous") return KernelKind::Credulous;
    throw InvalidArgumentError("unknown kernel kind " + name +
                               " (expected aou-event|aou-value|standard|credulous)");
}

std::vector<int> csv_ints(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::string set_to_text(const std::set<int>& s) {
    std::string out = "{";
    bool first = true;
    for (int i : s) {
        if (!first) out += ", ";
        out += "G" + std::to_string(i + 1);
        first = false;
    }
    return out + "}";
}

// Ordered bounded-parallel map; results land by index.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& fn) {
    std::vector<T> out(n);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::future<T>> inflight;
    std::size_t next = 0;
    std::size_t write = 0;
    auto pump = [&](std::size_t target) {
        while (next < n && inflight.size() - write < static_cast<std::size_t>(jobs) &&
               inflight.size() < n) {
            const std::size_t i = next++;
            (void)target;
            inflight.push_back(std::async(std::launch::async, [&fn, i] { return fn(i); }));
        }
    };
    pump(n);
    while (write < n) {
        out[write] = inflight[write].get();
        ++write;
        pump(n);
    }
    return out;
}

struct GridPoint {
    std::uint64_t seed;
    int m;
    double alpha;
    double beta;
};

int cmd_sim(int worlds, std::uint64_t seed, int m_min, int m_max, int max_domain, int labels,
            const std::vector<double>& alphas, const std::vector<double>& betas,
            const std::string& kind_name, bool abstain, double lambda, long long mc,
            std::uint64_t mc_seed, const std::string& out_path, int jobs) {
    PredictorSpec predictor;
    predictor.kind = kernel_kind_from(kind_name);
    predictor.use_abstention = abstain;
    if (lambda >= 0.0) predictor.lambda = lambda;

    std::vector<GridPoint> grid;
    for (int k = 0; k < worlds; ++k) {
        const int m = m_min + (m_max > m_min ? k % (m_max - m_min + 1) : 0);
        for (double a : alphas)
            for (double b : betas) grid.push_back({seed + static_cast<std::uint64_t>(k), m, a, b});
    }

    struct Row {
        GridPoint point;
        RiskReport report;
    };
    auto rows = parallel_map<Row>(grid.size(), jobs, [&](std::size_t i) {
        const auto& p = grid[i];
        auto world = random_world(p.seed, p.m, max_domain, labels);
        auto vspec = ValidatorSpec::homogeneous(p.m, p.alpha, p.beta);
        Row row{p, {}};
        if (mc > 0) {
            row.report = mc_risk(world, vspec, predictor, mc, mc_seed + p.seed);
        } else {
            try {
                row.report = exact_risk(world, vspec, predictor);
            } catch (const EnumerationTooLargeError&) {
                row.report = mc_risk(world, vspec, predictor, 100000, mc_seed + p.seed);
            }
        }
        return row;
    });

    std::ostringstream table;
    table << "world_seed\tm\talpha\tbeta\ttotal_risk\tassumption_term\tinference_term"
          << "\tabstention_rate\texact\tmc_stderr\n";
    for (const auto& row : rows) {
        table << row.point.seed << "\t" << row.point.m << "\t" << row.point.alpha << "\t"
              << row.point.beta << "\t" << row.report.total_risk << "\t"
              << row.report.assumption_term << "\t" << row.report.inference_term << "\t"
              << row.report.abstention_rate << "\t" << (row.report.exact ? 1 : 0) << "\t"
              << row.report.mc_stderr << "\n";
    }
    std::cout << table.str();
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << table.str();
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
    }
    return 0;
}

int cmd_bounds(int worlds, std::uint64_t seed, int m_min, int m_max, int max_domain, int labels,
               const std::vector<double>& alphas, const std::vector<double>& betas,
               const std::string& out_path, int jobs) {
    struct Row {
        GridPoint point;
        ExcessRiskReport report;
    };
    std::vector<GridPoint> grid;
    for (int k = 0; k < worlds; ++k) {
        const int m = m_min + (m_max > m_min ? k % (m_max - m_min + 1) : 0);
        for (double a : alphas)
            for (double b : betas) grid.push_back({seed + static_cast<std::uint64_t>(k), m, a, b});
    }
    auto rows = parallel_map<Row>(grid.size(), jobs, [&](std::size_t i) {
        const auto& p = grid[i];
        auto world = random_world(p.seed, p.m, max_domain, labels);
        return Row{p, verify_bounds(world, ValidatorSpec::homogeneous(p.m, p.alpha, p.beta))};
    });

    std::ostringstream table;
    table << "world_seed\tm\talpha\tbeta\texcess\tfp_term\tfn_term\tper_premise_excess_bound"
          << "\thomogeneous_excess_bound\tsatisfied_t3\tsatisfied_cor\n";
    long long holds = 0;
    for (const auto& row : rows) {
        table << row.point.seed << "\t" << row.point.m << "\t" << row.point.alpha << "\t"
              << row.point.beta << "\t" << row.report.empirical_excess << "\t"
              << row.report.fp_term << "\t" << row.report.fn_term << "\t"
              << row.report.per_premise_excess_bound << "\t" << row.report.homogeneous_excess_bound << "\t"
              << (row.report.per_premise_satisfied ? 1 : 0) << "\t"
              << (row.report.homogeneous_satisfied ? 1 : 0) << "\n";
        if (row.report.per_premise_satisfied && row.report.homogeneous_satisfied) ++holds;
    }
    std::cout << table.str();
    std::cerr << "bounds satisfied on " << holds << "/" << rows.size() << " instances\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << table.str();
    }
    return holds == static_cast<long long>(rows.size()) ? 0 : 1;
}

int cmd_trace(const std::string& world_path, const std::string& g_star_csv,
              const std::string& verdicts_csv, const std::string& kind_name, bool abstain,
              double lambda) {
    auto world = load_world(world_path);
    const int m = world.premise_count();

    ValidationOutcome outcome;
    std::optional<Assignment> g_star;
    if (!g_star_csv.empty()) {
        Assignment g = csv_ints(g_star_csv);
        if (static_cast<int>(g.size()) != m)
            throw InvalidArgumentError("--g-star must list one value per premise");
        g_star = g;
    }
    if (!verdicts_csv.empty()) {
        auto v = csv_ints(verdicts_csv);
        if (static_cast<int>(v.size()) != m)
            throw InvalidArgumentError("--verdicts must list one bit per premise");
        outcome = ValidationOutcome::from_verdicts(v);
    } else if (g_star) {
        outcome = audit_perfect(world, *g_star);
    } else {
        throw InvalidArgumentError("trace needs --verdicts or --g-star");
    }

    const KernelKind kind = kernel_kind_from(kind_name);
    DecideOptions options;
    options.use_abstention = abstain;
    if (lambda >= 0.0) options.lambda = lambda;
    if (kind == KernelKind::AoUValue && !g_star)
        throw InvalidArgumentError("aou-value traces need --g-star for the realized values");

    auto kernel = build_kernel(world, outcome, kind, options);
    auto report = reasoning_trace(kernel, world);
    report.hallucination = hallucination_event(report, outcome.rejected);

    std::cout << "world: " << world_path << "\n";
    std::cout << "kind: " << kernel_kind_name(kind) << "\n";
    std::cout << "validated: " << set_to_text(outcome.validated) << "\n";
    std::cout << "rejected: " << set_to_text(outcome.rejected) << "\n";
    std::cout << "minimal_support_sets:\n";
    for (const auto& s : report.minimal_support_sets) std::cout << "  - " << set_to_text(s) << "\n";
    std::cout << "trace: " << set_to_text(report.trace) << "\n";
    std::cout << "k_trace: " << report.k_trace << "\n";
    std::cout << "hallucination: " << (report.hallucination ? "true" : "false") << "\n";
    return 0;
}

int cmd_parse(const std::string& dir) {
    auto results = harness::run_parse_fixtures(dir);
    std::size_t passed = 0;
    for (const auto& r : results) {
        if (r.pass) {
            ++passed;
            std::cout << "PASS " << r.name << "\n";
        } else {
            std::cout << "FAIL " << r.name << ": " << r.message << "\n";
        }
    }
    std::cout << passed << "/" << results.size() << " fixtures passed\n";
    return passed == results.size() ? 0 : 1;
}

int cmd_eval(const std::string& transcripts, const std::string& dataset_path,
             const std::string& format_name, const std::string& strategy,
             const std::string& hash) {
    auto format = harness::dataset_format_from_name(format_name);
    if (!format) throw ConfigError("unknown dataset format " + format_name);
    auto records = harness::load_dataset(dataset_path, *format);
    auto metrics = harness::evaluate_transcripts(transcripts, records, strategy, hash);
    std::cout << "items: " << metrics.n_items << "\n"
              << "answered: " << metrics.n_answered << "\n"
              << "correct: " << metrics.n_correct << "\n"
              << "failed: " << metrics.n_failed << "\n"
              << "accuracy: " << metrics.accuracy << "\n"
              << "answered_accuracy: " << metrics.answered_accuracy << "\n"
              << "abstention_rate: " << metrics.abstention_rate << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audited constrained-inference lab and math-benchmark harness"};
    app.require_subcommand(1);

    // --- sim ---------------------------------------------------------------
    auto* sim = app.add_subcommand("sim", "Exact or Monte-Carlo risk over seeded random worlds");
    int sim_worlds = 20;
    std::uint64_t sim_seed = 1;
    int sim_m_min = 2, sim_m_max = 5, sim_domain = 3, sim_labels = 2, sim_jobs = 1;
    std::vector<double> sim_alphas{0.0}, sim_betas{0.0};
    std::string sim_kind = "aou-value", sim_out;
    bool sim_abstain = false;
    double sim_lambda = -1.0;
    long long sim_mc = 0;
    std::uint64_t sim_mc_seed = 1000;
    sim->add_option("--worlds", sim_worlds, "number of random worlds");
    sim->add_option("--seed", sim_seed, "base world seed");
    sim->add_option("--m-min", sim_m_min, "min premises per world");
    sim->add_option("--m-max", sim_m_max, "max premises per world");
    sim->add_option("--max-domain", sim_domain, "max premise domain size");
    sim->add_option("--labels", sim_labels, "label count");
    sim->add_option("--alpha", sim_alphas, "false-negative rates (grid)")->delimiter(',');
    sim->add_option("--beta", sim_betas, "false-positive rates (grid)")->delimiter(',');
    sim->add_option("--kind", sim_kind, "predictor kind");
    sim->add_flag("--abstain", sim_abstain, "apply the abstention rule");
    sim->add_option("--lambda", sim_lambda, "abstention cost (default: world's)");
    sim->add_option("--mc", sim_mc, "Monte-Carlo trials (0 = exact)");
    sim->add_option("--mc-seed", sim_mc_seed, "Monte-Carlo master seed");
    sim->add_option("--out", sim_out, "also write the table to this file");
    sim->add_option("--jobs", sim_jobs, "parallel worlds");

    // --- bounds ------------------------------------------------------------
    auto* bounds = app.add_subcommand("bounds", "Excess-risk bound verification grid");
    int b_worlds = 200;
    std::uint64_t b_seed = 7;
    int b_m_min = 2, b_m_max = 6, b_domain = 3, b_labels = 2, b_jobs = 1;
    std::vector<double> b_alphas{0.1}, b_betas{0.1};
    std::string b_out;
    bounds->add_option("--worlds", b_worlds, "number of random worlds");
    bounds->add_option("--seed", b_seed, "base world seed");
    bounds->add_option("--m-min", b_m_min, "min premises per world");
    bounds->add_option("--m-max", b_m_max, "max premises per world");
    bounds->add_option("--max-domain", b_domain, "max premise domain size");
    bounds->add_option("--labels", b_labels, "label count");
    bounds->add_option("--alpha", b_alphas, "false-negative rates (grid)")->delimiter(',');
    bounds->add_option("--beta", b_betas, "false-positive rates (grid)")->delimiter(',');
    bounds->add_option("--out", b_out, "also write the table to this file");
    bounds->add_option("--jobs", b_jobs, "parallel worlds");

    // --- trace -------------------------------------------------------------
    auto* trace = app.add_subcommand("trace", "Reasoning-trace report for a world file");
    std::string t_world, t_gstar, t_verdicts, t_kind = "aou-value";
    bool t_abstain = false;
    double t_lambda = -1.0;
    trace->add_option("--world", t_world, "world document (JSON)")->required();
    trace->add_option("--g-star", t_gstar, "realized assignment, comma-separated");
    trace->add_option("--verdicts", t_verdicts, "validator bits, comma-separated");
    trace->add_option("--kind", t_kind, "kernel kind");
    trace->add_flag("--abstain", t_abstain, "apply the abstention rule");
    trace->add_option("--lambda", t_lambda, "abstention cost");

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Execute a benchmark strategy against an endpoint");
    harness::RunConfig rc;
    std::string run_format = "generic_jsonl";
    long long run_seed_opt = -1;
    run->add_option("--dataset", rc.dataset_path, "dataset file")->required();
    run->add_option("--format", run_format, "gsm8k|svamp|multiarith|generic_jsonl");
    run->add_option("--strategy", rc.strategy, "aou|cot|self_consistency");
    run->add_option("--n", rc.n_samples, "self-consistency sample count");
    run->add_option("--endpoint", rc.llm.base_url, "chat-completion endpoint root");
    run->add_option("--path", rc.llm.chat_path, "endpoint path");
    run->add_option("--model", rc.llm.model, "model identifier");
    run->add_option("--temperature", rc.llm.temperature, "sampling temperature");
    run->add_option("--max-tokens", rc.llm.max_tokens, "max output tokens");
    run->add_option("--timeout", rc.llm.request_timeout_s, "request timeout seconds");
    run->add_option("--retries", rc.llm.max_retries, "max retries");
    run->add_option("--api-key-env", rc.llm.api_key_env, "credential environment variable");
    run->add_option("--cache-dir", rc.llm.cache_dir, "response cache directory");
    run->add_option("--sampling-seed", run_seed_opt, "endpoint sampling seed (if supported)");
    run->add_option("--out", rc.out_dir, "output directory");
    run->add_option("--limit", rc.limit, "max items");
    run->add_option("--jobs", rc.jobs, "parallel items");
    run->add_option("--master-seed", rc.master_seed, "run seed recorded in the report");

    // --- eval --------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Re-score existing transcripts");
    std::string e_transcripts, e_dataset, e_format = "generic_jsonl", e_strategy, e_hash;
    eval->add_option("--transcripts", e_transcripts, "transcripts.jsonl")->required();
    eval->add_option("--dataset", e_dataset, "dataset file")->required();
    eval->add_option("--format", e_format, "dataset format");
    eval->add_option("--strategy", e_strategy, "filter by strategy");
    eval->add_option("--config-hash", e_hash, "filter by config hash");

    // --- parse -------------------------------------------------------------
    auto* parse = app.add_subcommand("parse", "Run the phase-output grammars over fixtures");
    std::string p_dir;
    parse->add_option("--fixtures", p_dir, "fixture directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_sim(sim_worlds, sim_seed, sim_m_min, sim_m_max, sim_domain, sim_labels,
                           sim_alphas, sim_betas, sim_kind, sim_abstain, sim_lambda, sim_mc,
                           sim_mc_seed, sim_out, sim_jobs);
        if (bounds->parsed())
            return cmd_bounds(b_worlds, b_seed, b_m_min, b_m_max, b_domain, b_labels, b_alphas,
                              b_betas, b_out, b_jobs);
        if (trace->parsed())
            return cmd_trace(t_world, t_gstar, t_verdicts, t_kind, t_abstain, t_lambda);
        if (run->parsed()) {
            auto format = harness::dataset_format_from_name(run_format);
            if (!format) throw ConfigError("unknown dataset format " + run_format);
            rc.format = *format;
            if (run_seed_opt >= 0) rc.llm.seed = run_seed_opt;
            auto metrics = harness::run_experiment(rc);
            std::cout << "items: " << metrics.n_items << "\n"
                      << "accuracy: " << metrics.accuracy << "\n"
                      << "answered_accuracy: " << metrics.answered_accuracy << "\n"
                      << "abstention_rate: " << metrics.abstention_rate << "\n"
                      << "failed: " << metrics.n_failed << "\n"
                      << "report: " << (fs::path(rc.out_dir) / "report.json").string() << "\n";
            return 0;
        }
        if (eval->parsed())
            return cmd_eval(e_transcripts, e_dataset, e_format, e_strategy, e_hash);
        if (parse->parsed()) return cmd_parse(p_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
