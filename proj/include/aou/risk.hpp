#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "aou/trace.hpp"

namespace aou {

struct RiskReport {
    double total_risk = 0.0;
    double assumption_term = 0.0;  // loss mass on hallucination events
    double inference_term = 0.0;   // loss mass on the complement
    double abstention_rate = 0.0;
    bool exact = true;
    bool decomposed = true;  // false when traces are beyond the cap
    double mc_stderr = 0.0;
    long long n_trials = 0;
};

struct TrialRecord {
    double weight = 1.0;
    double loss = 0.0;
    bool hallucination = false;
    bool abstained = false;
};

// Indicator-partitioned sums; they add to the total loss exactly.
std::pair<double, double> decompose_risk(const std::vector<TrialRecord>& records);

struct PredictorSpec {
    KernelKind kind = KernelKind::AoUValue;
    bool use_abstention = false;
    std::optional<double> lambda;  // defaults to world.abstain_cost
};

struct RateEstimates {
    std::vector<double> p_use;             // P(i in trace of the perfect-validation action)
    std::vector<double> p_use_given_unsup; // P(i used | i unsupported and accepted)
    std::vector<double> p_unsupported;     // prior P(g*_i outside S_i+)
    std::vector<double> delta;             // max marginal loss increase when withholding i
    double delta_max = 0.0;
    double e_k_trace = 0.0;   // E[k_trace under perfect validation]
    double e_min1_kfp = 0.0;  // E[min{1, K_FP}]
};

struct ExcessRiskReport {
    double empirical_excess = 0.0;
    double fp_term = 0.0;
    double fn_term = 0.0;
    double per_premise_excess_bound = 0.0;
    double homogeneous_excess_bound = 0.0;
    bool per_premise_satisfied = false;
    bool homogeneous_satisfied = false;
    RiskReport audited;  // R(a-hat under the probabilistic validator)
    RiskReport bayes;    // R(a-dagger under perfect validation)
    RateEstimates rates;
};

// Per-world exact-enumeration engine. Kernels, traces, and delta vectors are
// cached per validation outcome, so sweeping an (alpha, beta) grid over one
// world reuses the expensive parts. The world must outlive the lab.
class ExactLab {
public:
    ExactLab(const WorldModel& world, PredictorSpec spec,
             long long cap = kDefaultEnumerationCap);
    ~ExactLab();
    ExactLab(const ExactLab&) = delete;
    ExactLab& operator=(const ExactLab&) = delete;

    RiskReport risk(const ValidatorSpec& vspec);
    RateEstimates rates(const ValidatorSpec& vspec);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// total = sum over g*, v, y of P(g*) P(v | support(g*)) P(y|g*) L(decision, y),
// with the abstention loss substituted when the predictor rejects.
RiskReport exact_risk(const WorldModel& world, const ValidatorSpec& vspec,
                      const PredictorSpec& predictor, long long cap = kDefaultEnumerationCap);

// Rao-Blackwellized sampling estimator of the same expectation; trial t is a
// pure function of (master_seed, t).
RiskReport mc_risk(const WorldModel& world, const ValidatorSpec& vspec,
                   const PredictorSpec& predictor, long long n_trials,
                   std::uint64_t master_seed, long long cap = kDefaultEnumerationCap);

RateEstimates estimate_rates(const WorldModel& world, const ValidatorSpec& vspec,
                             KernelKind kind = KernelKind::AoUValue,
                             long long cap = kDefaultEnumerationCap);

double per_premise_excess_bound(const RateEstimates& rates, const std::vector<double>& alpha,
                      const std::vector<double>& beta);

double homogeneous_excess_bound(double alpha, double delta_max, double e_k_trace, double e_min1_kfp);

ExcessRiskReport verify_bounds(const WorldModel& world, const ValidatorSpec& vspec,
                               KernelKind kind = KernelKind::AoUValue,
                               long long cap = kDefaultEnumerationCap);

// Same check over a rate grid, sharing one lab's kernel and trace caches.
std::vector<ExcessRiskReport> verify_bounds_grid(const WorldModel& world,
                                                 const std::vector<ValidatorSpec>& specs,
                                                 KernelKind kind = KernelKind::AoUValue,
                                                 long long cap = kDefaultEnumerationCap);

// Product-prior world with factor probabilities floored at 0.05, sampled
// label rows, and uniformly chosen nonempty supported sets; deterministic in
// the seed.
WorldModel random_world(std::uint64_t seed, int m, int max_domain, int n_labels);

// Tree-structured factor-list prior (random parents, conditional factors)
// with a single-premise label factor; exact brute force stays available at
// small m while elimination exercises the bounded-treewidth path.
WorldModel random_tree_world(std::uint64_t seed, int m, int max_domain, int n_labels);

// Binary Markov chain of length n with the label hanging off the last
// premise; elimination op counts on it are exactly linear in n.
WorldModel binary_chain_world(int n);

// Independent premises with the given domain sizes; label factor on premise 0.
WorldModel independent_world(const std::vector<int>& domain_sizes, int n_labels);

}  // namespace aou
