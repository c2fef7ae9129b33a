#pragma once

#include <functional>
#include <set>
#include <vector>

#include "aou/inference.hpp"

namespace aou {

enum class KernelKind { AoUEvent, AoUValue, Standard, Credulous, Custom };

// Deterministic decision map for one (world, validation outcome): total
// assignment -> action index or kAbstain.
struct DecisionKernel {
    KernelKind kind = KernelKind::Custom;
    std::function<int(const Assignment&)> fn;

    int operator()(const Assignment& g) const { return fn(g); }
};

struct TraceReport {
    std::vector<std::set<int>> minimal_support_sets;
    std::set<int> trace;  // intersection of all minimal support sets
    int k_trace = 0;
    bool hallucination = false;  // filled by hallucination_event
};

inline constexpr int kMaxTracePremises = 12;

// True iff the kernel is invariant across assignment pairs agreeing on S,
// checked by exhaustive enumeration.
bool is_support_set(const DecisionKernel& kernel, const WorldModel& world,
                    const std::set<int>& s, long long cap = kDefaultEnumerationCap);

// Enumerates subsets by ascending cardinality, keeps the inclusion-minimal
// support sets, and intersects them.
TraceReport reasoning_trace(const DecisionKernel& kernel, const WorldModel& world,
                            long long cap = kDefaultEnumerationCap);

bool hallucination_event(const TraceReport& report, const std::set<int>& rejected);

// AoUEvent / Standard ignore g entirely; AoUValue reads g restricted to the
// validated set; Credulous conditions on all realized values, including
// rejected premises.
DecisionKernel build_kernel(const WorldModel& world, const ValidationOutcome& outcome,
                            KernelKind kind, const DecideOptions& options = {},
                            long long cap = kDefaultEnumerationCap);

const char* kernel_kind_name(KernelKind kind);

namespace detail {

// Same subset enumeration as reasoning_trace, over precomputed per-rank
// actions (rank order matches unrank).
TraceReport trace_from_actions(const std::vector<int>& actions, const WorldModel& world);

// Bayes/abstention decision for every joint state of the validated
// variables, formed by one bucketed pass whose per-bucket sums are exactly
// the sums constrained_posterior would compute for that value evidence.
struct ValueDecisionTable {
    std::vector<int> validated;      // ascending
    std::vector<long long> strides;  // aligned with validated
    std::vector<int> decisions;      // by key; kAbstain on zero-mass keys

    long long key_of(const Assignment& g) const {
        long long key = 0;
        for (std::size_t k = 0; k < validated.size(); ++k)
            key += static_cast<long long>(g[validated[k]]) * strides[k];
        return key;
    }

    int at(const Assignment& g) const {
        return decisions[static_cast<std::size_t>(key_of(g))];
    }
};

ValueDecisionTable value_decision_table(const WorldModel& world, const std::set<int>& validated,
                                        const DecideOptions& options, long long cap);

}  // namespace detail

}  // namespace aou
