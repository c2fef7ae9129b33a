#pragma once

#include <optional>
#include <set>
#include <vector>

#include "aou/validation.hpp"
#include "aou/world.hpp"

namespace aou {

// Event mode conditions on {g_i in S_i+} for each validated premise;
// value mode conditions on the realized value of each validated premise.
enum class EvidenceMode { Event, Value };

struct Evidence {
    EvidenceMode mode = EvidenceMode::Event;
    std::set<int> validated;
    PartialAssignment observed;  // value mode: defined exactly on `validated`

    static Evidence event(std::set<int> validated) {
        Evidence e;
        e.mode = EvidenceMode::Event;
        e.validated = std::move(validated);
        return e;
    }

    // Value-mode evidence reading the validated coordinates of g.
    static Evidence value(const std::set<int>& validated, const Assignment& g) {
        Evidence e;
        e.mode = EvidenceMode::Value;
        e.validated = validated;
        e.observed.assign(g.size(), std::nullopt);
        for (int i : validated) e.observed[i] = g[i];
        return e;
    }

    static Evidence none() { return Evidence{}; }
};

void validate_evidence(const WorldModel& world, const Evidence& evidence);
bool consistent_with(const WorldModel& world, const Evidence& evidence, const Assignment& g);

struct PosteriorReport {
    std::vector<double> probs;
    double evidence_mass = 1.0;
    CostLedger ledger;
};

enum class AbstainReason { None, ChowRule, ImpossibleEvidence };

struct DecisionReport {
    int action = kAbstain;
    double expected_loss = 0.0;
    PosteriorReport posterior;
    bool abstained = false;
    AbstainReason reason = AbstainReason::None;
};

// Brute-force marginalization: probs[y] = sum over consistent g of P(y|g) P(g),
// normalized by the evidence mass.
PosteriorReport constrained_posterior(const WorldModel& world, const Evidence& evidence,
                                      long long cap = kDefaultEnumerationCap);

// Full marginalization over all premises (no validation constraints).
PosteriorReport standard_posterior(const WorldModel& world,
                                   long long cap = kDefaultEnumerationCap);

// Variables to sum out, in order; must be a permutation of the rejected set.
using EliminationOrder = std::vector<int>;

// Variable elimination over the world's factorized prior and label model.
// score_evals counts, per elimination step, the size of the product table
// built over the step's union scope.
PosteriorReport posterior_via_elimination(const WorldModel& world, const EliminationOrder& order,
                                          const Evidence& evidence);

// argmin_a sum_y L[a][y] probs[y]; ties broken by lowest action index.
std::pair<int, double> bayes_action(const PosteriorReport& posterior,
                                    const std::vector<std::vector<double>>& loss);

// How unvalidated premises are completed when forming the decision: the
// prior conditioned on the evidence (the default marginalization), or a
// worst-case completion maximizing the chosen action's expected loss.
enum class CompletionFamily { Prior, Adversarial };

struct DecideOptions {
    bool use_abstention = false;
    std::optional<double> lambda;  // defaults to world.abstain_cost
    CompletionFamily completion = CompletionFamily::Prior;
};

// Builds evidence from the validated set per mode, computes the constrained
// posterior, and applies the Bayes/abstention rule. Value mode requires the
// realized assignment to read validated values from.
DecisionReport aou_decide(const WorldModel& world, const ValidationOutcome& outcome,
                          EvidenceMode mode, const DecideOptions& options = {},
                          const std::optional<Assignment>& g_star = std::nullopt,
                          long long cap = kDefaultEnumerationCap);

}  // namespace aou
