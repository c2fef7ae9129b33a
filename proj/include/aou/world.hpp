#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "aou/errors.hpp"

namespace aou {

// A total joint assignment g; values[i] is the state of premise i.
using Assignment = std::vector<int>;

// Possibly-partial assignment, used as evidence values.
using PartialAssignment = std::vector<std::optional<int>>;

inline constexpr long long kDefaultEnumerationCap = 1LL << 20;

// Action value for the reject option.
inline constexpr int kAbstain = -1;

enum class Phase1Label { Given, Inferred, Missing };

// One candidate assumption G_i, modeled as a discrete variable with a
// designated set of supported states.
struct Premise {
    int id = 0;  // 1-based, informational
    std::string text;
    int domain_size = 2;
    std::set<int> supported_states;
    std::optional<Phase1Label> phase1_label;
};

struct FullTablePrior {
    std::vector<double> probs;  // lexicographic by (g_1,...,g_m)
};

struct ProductPrior {
    std::vector<std::vector<double>> factors;  // one categorical per premise
};

// Nonnegative table over the joint states of `scope`. Scope indices are
// premise positions; the value world.label_index() denotes the label
// variable. The last scope entry varies fastest.
struct Factor {
    std::vector<int> scope;
    std::vector<double> table;
};

struct FactorListPrior {
    std::vector<Factor> factors;
};

using Prior = std::variant<FullTablePrior, ProductPrior, FactorListPrior>;

struct FullLabelTable {
    std::vector<std::vector<double>> rows;  // rows[rank(g)][y]
};

// P(y | g restricted to scope); each scope-state row is normalized over y.
struct FactoredLabel {
    std::vector<int> scope;
    std::vector<double> table;  // scope-joint-major, label fastest
};

using LabelModel = std::variant<FullLabelTable, FactoredLabel>;

// Unit-cost oracle accounting: validator calls, label-conditional
// evaluations, and premise-incorporation updates.
struct CostLedger {
    long long validator_calls = 0;
    long long score_evals = 0;
    long long stat_updates = 0;

    CostLedger& operator+=(const CostLedger& o) {
        validator_calls += o.validator_calls;
        score_evals += o.score_evals;
        stat_updates += o.stat_updates;
        return *this;
    }
};

struct WorldModel {
    std::vector<Premise> premises;
    Prior prior = ProductPrior{};
    int n_labels = 2;
    LabelModel label_model = FullLabelTable{};
    std::vector<std::vector<double>> loss;  // empty => 0-1 loss with actions = labels
    double abstain_cost = 0.5;

    int premise_count() const { return static_cast<int>(premises.size()); }

    // Distinguished factor-scope index for the label variable.
    int label_index() const { return premise_count(); }

    int action_count() const {
        return loss.empty() ? n_labels : static_cast<int>(loss.size());
    }

    double loss_at(int action, int label) const {
        return loss.empty() ? (action == label ? 0.0 : 1.0) : loss[action][label];
    }
};

// Product of domain sizes; throws EnumerationTooLargeError beyond `cap`.
long long checked_joint_size(const WorldModel& world, long long cap = kDefaultEnumerationCap);

// Unchecked product as long double (for diagnostics on oversized worlds).
long double joint_size_ld(const WorldModel& world);

long long rank_of(const WorldModel& world, const Assignment& g);
Assignment unrank(const WorldModel& world, long long rank);

double prior_prob(const WorldModel& world, const Assignment& g);
double label_prob(const WorldModel& world, const Assignment& g, int label);

// Every invariant violation, one description each; empty iff valid.
std::vector<std::string> validate_world(const WorldModel& world,
                                        long long cap = kDefaultEnumerationCap);

// All (assignment, prior probability) rows in lexicographic order.
std::vector<std::pair<Assignment, double>> enumerate_assignments(
    const WorldModel& world, long long cap = kDefaultEnumerationCap);

// s[i] = 1 iff g[i] is a supported state of premise i.
std::vector<int> support_status(const WorldModel& world, const Assignment& g);

// Partial assignments are rejected with MissingValueError.
std::vector<int> support_status(const WorldModel& world, const PartialAssignment& g);

std::vector<std::vector<double>> zero_one_loss(int n_labels);

}  // namespace aou
