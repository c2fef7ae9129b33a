#pragma once

#include <set>
#include <vector>

#include "aou/rng.hpp"
#include "aou/world.hpp"

namespace aou {

enum class ValidatorKind { Perfect, Rates };

// Auditor error model: alpha[i] is the false-negative rate (reject a
// supported premise), beta[i] the false-positive rate (accept an
// unsupported one). Perfect is behaviorally identical to all-zero rates.
struct ValidatorSpec {
    ValidatorKind kind = ValidatorKind::Perfect;
    std::vector<double> alpha;
    std::vector<double> beta;

    static ValidatorSpec perfect(int m) {
        ValidatorSpec s;
        s.kind = ValidatorKind::Perfect;
        s.alpha.assign(m, 0.0);
        s.beta.assign(m, 0.0);
        return s;
    }

    static ValidatorSpec rates(std::vector<double> alpha, std::vector<double> beta) {
        ValidatorSpec s;
        s.kind = ValidatorKind::Rates;
        s.alpha = std::move(alpha);
        s.beta = std::move(beta);
        return s;
    }

    static ValidatorSpec homogeneous(int m, double alpha, double beta) {
        return rates(std::vector<double>(m, alpha), std::vector<double>(m, beta));
    }

    double alpha_at(int i) const { return kind == ValidatorKind::Perfect ? 0.0 : alpha[i]; }
    double beta_at(int i) const { return kind == ValidatorKind::Perfect ? 0.0 : beta[i]; }
};

std::vector<std::string> validate_spec(const ValidatorSpec& spec, int m);

// Verdict vector v and the induced partition into validated and rejected
// index sets (0-based).
struct ValidationOutcome {
    std::vector<int> verdicts;
    std::set<int> validated;
    std::set<int> rejected;

    static ValidationOutcome from_verdicts(std::vector<int> v);
};

ValidationOutcome audit_perfect(const WorldModel& world, const Assignment& g_star,
                                CostLedger* ledger = nullptr);

// Independent per-premise Bernoulli errors; draw i uses rng slot i, so the
// outcome is a pure function of (seed, trial, premise).
ValidationOutcome audit_probabilistic(const ValidatorSpec& spec, const std::vector<int>& support,
                                      const CounterRng& rng, CostLedger* ledger = nullptr);

// All 2^m verdict vectors with product-form probabilities.
std::vector<std::pair<ValidationOutcome, double>> outcome_distribution(
    const ValidatorSpec& spec, const std::vector<int>& support, int premise_cap = 20);

// P(v | support) for one verdict vector, product over premises.
double outcome_probability(const ValidatorSpec& spec, const std::vector<int>& support,
                           const std::vector<int>& verdicts);

}  // namespace aou
