#include "aou/validation.hpp"

#include <cmath>
#include <string>

namespace aou {

std::vector<std::string> validate_spec(const ValidatorSpec& spec, int m) {
    std::vector<std::string> out;
    if (spec.kind == ValidatorKind::Perfect) return out;
    if (static_cast<int>(spec.alpha.size()) != m) out.push_back("alpha: length must equal premise count");
    if (static_cast<int>(spec.beta.size()) != m) out.push_back("beta: length must equal premise count");
    for (double a : spec.alpha)
        if (!(a >= 0.0 && a <= 1.0)) {
            out.push_back("alpha: entry outside [0,1]");
            break;
        }
    for (double b : spec.beta)
        if (!(b >= 0.0 && b <= 1.0)) {
            out.push_back("beta: entry outside [0,1]");
            break;
        }
    return out;
}

ValidationOutcome ValidationOutcome::from_verdicts(std::vector<int> v) {
    ValidationOutcome o;
    o.verdicts = std::move(v);
    for (int i = 0; i < static_cast<int>(o.verdicts.size()); ++i) {
        if (o.verdicts[i] != 0) {
            o.validated.insert(i);
        } else {
            o.rejected.insert(i);
        }
    }
    return o;
}

ValidationOutcome audit_perfect(const WorldModel& world, const Assignment& g_star,
                                CostLedger* ledger) {
    std::vector<int> v = support_status(world, g_star);
    if (ledger != nullptr) ledger->validator_calls += world.premise_count();
    return ValidationOutcome::from_verdicts(std::move(v));
}

ValidationOutcome audit_probabilistic(const ValidatorSpec& spec, const std::vector<int>& support,
                                      const CounterRng& rng, CostLedger* ledger) {
    const int m = static_cast<int>(support.size());
    if (spec.kind == ValidatorKind::Rates &&
        (static_cast<int>(spec.alpha.size()) != m || static_cast<int>(spec.beta.size()) != m))
        throw InvalidArgumentError("validator rate vectors do not match premise count");
    std::vector<int> v(m, 0);
    for (int i = 0; i < m; ++i) {
        double u = rng.uniform(static_cast<std::uint64_t>(i));
        if (support[i] != 0) {
            v[i] = u < spec.alpha_at(i) ? 0 : 1;
        } else {
            v[i] = u < spec.beta_at(i) ? 1 : 0;
        }
    }
    if (ledger != nullptr) ledger->validator_calls += m;
    return ValidationOutcome::from_verdicts(std::move(v));
}

double outcome_probability(const ValidatorSpec& spec, const std::vector<int>& support,
                           const std::vector<int>& verdicts) {
    double p = 1.0;
    for (int i = 0; i < static_cast<int>(support.size()); ++i) {
        double accept = support[i] != 0 ? 1.0 - spec.alpha_at(i) : spec.beta_at(i);
        p *= verdicts[i] != 0 ? accept : 1.0 - accept;
    }
    return p;
}

std::vector<std::pair<ValidationOutcome, double>> outcome_distribution(
    const ValidatorSpec& spec, const std::vector<int>& support, int premise_cap) {
    const int m = static_cast<int>(support.size());
    if (m > premise_cap)
        throw EnumerationTooLargeError("outcome enumeration over " + std::to_string(m) +
                                       " premises exceeds cap " + std::to_string(premise_cap));
    if (spec.kind == ValidatorKind::Rates &&
        (static_cast<int>(spec.alpha.size()) != m || static_cast<int>(spec.beta.size()) != m))
        throw InvalidArgumentError("validator rate vectors do not match premise count");

    std::vector<std::pair<ValidationOutcome, double>> out;
    const std::uint64_t n = 1ULL << m;
    out.reserve(n);
    for (std::uint64_t mask = 0; mask < n; ++mask) {
        std::vector<int> v(m);
        for (int i = 0; i < m; ++i) v[i] = (mask >> i) & 1U ? 1 : 0;
        double p = outcome_probability(spec, support, v);
        out.emplace_back(ValidationOutcome::from_verdicts(std::move(v)), p);
    }
    return out;
}

}  // namespace aou
