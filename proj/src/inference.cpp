#include "aou/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "aou/util.hpp"

namespace aou {

void validate_evidence(const WorldModel& world, const Evidence& evidence) {
    for (int i : evidence.validated) {
        if (i < 0 || i >= world.premise_count())
            throw InvalidArgumentError("evidence references unknown premise index " +
                                       std::to_string(i));
    }
    if (evidence.mode == EvidenceMode::Value) {
        if (static_cast<int>(evidence.observed.size()) != world.premise_count())
            throw InvalidArgumentError("value-mode evidence must span all premise slots");
        for (int i = 0; i < world.premise_count(); ++i) {
            const bool in_set = evidence.validated.count(i) != 0;
            if (in_set != evidence.observed[i].has_value())
                throw InvalidArgumentError(
                    "value-mode evidence must be defined exactly on the validated set");
            if (in_set && (*evidence.observed[i] < 0 ||
                           *evidence.observed[i] >= world.premises[i].domain_size))
                throw InvalidArgumentError("observed value outside premise domain");
        }
    } else if (!evidence.observed.empty()) {
        bool any = false;
        for (const auto& v : evidence.observed) any = any || v.has_value();
        if (any) throw InvalidArgumentError("event-mode evidence carries no values");
    }
}

bool consistent_with(const WorldModel& world, const Evidence& evidence, const Assignment& g) {
    for (int i : evidence.validated) {
        if (evidence.mode == EvidenceMode::Value) {
            if (g[i] != *evidence.observed[i]) return false;
        } else {
            if (world.premises[i].supported_states.count(g[i]) == 0) return false;
        }
    }
    return true;
}

PosteriorReport constrained_posterior(const WorldModel& world, const Evidence& evidence,
                                      long long cap) {
    validate_evidence(world, evidence);
    const long long joint = checked_joint_size(world, cap);
    const int n_labels = world.n_labels;

    PosteriorReport report;
    report.probs.assign(n_labels, 0.0);
    std::vector<KahanSum> acc(n_labels);
    KahanSum mass;
    for (long long r = 0; r < joint; ++r) {
        Assignment g = unrank(world, r);
        if (!consistent_with(world, evidence, g)) continue;
        const double pg = prior_prob(world, g);
        mass.add(pg);
        for (int y = 0; y < n_labels; ++y) {
            acc[y].add(pg * label_prob(world, g, y));
            report.ledger.score_evals += 1;
        }
    }
    report.evidence_mass = mass.value();
    if (!(report.evidence_mass > 0.0))
        throw ImpossibleEvidenceError("conditioning event has zero prior mass");
    for (int y = 0; y < n_labels; ++y) report.probs[y] = acc[y].value() / report.evidence_mass;
    report.ledger.stat_updates += static_cast<long long>(evidence.validated.size());
    return report;
}

PosteriorReport standard_posterior(const WorldModel& world, long long cap) {
    return constrained_posterior(world, Evidence::none(), cap);
}

std::pair<int, double> bayes_action(const PosteriorReport& posterior,
                                    const std::vector<std::vector<double>>& loss) {
    if (loss.empty()) throw InvalidArgumentError("empty action set");
    int best = 0;
    double best_loss = 0.0;
    for (std::size_t a = 0; a < loss.size(); ++a) {
        double e = 0.0;
        for (std::size_t y = 0; y < posterior.probs.size(); ++y)
            e += loss[a][y] * posterior.probs[y];
        if (a == 0 || e < best_loss) {
            best = static_cast<int>(a);
            best_loss = e;
        }
    }
    return {best, best_loss};
}

namespace {

// Worst-case completion: per action, the maximal conditional expected loss
// over the evidence-consistent assignments with positive prior mass. The
// reported posterior is the conditional row at the chosen action's worst
// completion, so expected_loss keeps its Bayes form.
DecisionReport adversarial_decide(const WorldModel& world, const Evidence& evidence,
                                  const DecideOptions& options, long long cap) {
    const double lambda = options.lambda.value_or(world.abstain_cost);
    const long long joint = checked_joint_size(world, cap);
    const int n_labels = world.n_labels;
    const int n_actions = world.action_count();
    const auto loss = world.loss.empty() ? zero_one_loss(n_labels) : world.loss;

    DecisionReport report;
    std::vector<double> worst(n_actions, -1.0);
    std::vector<long long> worst_rank(n_actions, -1);
    KahanSum mass;
    for (long long r = 0; r < joint; ++r) {
        Assignment g = unrank(world, r);
        if (!consistent_with(world, evidence, g)) continue;
        const double pg = prior_prob(world, g);
        mass.add(pg);
        if (!(pg > 0.0)) continue;  // unreachable completions do not count
        for (int a = 0; a < n_actions; ++a) {
            double e = 0.0;
            for (int y = 0; y < n_labels; ++y) e += loss[a][y] * label_prob(world, g, y);
            if (e > worst[a]) {
                worst[a] = e;
                worst_rank[a] = r;
            }
        }
        report.posterior.ledger.score_evals += n_labels;
    }
    report.posterior.evidence_mass = mass.value();
    if (!(report.posterior.evidence_mass > 0.0))
        throw ImpossibleEvidenceError("conditioning event has zero prior mass");
    report.posterior.ledger.stat_updates +=
        static_cast<long long>(evidence.validated.size());

    int best = 0;
    for (int a = 1; a < n_actions; ++a)
        if (worst[a] < worst[best]) best = a;

    report.posterior.probs.assign(n_labels, 0.0);
    const Assignment g_worst = unrank(world, worst_rank[best]);
    for (int y = 0; y < n_labels; ++y)
        report.posterior.probs[y] = label_prob(world, g_worst, y);

    if (options.use_abstention && worst[best] >= lambda) {
        report.action = kAbstain;
        report.abstained = true;
        report.reason = AbstainReason::ChowRule;
        report.expected_loss = lambda;
    } else {
        report.action = best;
        report.expected_loss = worst[best];
    }
    return report;
}

}  // namespace

DecisionReport aou_decide(const WorldModel& world, const ValidationOutcome& outcome,
                          EvidenceMode mode, const DecideOptions& options,
                          const std::optional<Assignment>& g_star, long long cap) {
    const double lambda = options.lambda.value_or(world.abstain_cost);
    Evidence evidence;
    if (mode == EvidenceMode::Value) {
        if (!g_star.has_value())
            throw InvalidArgumentError("value-mode decision requires realized premise values");
        evidence = Evidence::value(outcome.validated, *g_star);
    } else {
        evidence = Evidence::event(outcome.validated);
    }

    DecisionReport report;
    try {
        if (options.completion == CompletionFamily::Adversarial)
            return adversarial_decide(world, evidence, options, cap);
        report.posterior = constrained_posterior(world, evidence, cap);
    } catch (const ImpossibleEvidenceError&) {
        report.action = kAbstain;
        report.abstained = true;
        report.reason = AbstainReason::ImpossibleEvidence;
        report.expected_loss = lambda;
        report.posterior.probs.assign(world.n_labels, 1.0 / world.n_labels);
        report.posterior.evidence_mass = 0.0;
        return report;
    }

    const auto loss =
        world.loss.empty() ? zero_one_loss(world.n_labels) : world.loss;
    auto [action, expected] = bayes_action(report.posterior, loss);
    if (options.use_abstention && expected >= lambda) {
        report.action = kAbstain;
        report.abstained = true;
        report.reason = AbstainReason::ChowRule;
        report.expected_loss = lambda;
    } else {
        report.action = action;
        report.expected_loss = expected;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Variable elimination

namespace {

struct WorkFactor {
    std::vector<int> scope;     // ascending variable indices; label last
    std::vector<int> domains;   // per scope entry
    std::vector<double> table;  // last scope entry fastest
};

long long table_size(const std::vector<int>& domains) {
    long long s = 1;
    for (int d : domains) s *= d;
    return s;
}

WorkFactor to_work_factor(const WorldModel& world, const Factor& f) {
    WorkFactor w;
    std::vector<std::size_t> order(f.scope.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&f](std::size_t a, std::size_t b) { return f.scope[a] < f.scope[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (f.scope[order[k]] == f.scope[order[k - 1]])
            throw InvalidArgumentError("factor scope lists a variable twice");
    }

    auto dom_of = [&world](int var) {
        return var == world.label_index() ? world.n_labels : world.premises[var].domain_size;
    };
    for (std::size_t k : order) {
        w.scope.push_back(f.scope[k]);
        w.domains.push_back(dom_of(f.scope[k]));
    }
    // Re-lay the table in sorted-scope order.
    const long long size = table_size(w.domains);
    if (static_cast<long long>(f.table.size()) != size)
        throw InvalidArgumentError("factor table size does not match scope");
    w.table.assign(static_cast<std::size_t>(size), 0.0);
    std::vector<int> idx(w.scope.size(), 0);
    for (long long flat = 0; flat < size; ++flat) {
        // idx is the sorted-scope index vector for `flat`.
        long long rem = flat;
        for (int k = static_cast<int>(w.scope.size()) - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % w.domains[k]);
            rem /= w.domains[k];
        }
        long long src = 0;
        for (std::size_t k = 0; k < f.scope.size(); ++k) {
            int var = f.scope[k];
            int pos = static_cast<int>(std::lower_bound(w.scope.begin(), w.scope.end(), var) -
                                       w.scope.begin());
            src = src * dom_of(var) + idx[pos];
        }
        w.table[static_cast<std::size_t>(flat)] = f.table[static_cast<std::size_t>(src)];
    }
    return w;
}

// Restrict a factor at variable var = value, dropping var from the scope.
WorkFactor slice(const WorkFactor& f, int var, int value) {
    int pos = static_cast<int>(std::lower_bound(f.scope.begin(), f.scope.end(), var) -
                               f.scope.begin());
    WorkFactor out;
    for (std::size_t k = 0; k < f.scope.size(); ++k) {
        if (static_cast<int>(k) == pos) continue;
        out.scope.push_back(f.scope[k]);
        out.domains.push_back(f.domains[k]);
    }
    const long long out_size = table_size(out.domains);
    out.table.assign(static_cast<std::size_t>(out_size), 0.0);
    std::vector<int> idx(out.scope.size(), 0);
    for (long long flat = 0; flat < out_size; ++flat) {
        long long rem = flat;
        for (int k = static_cast<int>(out.scope.size()) - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % out.domains[k]);
            rem /= out.domains[k];
        }
        long long src = 0;
        int out_k = 0;
        for (std::size_t k = 0; k < f.scope.size(); ++k) {
            int v = static_cast<int>(k) == pos ? value : idx[out_k++];
            src = src * f.domains[k] + v;
        }
        out.table[static_cast<std::size_t>(flat)] = f.table[static_cast<std::size_t>(src)];
    }
    return out;
}

// Zero out rows where var takes a state outside `keep` (event restriction).
void restrict_to_states(WorkFactor& f, int var, const std::set<int>& keep) {
    int pos = static_cast<int>(std::lower_bound(f.scope.begin(), f.scope.end(), var) -
                               f.scope.begin());
    const long long size = table_size(f.domains);
    long long stride = 1;
    for (std::size_t k = pos + 1; k < f.domains.size(); ++k) stride *= f.domains[k];
    for (long long flat = 0; flat < size; ++flat) {
        int state = static_cast<int>((flat / stride) % f.domains[pos]);
        if (keep.count(state) == 0) f.table[static_cast<std::size_t>(flat)] = 0.0;
    }
}

// Multiply factors over their union scope and sum out `var`.
// op_count += size of the union-scope product table.
WorkFactor eliminate_var(std::vector<WorkFactor> factors, int var, long long& op_count) {
    std::vector<int> scope;
    std::vector<int> domains;
    for (const auto& f : factors) {
        for (std::size_t k = 0; k < f.scope.size(); ++k) {
            auto it = std::lower_bound(scope.begin(), scope.end(), f.scope[k]);
            if (it == scope.end() || *it != f.scope[k]) {
                std::size_t at = static_cast<std::size_t>(it - scope.begin());
                scope.insert(it, f.scope[k]);
                domains.insert(domains.begin() + at, f.domains[k]);
            }
        }
    }
    const long long size = table_size(domains);
    op_count += size;

    int vpos = static_cast<int>(std::lower_bound(scope.begin(), scope.end(), var) - scope.begin());
    WorkFactor out;
    for (std::size_t k = 0; k < scope.size(); ++k) {
        if (static_cast<int>(k) == vpos) continue;
        out.scope.push_back(scope[k]);
        out.domains.push_back(domains[k]);
    }
    out.table.assign(static_cast<std::size_t>(table_size(out.domains)), 0.0);

    std::vector<int> idx(scope.size(), 0);
    // Precompute, per factor, the positions of its scope vars in the union.
    std::vector<std::vector<int>> positions(factors.size());
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        for (int v : factors[fi].scope) {
            positions[fi].push_back(static_cast<int>(
                std::lower_bound(scope.begin(), scope.end(), v) - scope.begin()));
        }
    }
    for (long long flat = 0; flat < size; ++flat) {
        long long rem = flat;
        for (int k = static_cast<int>(scope.size()) - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % domains[k]);
            rem /= domains[k];
        }
        double prod = 1.0;
        for (std::size_t fi = 0; fi < factors.size(); ++fi) {
            long long src = 0;
            for (std::size_t k = 0; k < positions[fi].size(); ++k)
                src = src * factors[fi].domains[k] + idx[positions[fi][k]];
            prod *= factors[fi].table[static_cast<std::size_t>(src)];
        }
        long long dst = 0;
        for (std::size_t k = 0; k < scope.size(); ++k) {
            if (static_cast<int>(k) == vpos) continue;
            dst = dst * domains[k] + idx[k];
        }
        out.table[static_cast<std::size_t>(dst)] += prod;
    }
    return out;
}

std::vector<Factor> prior_factors(const WorldModel& world) {
    if (const auto* fl = std::get_if<FactorListPrior>(&world.prior)) return fl->factors;
    if (const auto* prod = std::get_if<ProductPrior>(&world.prior)) {
        std::vector<Factor> out;
        for (int i = 0; i < world.premise_count(); ++i)
            out.push_back(Factor{{i}, prod->factors[i]});
        return out;
    }
    // Full table: one factor over all premises.
    const auto& full = std::get<FullTablePrior>(world.prior);
    Factor f;
    for (int i = 0; i < world.premise_count(); ++i) f.scope.push_back(i);
    f.table = full.probs;
    return {f};
}

Factor label_factor(const WorldModel& world) {
    if (const auto* fac = std::get_if<FactoredLabel>(&world.label_model)) {
        Factor f;
        f.scope = fac->scope;
        f.scope.push_back(world.label_index());
        f.table = fac->table;
        return f;
    }
    const auto& full = std::get<FullLabelTable>(world.label_model);
    Factor f;
    for (int i = 0; i < world.premise_count(); ++i) f.scope.push_back(i);
    f.scope.push_back(world.label_index());
    for (const auto& row : full.rows)
        for (double v : row) f.table.push_back(v);
    return f;
}

}  // namespace

PosteriorReport posterior_via_elimination(const WorldModel& world, const EliminationOrder& order,
                                          const Evidence& evidence) {
    validate_evidence(world, evidence);
    const int m = world.premise_count();

    std::set<int> rejected;
    for (int i = 0; i < m; ++i)
        if (evidence.validated.count(i) == 0) rejected.insert(i);
    if (order.size() != rejected.size())
        throw InvalidArgumentError("elimination order must be a permutation of the rejected set");
    {
        std::set<int> seen;
        for (int v : order) {
            if (rejected.count(v) == 0 || !seen.insert(v).second)
                throw InvalidArgumentError(
                    "elimination order must be a permutation of the rejected set");
        }
    }

    std::vector<Factor> raw = prior_factors(world);
    raw.push_back(label_factor(world));
    std::vector<bool> covered(m, false);
    for (const auto& f : raw) {
        for (int var : f.scope) {
            if (var == world.label_index()) continue;
            if (var < 0 || var >= m)
                throw InvalidArgumentError("factor scope references unknown variable " +
                                           std::to_string(var));
            covered[var] = true;
        }
    }
    for (int i = 0; i < m; ++i)
        if (!covered[i])
            throw InvalidArgumentError("factors do not cover premise " + std::to_string(i + 1));

    std::vector<WorkFactor> work;
    work.reserve(raw.size());
    for (const auto& f : raw) work.push_back(to_work_factor(world, f));

    double scalar = 1.0;
    long long op_count = 0;

    // Apply evidence.
    std::vector<int> sequence(order);
    for (int i : evidence.validated) {
        if (evidence.mode == EvidenceMode::Value) {
            const int value = *evidence.observed[i];
            for (auto& f : work) {
                if (std::binary_search(f.scope.begin(), f.scope.end(), i))
                    f = slice(f, i, value);
            }
        } else {
            for (auto& f : work) {
                if (std::binary_search(f.scope.begin(), f.scope.end(), i))
                    restrict_to_states(f, i, world.premises[i].supported_states);
            }
            sequence.push_back(i);  // event-restricted variables still get summed out
        }
    }

    auto fold_scalars = [&]() {
        std::vector<WorkFactor> kept;
        for (auto& f : work) {
            if (f.scope.empty()) {
                scalar *= f.table.empty() ? 1.0 : f.table[0];
            } else {
                kept.push_back(std::move(f));
            }
        }
        work = std::move(kept);
    };
    fold_scalars();

    for (int var : sequence) {
        std::vector<WorkFactor> involved;
        std::vector<WorkFactor> rest;
        for (auto& f : work) {
            if (std::binary_search(f.scope.begin(), f.scope.end(), var)) {
                involved.push_back(std::move(f));
            } else {
                rest.push_back(std::move(f));
            }
        }
        if (involved.empty()) {
            // Variable already absent (sliced away); summing a free variable
            // multiplies by its domain size only for event-kept vars, which
            // always appear in some factor, so this cannot happen for them.
            work = std::move(rest);
            continue;
        }
        WorkFactor merged = eliminate_var(std::move(involved), var, op_count);
        rest.push_back(std::move(merged));
        work = std::move(rest);
        fold_scalars();
    }

    // All premise variables are gone; combine whatever remains over {label}.
    WorkFactor result;
    if (work.empty()) {
        result.scope = {world.label_index()};
        result.domains = {world.n_labels};
        result.table.assign(world.n_labels, 1.0);
    } else if (work.size() == 1) {
        result = std::move(work[0]);
    } else {
        // Product of the remaining label factors; counted like a step table.
        result = work[0];
        for (std::size_t k = 1; k < work.size(); ++k) {
            op_count += world.n_labels;
            for (int y = 0; y < world.n_labels; ++y)
                result.table[y] *= work[k].table[y];
        }
    }

    PosteriorReport report;
    report.probs.assign(world.n_labels, 0.0);
    KahanSum mass;
    for (int y = 0; y < world.n_labels; ++y) mass.add(scalar * result.table[y]);
    report.evidence_mass = mass.value();
    if (!(report.evidence_mass > 0.0))
        throw ImpossibleEvidenceError("conditioning event has zero prior mass");
    for (int y = 0; y < world.n_labels; ++y)
        report.probs[y] = scalar * result.table[y] / report.evidence_mass;
    report.ledger.score_evals = op_count;
    report.ledger.stat_updates = static_cast<long long>(evidence.validated.size());
    return report;
}

}  // namespace aou
