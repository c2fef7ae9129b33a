#include "aou/risk.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "aou/rng.hpp"
#include "aou/util.hpp"

namespace aou {

std::pair<double, double> decompose_risk(const std::vector<TrialRecord>& records) {
    KahanSum assumption;
    KahanSum inference;
    for (const auto& r : records) {
        (r.hallucination ? assumption : inference).add(r.weight * r.loss);
    }
    return {assumption.value(), inference.value()};
}

namespace {

// Guard on the exact double loop over assignments x verdict vectors.
constexpr long long kExactBudget = 1LL << 26;

struct KernelEntry {
    std::optional<int> const_action;            // AoUEvent / Standard
    std::shared_ptr<const detail::ValueDecisionTable> table;  // AoUValue / Credulous
    std::uint32_t trace_mask = 0;
    bool traced = false;
    bool hallucination = false;

    int action(const std::vector<int>& digits) const {
        if (const_action) return *const_action;
        long long key = 0;
        for (std::size_t k = 0; k < table->validated.size(); ++k)
            key += static_cast<long long>(digits[table->validated[k]]) * table->strides[k];
        return table->decisions[static_cast<std::size_t>(key)];
    }
};

// Per-world exact-enumeration context shared by the risk and rate paths.
struct LabCore {
    const WorldModel& world;
    PredictorSpec spec;
    long long cap;
    int m;
    long long joint;
    int n_labels;
    int n_actions;
    double lambda;
    std::vector<std::vector<double>> loss;
    std::uint32_t full_mask;

    std::vector<double> prior;       // [r]
    std::vector<double> labelp;      // [r * n_labels + y]
    std::vector<double> act_loss;    // [r * n_actions + a]
    std::vector<std::uint32_t> smask;  // [r] supported-premise bitmask

    std::map<std::uint32_t, KernelEntry> kernels;
    std::optional<std::vector<double>> deltas;

    LabCore(const WorldModel& w, PredictorSpec s, long long cap_in)
        : world(w), spec(s), cap(cap_in), m(w.premise_count()) {
        joint = checked_joint_size(world, cap);
        n_labels = world.n_labels;
        n_actions = world.action_count();
        lambda = spec.lambda.value_or(world.abstain_cost);
        loss = world.loss.empty() ? zero_one_loss(n_labels) : world.loss;
        full_mask = m >= 32 ? ~0U : (1U << m) - 1U;

        prior.resize(static_cast<std::size_t>(joint));
        labelp.resize(static_cast<std::size_t>(joint * n_labels));
        act_loss.resize(static_cast<std::size_t>(joint * n_actions));
        smask.resize(static_cast<std::size_t>(joint));
        std::vector<int> digits(m, 0);
        Assignment g(m, 0);
        for (long long r = 0; r < joint; ++r) {
            g.assign(digits.begin(), digits.end());
            prior[static_cast<std::size_t>(r)] = prior_prob(world, g);
            std::uint32_t sm = 0;
            for (int i = 0; i < m; ++i)
                if (world.premises[i].supported_states.count(g[i]) != 0) sm |= 1U << i;
            smask[static_cast<std::size_t>(r)] = sm;
            for (int y = 0; y < n_labels; ++y)
                labelp[static_cast<std::size_t>(r * n_labels + y)] = label_prob(world, g, y);
            for (int a = 0; a < n_actions; ++a) {
                double e = 0.0;
                for (int y = 0; y < n_labels; ++y)
                    e += loss[a][y] * labelp[static_cast<std::size_t>(r * n_labels + y)];
                act_loss[static_cast<std::size_t>(r * n_actions + a)] = e;
            }
            for (int i = m - 1; i >= 0; --i) {
                if (++digits[i] < world.premises[i].domain_size) break;
                digits[i] = 0;
            }
        }
    }

    DecideOptions decide_options() const {
        DecideOptions o;
        o.use_abstention = spec.use_abstention;
        o.lambda = lambda;
        return o;
    }

    static std::set<int> mask_to_set(std::uint32_t mask, int m) {
        std::set<int> s;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1U) s.insert(i);
        return s;
    }

    ValidationOutcome outcome_of(std::uint32_t vmask) const {
        std::vector<int> v(m);
        for (int i = 0; i < m; ++i) v[i] = vmask >> i & 1U ? 1 : 0;
        return ValidationOutcome::from_verdicts(std::move(v));
    }

    // Traces require the subset cap; beyond it table kernels stay untraced.
    void attach_trace(KernelEntry& e, std::uint32_t vmask) {
        if (e.const_action) {
            e.trace_mask = 0;  // constant kernel: unique minimal support set is empty
            e.traced = true;
        } else if (m <= kMaxTracePremises) {
            std::vector<int> actions(static_cast<std::size_t>(joint));
            std::vector<int> digits(m, 0);
            for (long long r = 0; r < joint; ++r) {
                actions[static_cast<std::size_t>(r)] = e.action(digits);
                for (int i = m - 1; i >= 0; --i) {
                    if (++digits[i] < world.premises[i].domain_size) break;
                    digits[i] = 0;
                }
            }
            TraceReport t = detail::trace_from_actions(actions, world);
            std::uint32_t tm = 0;
            for (int i : t.trace) tm |= 1U << i;
            e.trace_mask = tm;
            e.traced = true;
        }
        e.hallucination = e.traced && (e.trace_mask & (full_mask & ~vmask)) != 0;
    }

    const KernelEntry& kernel(std::uint32_t vmask) {
        auto it = kernels.find(vmask);
        if (it != kernels.end()) return it->second;

        KernelEntry e;
        switch (spec.kind) {
            case KernelKind::AoUEvent:
                e.const_action = aou_decide(world, outcome_of(vmask), EvidenceMode::Event,
                                            decide_options(), std::nullopt, cap)
                                     .action;
                break;
            case KernelKind::Standard:
                e.const_action = aou_decide(world, outcome_of(0), EvidenceMode::Event,
                                            decide_options(), std::nullopt, cap)
                                     .action;
                break;
            case KernelKind::AoUValue: {
                e.table = std::make_shared<detail::ValueDecisionTable>(detail::value_decision_table(
                    world, mask_to_set(vmask, m), decide_options(), cap));
                break;
            }
            case KernelKind::Credulous: {
                // Conditions on all realized values regardless of the outcome.
                auto existing = std::find_if(kernels.begin(), kernels.end(),
                                             [](const auto& kv) { return kv.second.table != nullptr; });
                if (existing != kernels.end()) {
                    e.table = existing->second.table;
                    e.trace_mask = existing->second.trace_mask;
                    e.traced = existing->second.traced;
                    e.hallucination = e.traced && (e.trace_mask & (full_mask & ~vmask)) != 0;
                    return kernels.emplace(vmask, std::move(e)).first->second;
                }
                e.table = std::make_shared<detail::ValueDecisionTable>(detail::value_decision_table(
                    world, mask_to_set(full_mask, m), decide_options(), cap));
                break;
            }
            case KernelKind::Custom:
                throw InvalidArgumentError("custom kernels are not supported by the risk lab");
        }
        attach_trace(e, vmask);
        return kernels.emplace(vmask, std::move(e)).first->second;
    }

    double verdict_probability(std::uint32_t s, std::uint32_t vmask,
                               const ValidatorSpec& vspec) const {
        double p = 1.0;
        for (int i = 0; i < m; ++i) {
            const double accept = (s >> i & 1U) != 0 ? 1.0 - vspec.alpha_at(i) : vspec.beta_at(i);
            p *= (vmask >> i & 1U) != 0 ? accept : 1.0 - accept;
        }
        return p;
    }

    void check_spec(const ValidatorSpec& vspec) const {
        auto errs = validate_spec(vspec, m);
        if (!errs.empty()) throw InvalidArgumentError("validator spec invalid: " + errs.front());
    }
};

double loss_of(const LabCore& core, long long r, int action) {
    return action == kAbstain
               ? core.lambda
               : core.act_loss[static_cast<std::size_t>(r * core.n_actions + action)];
}

RiskReport core_risk(LabCore& core, const ValidatorSpec& vspec) {
    core.check_spec(vspec);
    const std::uint32_t n_outcomes = core.m >= 31 ? 0 : 1U << core.m;
    KahanSum total;
    KahanSum assumption;
    KahanSum inference;
    KahanSum abstain;
    bool decomposed = true;

    std::vector<int> digits(core.m, 0);
    for (std::uint32_t vmask = 0; vmask < n_outcomes; ++vmask) {
        const KernelEntry& kd = core.kernel(vmask);
        decomposed = decomposed && kd.traced;
        std::fill(digits.begin(), digits.end(), 0);
        for (long long r = 0; r < core.joint; ++r) {
            const double pv =
                core.verdict_probability(core.smask[static_cast<std::size_t>(r)], vmask, vspec);
            if (pv != 0.0) {
                const double w = core.prior[static_cast<std::size_t>(r)] * pv;
                if (w != 0.0) {
                    const int a = kd.action(digits);
                    const double l = loss_of(core, r, a);
                    total.add(w * l);
                    if (kd.hallucination) {
                        assumption.add(w * l);
                    } else {
                        inference.add(w * l);
                    }
                    if (a == kAbstain) abstain.add(w);
                }
            }
            for (int i = core.m - 1; i >= 0; --i) {
                if (++digits[i] < core.world.premises[i].domain_size) break;
                digits[i] = 0;
            }
        }
    }

    RiskReport out;
    out.total_risk = total.value();
    out.assumption_term = assumption.value();
    out.inference_term = inference.value();
    out.abstention_rate = abstain.value();
    out.exact = true;
    out.decomposed = decomposed;
    return out;
}

// Max over reachable contexts of the Bayes-loss increase from dropping one
// validated premise; independent of the validator rates, so cached per lab.
const std::vector<double>& core_deltas(LabCore& core) {
    if (core.deltas) return *core.deltas;
    std::vector<double> delta(core.m, 0.0);
    const std::uint32_t n_outcomes = 1U << core.m;

    const bool value_kind =
        core.spec.kind == KernelKind::AoUValue || core.spec.kind == KernelKind::Credulous;

    for (std::uint32_t vmask = 1; vmask < n_outcomes; ++vmask) {
        const KernelEntry& kd_with = core.kernel(vmask);
        if (value_kind) {
            // Bucket the joint table by the validated-variable values.
            std::vector<int> validated;
            for (int i = 0; i < core.m; ++i)
                if (vmask >> i & 1U) validated.push_back(i);
            long long key_space = 1;
            for (int i : validated) key_space *= core.world.premises[i].domain_size;
            std::vector<double> mass(static_cast<std::size_t>(key_space), 0.0);
            std::vector<double> post(static_cast<std::size_t>(key_space * core.n_labels), 0.0);
            std::vector<long long> rep(static_cast<std::size_t>(key_space), -1);

            std::vector<long long> strides(validated.size(), 1);
            for (int k = static_cast<int>(validated.size()) - 2; k >= 0; --k)
                strides[k] = strides[k + 1] * core.world.premises[validated[k + 1]].domain_size;

            std::vector<int> digits(core.m, 0);
            for (long long r = 0; r < core.joint; ++r) {
                long long key = 0;
                for (std::size_t k = 0; k < validated.size(); ++k)
                    key += digits[validated[k]] * strides[k];
                const double pg = core.prior[static_cast<std::size_t>(r)];
                mass[static_cast<std::size_t>(key)] += pg;
                for (int y = 0; y < core.n_labels; ++y)
                    post[static_cast<std::size_t>(key * core.n_labels + y)] +=
                        pg * core.labelp[static_cast<std::size_t>(r * core.n_labels + y)];
                if (rep[static_cast<std::size_t>(key)] < 0) rep[static_cast<std::size_t>(key)] = r;
                for (int i = core.m - 1; i >= 0; --i) {
                    if (++digits[i] < core.world.premises[i].domain_size) break;
                    digits[i] = 0;
                }
            }

            auto posterior_loss = [&](long long key, int action) {
                if (action == kAbstain) return core.lambda;
                double e = 0.0;
                const double z = mass[static_cast<std::size_t>(key)];
                for (int y = 0; y < core.n_labels; ++y)
                    e += core.loss[action][y] *
                         post[static_cast<std::size_t>(key * core.n_labels + y)] / z;
                return e;
            };

            for (int i = 0; i < core.m; ++i) {
                if ((vmask >> i & 1U) == 0) continue;
                const KernelEntry& kd_wo = core.kernel(vmask & ~(1U << i));
                for (long long key = 0; key < key_space; ++key) {
                    if (!(mass[static_cast<std::size_t>(key)] > 0.0)) continue;
                    const Assignment g = unrank(core.world, rep[static_cast<std::size_t>(key)]);
                    const int a_with = kd_with.action(g);
                    const int a_wo = kd_wo.action(g);
                    if (a_with == a_wo) continue;
                    const double cand = posterior_loss(key, a_wo) - posterior_loss(key, a_with);
                    if (cand > delta[i]) delta[i] = cand;
                }
            }
        } else {
            // Event-style kinds: the context is the outcome itself.
            PosteriorReport post;
            try {
                post = constrained_posterior(
                    core.world, Evidence::event(LabCore::mask_to_set(vmask, core.m)), core.cap);
            } catch (const ImpossibleEvidenceError&) {
                continue;  // unreachable context
            }
            auto posterior_loss = [&](int action) {
                if (action == kAbstain) return core.lambda;
                double e = 0.0;
                for (int y = 0; y < core.n_labels; ++y)
                    e += core.loss[action][y] * post.probs[y];
                return e;
            };
            std::vector<int> dummy(core.m, 0);
            const int a_with = kd_with.action(dummy);
            for (int i = 0; i < core.m; ++i) {
                if ((vmask >> i & 1U) == 0) continue;
                const KernelEntry& kd_wo = core.kernel(vmask & ~(1U << i));
                const int a_wo = kd_wo.action(dummy);
                if (a_with == a_wo) continue;
                const double cand = posterior_loss(a_wo) - posterior_loss(a_with);
                if (cand > delta[i]) delta[i] = cand;
            }
        }
    }
    for (double& d : delta) d = std::clamp(d, 0.0, 1.0);
    core.deltas = std::move(delta);
    return *core.deltas;
}

RateEstimates core_rates(LabCore& core, const ValidatorSpec& vspec) {
    core.check_spec(vspec);
    if (core.m > kMaxTracePremises)
        throw EnumerationTooLargeError("rate estimation requires traces, capped at " +
                                       std::to_string(kMaxTracePremises) + " premises");
    const int m = core.m;
    RateEstimates re;
    re.p_use.assign(m, 0.0);
    re.p_use_given_unsup.assign(m, 0.0);
    re.p_unsupported.assign(m, 0.0);

    std::vector<KahanSum> p_unsup(m);
    std::vector<KahanSum> p_use(m);
    KahanSum e_k;
    for (long long r = 0; r < core.joint; ++r) {
        const double pg = core.prior[static_cast<std::size_t>(r)];
        const std::uint32_t s = core.smask[static_cast<std::size_t>(r)];
        const KernelEntry& kd = core.kernel(s);  // perfect validation outcome
        for (int i = 0; i < m; ++i) {
            if ((s >> i & 1U) == 0) p_unsup[i].add(pg);
            if ((kd.trace_mask >> i & 1U) != 0) p_use[i].add(pg);
        }
        e_k.add(pg * __builtin_popcount(kd.trace_mask));
    }
    for (int i = 0; i < m; ++i) {
        re.p_unsupported[i] = p_unsup[i].value();
        re.p_use[i] = p_use[i].value();
    }
    re.e_k_trace = e_k.value();

    // Joint pass over (g*, v) for the validator-dependent quantities.
    std::vector<KahanSum> num(m);
    std::vector<KahanSum> den(m);
    KahanSum kfp;
    const std::uint32_t n_outcomes = 1U << m;
    for (std::uint32_t vmask = 0; vmask < n_outcomes; ++vmask) {
        const KernelEntry& kd = core.kernel(vmask);
        for (long long r = 0; r < core.joint; ++r) {
            const std::uint32_t s = core.smask[static_cast<std::size_t>(r)];
            const double pv = core.verdict_probability(s, vmask, vspec);
            if (pv == 0.0) continue;
            const double w = core.prior[static_cast<std::size_t>(r)] * pv;
            const std::uint32_t fp_used = ~s & vmask & kd.trace_mask & core.full_mask;
            if (fp_used != 0) kfp.add(w);
            const std::uint32_t fp_in = ~s & vmask & core.full_mask;
            if (fp_in != 0) {
                for (int i = 0; i < m; ++i) {
                    if ((fp_in >> i & 1U) == 0) continue;
                    den[i].add(w);
                    if ((kd.trace_mask >> i & 1U) != 0) num[i].add(w);
                }
            }
        }
    }
    for (int i = 0; i < m; ++i) {
        const double d = den[i].value();
        re.p_use_given_unsup[i] = d > 0.0 ? num[i].value() / d : 0.0;
    }
    re.e_min1_kfp = kfp.value();

    re.delta = core_deltas(core);
    re.delta_max = 0.0;
    for (double d : re.delta) re.delta_max = std::max(re.delta_max, d);
    return re;
}

}  // namespace

struct ExactLab::Impl {
    LabCore core;
    Impl(const WorldModel& world, PredictorSpec spec, long long cap) : core(world, spec, cap) {
        if (core.m > 20)
            throw EnumerationTooLargeError("exact risk enumerates 2^m outcomes; m capped at 20");
        const long double budget =
            static_cast<long double>(core.joint) * std::pow(2.0L, core.m);
        if (budget > static_cast<long double>(kExactBudget))
            throw EnumerationTooLargeError(
                "assignments x outcomes exceed the exact enumeration budget");
    }
};

ExactLab::ExactLab(const WorldModel& world, PredictorSpec spec, long long cap)
    : impl_(std::make_unique<Impl>(world, spec, cap)) {}

ExactLab::~ExactLab() = default;

RiskReport ExactLab::risk(const ValidatorSpec& vspec) { return core_risk(impl_->core, vspec); }

RateEstimates ExactLab::rates(const ValidatorSpec& vspec) {
    return core_rates(impl_->core, vspec);
}

RiskReport exact_risk(const WorldModel& world, const ValidatorSpec& vspec,
                      const PredictorSpec& predictor, long long cap) {
    ExactLab lab(world, predictor, cap);
    return lab.risk(vspec);
}

RiskReport mc_risk(const WorldModel& world, const ValidatorSpec& vspec,
                   const PredictorSpec& predictor, long long n_trials, std::uint64_t master_seed,
                   long long cap) {
    if (n_trials < 1) throw InvalidArgumentError("mc_risk requires at least one trial");
    LabCore core(world, predictor, cap);
    core.check_spec(vspec);
    const int m = core.m;

    // Sampling tables. Product priors sample premise-by-premise (slot i);
    // other priors sample the joint rank by inverse CDF (slot 0).
    const auto* product = std::get_if<ProductPrior>(&world.prior);
    std::vector<std::vector<double>> premise_cum;
    std::vector<double> rank_cum;
    if (product != nullptr) {
        premise_cum.resize(m);
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (double p : product->factors[i]) premise_cum[i].push_back(acc += p);
        }
    } else {
        double acc = 0.0;
        for (long long r = 0; r < core.joint; ++r)
            rank_cum.push_back(acc += core.prior[static_cast<std::size_t>(r)]);
    }

    std::vector<TrialRecord> records;
    records.reserve(static_cast<std::size_t>(n_trials));
    std::vector<int> digits(m, 0);
    for (long long t = 0; t < n_trials; ++t) {
        CounterRng rng(master_seed, static_cast<std::uint64_t>(t));
        long long r = 0;
        if (product != nullptr) {
            for (int i = 0; i < m; ++i) {
                const double u = rng.uniform(static_cast<std::uint64_t>(i));
                const auto& cum = premise_cum[i];
                int v = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
                if (v >= static_cast<int>(cum.size())) v = static_cast<int>(cum.size()) - 1;
                digits[i] = v;
                r = r * world.premises[i].domain_size + v;
            }
        } else {
            const double u = rng.uniform(0);
            long long pos = std::lower_bound(rank_cum.begin(), rank_cum.end(), u) - rank_cum.begin();
            if (pos >= core.joint) pos = core.joint - 1;
            r = pos;
            Assignment g = unrank(world, r);
            digits.assign(g.begin(), g.end());
        }

        const std::uint32_t s = core.smask[static_cast<std::size_t>(r)];
        std::uint32_t vmask = 0;
        for (int i = 0; i < m; ++i) {
            const double u = rng.uniform(static_cast<std::uint64_t>(m + i));
            const bool supported = (s >> i & 1U) != 0;
            const bool accept = supported ? u >= vspec.alpha_at(i) : u < vspec.beta_at(i);
            if (accept) vmask |= 1U << i;
        }

        const KernelEntry& kd = core.kernel(vmask);
        const int a = kd.action(digits);
        TrialRecord rec;
        rec.weight = 1.0 / static_cast<double>(n_trials);
        rec.loss = loss_of(core, r, a);
        rec.hallucination = kd.traced && kd.hallucination;
        rec.abstained = a == kAbstain;
        records.push_back(rec);
    }

    bool traced = true;
    for (const auto& kv : core.kernels) traced = traced && kv.second.traced;

    RiskReport out;
    out.exact = false;
    out.n_trials = n_trials;
    out.decomposed = traced;
    KahanSum mean;
    KahanSum abst;
    for (const auto& rec : records) {
        mean.add(rec.weight * rec.loss);
        if (rec.abstained) abst.add(rec.weight);
    }
    out.total_risk = mean.value();
    out.abstention_rate = abst.value();
    auto [assumption, inference] = decompose_risk(records);
    out.assumption_term = assumption;
    out.inference_term = inference;
    if (n_trials > 1) {
        KahanSum var;
        for (const auto& rec : records) {
            const double d = rec.loss - out.total_risk;
            var.add(d * d);
        }
        out.mc_stderr = std::sqrt(var.value() / static_cast<double>(n_trials - 1) /
                                  static_cast<double>(n_trials));
    }
    return out;
}

RateEstimates estimate_rates(const WorldModel& world, const ValidatorSpec& vspec, KernelKind kind,
                             long long cap) {
    PredictorSpec spec;
    spec.kind = kind;
    ExactLab lab(world, spec, cap);
    return lab.rates(vspec);
}

double per_premise_excess_bound(const RateEstimates& rates, const std::vector<double>& alpha,
                      const std::vector<double>& beta) {
    const std::size_t m = rates.p_use.size();
    if (alpha.size() != m || beta.size() != m)
        throw InvalidArgumentError("rate vectors do not match premise count");
    KahanSum fp;
    KahanSum fn;
    for (std::size_t i = 0; i < m; ++i) {
        fp.add(beta[i] * rates.p_unsupported[i] * rates.p_use_given_unsup[i]);
        fn.add(rates.p_use[i] * alpha[i] * rates.delta[i]);
    }
    return fp.value() + fn.value();
}

double homogeneous_excess_bound(double alpha, double delta_max, double e_k_trace, double e_min1_kfp) {
    return e_min1_kfp + alpha * delta_max * e_k_trace;
}

namespace {

ExcessRiskReport verify_one(ExactLab& lab, const RiskReport& bayes, int m,
                            const ValidatorSpec& vspec) {
    ExcessRiskReport report;
    report.audited = lab.risk(vspec);
    report.bayes = bayes;
    report.rates = lab.rates(vspec);
    report.empirical_excess = report.audited.total_risk - report.bayes.total_risk;

    std::vector<double> alpha(m, 0.0);
    std::vector<double> beta(m, 0.0);
    for (int i = 0; i < m; ++i) {
        alpha[i] = vspec.alpha_at(i);
        beta[i] = vspec.beta_at(i);
    }
    KahanSum fp;
    KahanSum fn;
    for (int i = 0; i < m; ++i) {
        fp.add(beta[i] * report.rates.p_unsupported[i] * report.rates.p_use_given_unsup[i]);
        fn.add(report.rates.p_use[i] * alpha[i] * report.rates.delta[i]);
    }
    report.fp_term = fp.value();
    report.fn_term = fn.value();
    report.per_premise_excess_bound = report.fp_term + report.fn_term;

    const double alpha_max =
        alpha.empty() ? 0.0 : *std::max_element(alpha.begin(), alpha.end());
    report.homogeneous_excess_bound = homogeneous_excess_bound(alpha_max, report.rates.delta_max,
                                             report.rates.e_k_trace, report.rates.e_min1_kfp);

    constexpr double kSlack = 1e-9;
    report.per_premise_satisfied = report.empirical_excess <= report.per_premise_excess_bound + kSlack;
    report.homogeneous_satisfied = report.empirical_excess <= report.homogeneous_excess_bound + kSlack;
    return report;
}

}  // namespace

ExcessRiskReport verify_bounds(const WorldModel& world, const ValidatorSpec& vspec,
                               KernelKind kind, long long cap) {
    return verify_bounds_grid(world, {vspec}, kind, cap).front();
}

std::vector<ExcessRiskReport> verify_bounds_grid(const WorldModel& world,
                                                 const std::vector<ValidatorSpec>& specs,
                                                 KernelKind kind, long long cap) {
    PredictorSpec spec;
    spec.kind = kind;
    ExactLab lab(world, spec, cap);
    const int m = world.premise_count();
    const RiskReport bayes = lab.risk(ValidatorSpec::perfect(m));
    std::vector<ExcessRiskReport> out;
    out.reserve(specs.size());
    for (const auto& vspec : specs) out.push_back(verify_one(lab, bayes, m, vspec));
    return out;
}

// ---------------------------------------------------------------------------
// Generators

WorldModel random_world(std::uint64_t seed, int m, int max_domain, int n_labels) {
    if (m < 1 || max_domain < 2 || n_labels < 2)
        throw InvalidArgumentError("random_world requires m >= 1, max_domain >= 2, labels >= 2");
    SplitMix64 rng(seed);
    WorldModel world;
    world.n_labels = n_labels;
    world.abstain_cost = 0.5;

    ProductPrior prior;
    for (int i = 0; i < m; ++i) {
        Premise p;
        p.id = i + 1;
        p.text = "G" + std::to_string(i + 1);
        p.domain_size = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_domain - 1)));
        const std::uint64_t subsets = (1ULL << p.domain_size) - 1;
        const std::uint64_t mask = 1 + rng.below(subsets);
        for (int s = 0; s < p.domain_size; ++s)
            if (mask >> s & 1ULL) p.supported_states.insert(s);

        // Floor each prior entry at 0.05 so every single-premise event keeps mass.
        std::vector<double> f(p.domain_size);
        double total = 0.0;
        for (double& v : f) total += v = rng.uniform() + 1e-9;
        const double floor = 0.05;
        const double rest = 1.0 - floor * p.domain_size;
        for (double& v : f) v = floor + rest * (v / total);
        prior.factors.push_back(std::move(f));
        world.premises.push_back(std::move(p));
    }
    world.prior = std::move(prior);

    const long long joint = checked_joint_size(world);
    FullLabelTable label;
    label.rows.resize(static_cast<std::size_t>(joint));
    for (auto& row : label.rows) {
        row.resize(n_labels);
        double total = 0.0;
        for (double& v : row) total += v = rng.uniform() + 1e-9;
        for (double& v : row) v /= total;
    }
    world.label_model = std::move(label);
    return world;
}

WorldModel random_tree_world(std::uint64_t seed, int m, int max_domain, int n_labels) {
    if (m < 1 || max_domain < 2 || n_labels < 2)
        throw InvalidArgumentError("random_tree_world requires m >= 1, max_domain >= 2, labels >= 2");
    SplitMix64 rng(seed);
    WorldModel world;
    world.n_labels = n_labels;
    world.abstain_cost = 0.5;

    std::vector<int> domain(m);
    for (int i = 0; i < m; ++i) {
        Premise p;
        p.id = i + 1;
        p.text = "G" + std::to_string(i + 1);
        p.domain_size = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_domain - 1)));
        domain[i] = p.domain_size;
        const std::uint64_t subsets = (1ULL << p.domain_size) - 1;
        const std::uint64_t mask = 1 + rng.below(subsets);
        for (int s = 0; s < p.domain_size; ++s)
            if (mask >> s & 1ULL) p.supported_states.insert(s);
        world.premises.push_back(std::move(p));
    }

    auto conditional_row = [&rng](int width) {
        std::vector<double> row(width);
        double total = 0.0;
        for (double& v : row) total += v = rng.uniform() + 1e-9;
        const double floor = 0.05;
        const double rest = 1.0 - floor * width;
        for (double& v : row) v = floor + rest * (v / total);
        return row;
    };

    FactorListPrior prior;
    {
        Factor root;
        root.scope = {0};
        root.table = conditional_row(domain[0]);
        prior.factors.push_back(std::move(root));
    }
    for (int i = 1; i < m; ++i) {
        const int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
        Factor f;
        f.scope = {parent, i};
        for (int s = 0; s < domain[parent]; ++s) {
            auto row = conditional_row(domain[i]);
            f.table.insert(f.table.end(), row.begin(), row.end());
        }
        prior.factors.push_back(std::move(f));
    }
    world.prior = std::move(prior);

    const int label_node = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    FactoredLabel label;
    label.scope = {label_node};
    for (int s = 0; s < domain[label_node]; ++s) {
        auto row = conditional_row(n_labels);
        label.table.insert(label.table.end(), row.begin(), row.end());
    }
    world.label_model = std::move(label);
    return world;
}

WorldModel binary_chain_world(int n) {
    if (n < 1) throw InvalidArgumentError("chain length must be positive");
    WorldModel world;
    world.n_labels = 2;
    world.abstain_cost = 0.5;
    for (int i = 0; i < n; ++i) {
        Premise p;
        p.id = i + 1;
        p.text = "G" + std::to_string(i + 1);
        p.domain_size = 2;
        p.supported_states = {1};
        world.premises.push_back(std::move(p));
    }
    FactorListPrior prior;
    prior.factors.push_back(Factor{{0}, {0.45, 0.55}});
    for (int i = 1; i < n; ++i)
        prior.factors.push_back(Factor{{i - 1, i}, {0.7, 0.3, 0.2, 0.8}});
    world.prior = std::move(prior);
    world.label_model = FactoredLabel{{n - 1}, {0.75, 0.25, 0.2, 0.8}};
    return world;
}

WorldModel independent_world(const std::vector<int>& domain_sizes, int n_labels) {
    if (domain_sizes.empty()) throw InvalidArgumentError("independent_world needs premises");
    WorldModel world;
    world.n_labels = n_labels;
    world.abstain_cost = 0.5;
    FactorListPrior prior;
    for (std::size_t i = 0; i < domain_sizes.size(); ++i) {
        const int d = domain_sizes[i];
        Premise p;
        p.id = static_cast<int>(i) + 1;
        p.text = "G" + std::to_string(i + 1);
        p.domain_size = d;
        p.supported_states = {0};
        world.premises.push_back(std::move(p));
        std::vector<double> f(d, 1.0 / d);
        // Keep the table an exact distribution despite the division.
        double acc = 0.0;
        for (int s = 0; s + 1 < d; ++s) acc += f[s];
        f[d - 1] = 1.0 - acc;
        prior.factors.push_back(Factor{{static_cast<int>(i)}, std::move(f)});
    }
    world.prior = std::move(prior);

    FactoredLabel label;
    label.scope = {0};
    for (int s = 0; s < domain_sizes[0]; ++s) {
        std::vector<double> row(n_labels);
        double total = 0.0;
        for (int y = 0; y < n_labels; ++y) total += row[y] = 1.0 + ((s + y) % n_labels);
        for (double& v : row) v /= total;
        label.table.insert(label.table.end(), row.begin(), row.end());
    }
    world.label_model = std::move(label);
    return world;
}

}  // namespace aou
