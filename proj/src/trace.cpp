#include "aou/trace.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "aou/util.hpp"

namespace aou {

namespace {

// Actions of the kernel at every joint rank, in rank order.
std::vector<int> materialize_actions(const DecisionKernel& kernel, const WorldModel& world,
                                     long long joint) {
    std::vector<int> actions(static_cast<std::size_t>(joint));
    for (long long r = 0; r < joint; ++r) actions[static_cast<std::size_t>(r)] = kernel(unrank(world, r));
    return actions;
}

bool mask_is_support(const std::vector<int>& actions, const WorldModel& world,
                     std::uint32_t mask) {
    const int m = world.premise_count();
    long long key_space = 1;
    for (int i = 0; i < m; ++i)
        if (mask >> i & 1U) key_space *= world.premises[i].domain_size;

    std::vector<int> table(static_cast<std::size_t>(key_space), -2);
    std::vector<int> digits(m, 0);
    const long long joint = static_cast<long long>(actions.size());
    for (long long r = 0; r < joint; ++r) {
        long long key = 0;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1U) key = key * world.premises[i].domain_size + digits[i];
        int& slot = table[static_cast<std::size_t>(key)];
        if (slot == -2) {
            slot = actions[static_cast<std::size_t>(r)];
        } else if (slot != actions[static_cast<std::size_t>(r)]) {
            return false;
        }
        for (int i = m - 1; i >= 0; --i) {  // advance odometer
            if (++digits[i] < world.premises[i].domain_size) break;
            digits[i] = 0;
        }
    }
    return true;
}

std::set<int> mask_to_set(std::uint32_t mask, int m) {
    std::set<int> s;
    for (int i = 0; i < m; ++i)
        if (mask >> i & 1U) s.insert(i);
    return s;
}

}  // namespace

bool is_support_set(const DecisionKernel& kernel, const WorldModel& world, const std::set<int>& s,
                    long long cap) {
    const long long joint = checked_joint_size(world, cap);
    std::uint32_t mask = 0;
    for (int i : s) {
        if (i < 0 || i >= world.premise_count())
            throw InvalidArgumentError("support-set index outside premise range");
        mask |= 1U << i;
    }
    return mask_is_support(materialize_actions(kernel, world, joint), world, mask);
}

TraceReport reasoning_trace(const DecisionKernel& kernel, const WorldModel& world, long long cap) {
    const int m = world.premise_count();
    if (m > kMaxTracePremises)
        throw EnumerationTooLargeError("trace subset enumeration capped at " +
                                       std::to_string(kMaxTracePremises) + " premises, got " +
                                       std::to_string(m));
    const long long joint = checked_joint_size(world, cap);
    return detail::trace_from_actions(materialize_actions(kernel, world, joint), world);
}

TraceReport detail::trace_from_actions(const std::vector<int>& actions, const WorldModel& world) {
    const int m = world.premise_count();
    if (m > kMaxTracePremises)
        throw EnumerationTooLargeError("trace subset enumeration capped at " +
                                       std::to_string(kMaxTracePremises) + " premises, got " +
                                       std::to_string(m));

    std::vector<std::uint32_t> masks(1ULL << m);
    for (std::uint32_t v = 0; v < masks.size(); ++v) masks[v] = v;
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = __builtin_popcount(a);
        int pb = __builtin_popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    std::vector<std::uint32_t> minimal;
    for (std::uint32_t mask : masks) {
        bool dominated = false;
        for (std::uint32_t found : minimal) {
            if ((found & mask) == found) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        if (mask_is_support(actions, world, mask)) minimal.push_back(mask);
    }

    TraceReport report;
    std::uint32_t trace_mask = minimal.empty() ? 0 : ~0U;
    for (std::uint32_t mask : minimal) {
        report.minimal_support_sets.push_back(mask_to_set(mask, m));
        trace_mask &= mask;
    }
    report.trace = mask_to_set(trace_mask, m);
    report.k_trace = static_cast<int>(report.trace.size());
    return report;
}

bool hallucination_event(const TraceReport& report, const std::set<int>& rejected) {
    for (int i : report.trace)
        if (rejected.count(i) != 0) return true;
    return false;
}

detail::ValueDecisionTable detail::value_decision_table(const WorldModel& world,
                                                        const std::set<int>& validated_set,
                                                        const DecideOptions& options,
                                                        long long cap) {
    const int m = world.premise_count();
    const long long joint = checked_joint_size(world, cap);
    const int n_labels = world.n_labels;
    const double lambda = options.lambda.value_or(world.abstain_cost);
    const auto loss = world.loss.empty() ? zero_one_loss(n_labels) : world.loss;

    ValueDecisionTable out;
    out.validated.assign(validated_set.begin(), validated_set.end());
    long long key_space = 1;
    for (int i : out.validated) key_space *= world.premises[i].domain_size;
    out.strides.assign(out.validated.size(), 1);
    for (int k = static_cast<int>(out.validated.size()) - 2; k >= 0; --k)
        out.strides[k] = out.strides[k + 1] * world.premises[out.validated[k + 1]].domain_size;

    const int n_actions = world.action_count();
    const bool adversarial = options.completion == CompletionFamily::Adversarial;
    std::vector<KahanSum> mass(static_cast<std::size_t>(key_space));
    std::vector<KahanSum> acc(static_cast<std::size_t>(key_space * n_labels));
    std::vector<double> worst;
    if (adversarial) worst.assign(static_cast<std::size_t>(key_space * n_actions), -1.0);
    std::vector<int> digits(m, 0);
    Assignment g(m, 0);
    for (long long r = 0; r < joint; ++r) {
        long long key = 0;
        for (std::size_t k = 0; k < out.validated.size(); ++k)
            key += digits[out.validated[k]] * out.strides[k];
        g.assign(digits.begin(), digits.end());
        const double pg = prior_prob(world, g);
        mass[static_cast<std::size_t>(key)].add(pg);
        for (int y = 0; y < n_labels; ++y)
            acc[static_cast<std::size_t>(key * n_labels + y)].add(pg * label_prob(world, g, y));
        if (adversarial && pg > 0.0) {
            for (int a = 0; a < n_actions; ++a) {
                double e = 0.0;
                for (int y = 0; y < n_labels; ++y) e += loss[a][y] * label_prob(world, g, y);
                double& slot = worst[static_cast<std::size_t>(key * n_actions + a)];
                if (e > slot) slot = e;
            }
        }
        for (int i = m - 1; i >= 0; --i) {
            if (++digits[i] < world.premises[i].domain_size) break;
            digits[i] = 0;
        }
    }

    out.decisions.assign(static_cast<std::size_t>(key_space), kAbstain);
    for (long long key = 0; key < key_space; ++key) {
        const double z = mass[static_cast<std::size_t>(key)].value();
        if (!(z > 0.0)) continue;  // impossible evidence -> abstain
        int action = 0;
        double expected = 0.0;
        if (adversarial) {
            for (int a = 1; a < n_actions; ++a) {
                if (worst[static_cast<std::size_t>(key * n_actions + a)] <
                    worst[static_cast<std::size_t>(key * n_actions + action)])
                    action = a;
            }
            expected = worst[static_cast<std::size_t>(key * n_actions + action)];
        } else {
            PosteriorReport post;
            post.probs.resize(n_labels);
            for (int y = 0; y < n_labels; ++y)
                post.probs[y] = acc[static_cast<std::size_t>(key * n_labels + y)].value() / z;
            std::tie(action, expected) = bayes_action(post, loss);
        }
        if (options.use_abstention && expected >= lambda) {
            out.decisions[static_cast<std::size_t>(key)] = kAbstain;
        } else {
            out.decisions[static_cast<std::size_t>(key)] = action;
        }
    }
    return out;
}

DecisionKernel build_kernel(const WorldModel& world, const ValidationOutcome& outcome,
                            KernelKind kind, const DecideOptions& options, long long cap) {
    DecisionKernel kernel;
    kernel.kind = kind;
    switch (kind) {
        case KernelKind::AoUEvent: {
            const int action = aou_decide(world, outcome, EvidenceMode::Event, options,
                                          std::nullopt, cap)
                                   .action;
            kernel.fn = [action](const Assignment&) { return action; };
            return kernel;
        }
        case KernelKind::Standard: {
            // No conditioning at all: the full-marginal posterior.
            ValidationOutcome none = ValidationOutcome::from_verdicts(
                std::vector<int>(world.premise_count(), 0));
            const int action = aou_decide(world, none, EvidenceMode::Event, options,
                                          std::nullopt, cap)
                                   .action;
            kernel.fn = [action](const Assignment&) { return action; };
            return kernel;
        }
        case KernelKind::AoUValue: {
            auto table = detail::value_decision_table(world, outcome.validated, options, cap);
            kernel.fn = [table = std::move(table)](const Assignment& g) { return table.at(g); };
            return kernel;
        }
        case KernelKind::Credulous: {
            std::set<int> all;
            for (int i = 0; i < world.premise_count(); ++i) all.insert(i);
            auto table = detail::value_decision_table(world, all, options, cap);
            kernel.fn = [table = std::move(table)](const Assignment& g) { return table.at(g); };
            return kernel;
        }
        case KernelKind::Custom:
            break;
    }
    throw InvalidArgumentError("custom kernels must be supplied by the caller");
}

const char* kernel_kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::AoUEvent: return "aou-event";
        case KernelKind::AoUValue: return "aou-value";
        case KernelKind::Standard: return "standard";
        case KernelKind::Credulous: return "credulous";
        case KernelKind::Custom: return "custom";
    }
    return "unknown";
}

}  // namespace aou
