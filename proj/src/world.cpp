#include "aou/world.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "aou/util.hpp"

namespace aou {

namespace {

constexpr double kProbTol = 1e-9;

double factor_value(const Factor& f, const WorldModel& world, const Assignment& g, int label) {
    long long idx = 0;
    for (int var : f.scope) {
        int dom = var == world.label_index() ? world.n_labels : world.premises[var].domain_size;
        int val = var == world.label_index() ? label : g[var];
        idx = idx * dom + val;
    }
    return f.table[static_cast<std::size_t>(idx)];
}

}  // namespace

long double joint_size_ld(const WorldModel& world) {
    long double p = 1.0L;
    for (const auto& pr : world.premises) p *= pr.domain_size;
    return p;
}

long long checked_joint_size(const WorldModel& world, long long cap) {
    long long p = 1;
    for (const auto& pr : world.premises) {
        if (pr.domain_size <= 0) throw InvalidArgumentError("premise has nonpositive domain size");
        if (p > cap / pr.domain_size) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "joint state space has %.0Lf states, above cap %lld",
                          joint_size_ld(world), cap);
            throw EnumerationTooLargeError(buf);
        }
        p *= pr.domain_size;
    }
    return p;
}

long long rank_of(const WorldModel& world, const Assignment& g) {
    if (static_cast<int>(g.size()) != world.premise_count())
        throw MissingValueError("assignment length does not match premise count");
    long long r = 0;
    for (int i = 0; i < world.premise_count(); ++i) {
        r = r * world.premises[i].domain_size + g[i];
    }
    return r;
}

Assignment unrank(const WorldModel& world, long long rank) {
    Assignment g(world.premise_count());
    for (int i = world.premise_count() - 1; i >= 0; --i) {
        int dom = world.premises[i].domain_size;
        g[i] = static_cast<int>(rank % dom);
        rank /= dom;
    }
    return g;
}

double prior_prob(const WorldModel& world, const Assignment& g) {
    if (const auto* full = std::get_if<FullTablePrior>(&world.prior)) {
        return full->probs[static_cast<std::size_t>(rank_of(world, g))];
    }
    if (const auto* prod = std::get_if<ProductPrior>(&world.prior)) {
        double p = 1.0;
        for (int i = 0; i < world.premise_count(); ++i) p *= prod->factors[i][g[i]];
        return p;
    }
    const auto& fl = std::get<FactorListPrior>(world.prior);
    double p = 1.0;
    for (const auto& f : fl.factors) p *= factor_value(f, world, g, /*label=*/0);
    return p;
}

double label_prob(const WorldModel& world, const Assignment& g, int label) {
    if (const auto* full = std::get_if<FullLabelTable>(&world.label_model)) {
        return full->rows[static_cast<std::size_t>(rank_of(world, g))][label];
    }
    const auto& fac = std::get<FactoredLabel>(world.label_model);
    long long idx = 0;
    for (int var : fac.scope) idx = idx * world.premises[var].domain_size + g[var];
    return fac.table[static_cast<std::size_t>(idx * world.n_labels + label)];
}

std::vector<std::vector<double>> zero_one_loss(int n_labels) {
    std::vector<std::vector<double>> l(n_labels, std::vector<double>(n_labels, 1.0));
    for (int a = 0; a < n_labels; ++a) l[a][a] = 0.0;
    return l;
}

namespace {

void validate_factor_scope(const WorldModel& world, const Factor& f, bool allow_label,
                           const std::string& where, std::vector<std::string>& out) {
    long long size = 1;
    for (int var : f.scope) {
        if (var == world.label_index() && allow_label) {
            size *= world.n_labels;
            continue;
        }
        if (var < 0 || var >= world.premise_count()) {
            out.push_back(where + ": factor scope references unknown variable " +
                          std::to_string(var));
            return;
        }
        size *= world.premises[var].domain_size;
    }
    if (static_cast<long long>(f.table.size()) != size)
        out.push_back(where + ": factor table size " + std::to_string(f.table.size()) +
                      " does not match scope size " + std::to_string(size));
    for (double v : f.table) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            out.push_back(where + ": factor table has a negative or non-finite entry");
            break;
        }
    }
}

}  // namespace

std::vector<std::string> validate_world(const WorldModel& world, long long cap) {
    std::vector<std::string> out;
    const int m = world.premise_count();

    for (int i = 0; i < m; ++i) {
        const auto& p = world.premises[i];
        const std::string name = "premise " + std::to_string(i + 1);
        if (p.domain_size < 2) out.push_back(name + ": domain_size must be >= 2");
        if (p.supported_states.empty()) out.push_back(name + ": supported_states is empty");
        for (int s : p.supported_states) {
            if (s < 0 || s >= p.domain_size) {
                out.push_back(name + ": supported state " + std::to_string(s) +
                              " outside domain 0.." + std::to_string(p.domain_size - 1));
                break;
            }
        }
    }
    if (world.n_labels < 1) out.push_back("label_space: must contain at least one label");

    bool enumerable = true;
    long long joint = 0;
    try {
        joint = checked_joint_size(world, cap);
    } catch (const EnumerationTooLargeError&) {
        enumerable = false;
    } catch (const InvalidArgumentError&) {
        return out;  // domain errors already reported
    }

    // Prior
    if (const auto* prod = std::get_if<ProductPrior>(&world.prior)) {
        if (static_cast<int>(prod->factors.size()) != m) {
            out.push_back("prior: product prior must have one factor per premise");
        } else {
            for (int i = 0; i < m; ++i) {
                const auto& f = prod->factors[i];
                const std::string name = "prior factor " + std::to_string(i + 1);
                if (static_cast<int>(f.size()) != world.premises[i].domain_size) {
                    out.push_back(name + ": length does not match domain_size");
                    continue;
                }
                KahanSum s;
                bool neg = false;
                for (double v : f) {
                    if (!(v >= 0.0) || !std::isfinite(v)) neg = true;
                    s.add(v);
                }
                if (neg) out.push_back(name + ": negative or non-finite entry");
                if (std::abs(s.value() - 1.0) > kProbTol)
                    out.push_back(name + ": does not sum to 1");
            }
        }
    } else if (const auto* full = std::get_if<FullTablePrior>(&world.prior)) {
        if (!enumerable) {
            out.push_back("prior: full table requires joint size within enumeration cap");
        } else if (static_cast<long long>(full->probs.size()) != joint) {
            out.push_back("prior: full table length does not match joint state count");
        } else {
            KahanSum s;
            bool neg = false;
            for (double v : full->probs) {
                if (!(v >= 0.0) || !std::isfinite(v)) neg = true;
                s.add(v);
            }
            if (neg) out.push_back("prior: negative or non-finite entry");
            if (std::abs(s.value() - 1.0) > kProbTol) out.push_back("prior: does not sum to 1");
        }
    } else {
        const auto& fl = std::get<FactorListPrior>(world.prior);
        std::vector<bool> covered(m, false);
        for (std::size_t k = 0; k < fl.factors.size(); ++k) {
            validate_factor_scope(world, fl.factors[k], /*allow_label=*/false,
                                  "prior factor " + std::to_string(k + 1), out);
            for (int var : fl.factors[k].scope)
                if (var >= 0 && var < m) covered[var] = true;
        }
        for (int i = 0; i < m; ++i)
            if (!covered[i])
                out.push_back("prior: factors do not cover premise " + std::to_string(i + 1));
        // Joint normalization is only checkable by enumeration.
        if (enumerable && out.empty()) {
            KahanSum s;
            for (long long r = 0; r < joint; ++r) s.add(prior_prob(world, unrank(world, r)));
            if (std::abs(s.value() - 1.0) > kProbTol) out.push_back("prior: does not sum to 1");
        }
    }

    // Label model
    if (const auto* full = std::get_if<FullLabelTable>(&world.label_model)) {
        if (!enumerable) {
            out.push_back("label_conditional: full table requires joint size within cap");
        } else if (static_cast<long long>(full->rows.size()) != joint) {
            out.push_back("label_conditional: row count does not match joint state count");
        } else {
            for (long long r = 0; r < joint; ++r) {
                const auto& row = full->rows[static_cast<std::size_t>(r)];
                if (static_cast<int>(row.size()) != world.n_labels) {
                    out.push_back("label_conditional: row " + std::to_string(r) +
                                  " length does not match label count");
                    break;
                }
                KahanSum s;
                bool neg = false;
                for (double v : row) {
                    if (!(v >= 0.0) || !std::isfinite(v)) neg = true;
                    s.add(v);
                }
                if (neg || std::abs(s.value() - 1.0) > kProbTol) {
                    out.push_back("label_conditional: row " + std::to_string(r) +
                                  " is not a distribution");
                    break;
                }
            }
        }
    } else {
        const auto& fac = std::get<FactoredLabel>(world.label_model);
        long long scope_size = 1;
        bool scope_ok = true;
        for (int var : fac.scope) {
            if (var < 0 || var >= m) {
                out.push_back("label_conditional: scope references unknown variable " +
                              std::to_string(var));
                scope_ok = false;
                break;
            }
            scope_size *= world.premises[var].domain_size;
        }
        if (scope_ok) {
            if (static_cast<long long>(fac.table.size()) != scope_size * world.n_labels) {
                out.push_back("label_conditional: table size does not match scope");
            } else {
                for (long long k = 0; k < scope_size; ++k) {
                    KahanSum s;
                    bool neg = false;
                    for (int y = 0; y < world.n_labels; ++y) {
                        double v = fac.table[static_cast<std::size_t>(k * world.n_labels + y)];
                        if (!(v >= 0.0) || !std::isfinite(v)) neg = true;
                        s.add(v);
                    }
                    if (neg || std::abs(s.value() - 1.0) > kProbTol) {
                        out.push_back("label_conditional: scope row " + std::to_string(k) +
                                      " is not a distribution");
                        break;
                    }
                }
            }
        }
    }

    // Loss and abstention
    if (!world.loss.empty()) {
        if (world.loss.size() < 1) out.push_back("loss: empty action set");
        for (std::size_t a = 0; a < world.loss.size(); ++a) {
            if (static_cast<int>(world.loss[a].size()) != world.n_labels) {
                out.push_back("loss: row " + std::to_string(a) +
                              " length does not match label count");
                continue;
            }
            for (double v : world.loss[a]) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    out.push_back("loss: entry outside [0,1] in row " + std::to_string(a));
                    break;
                }
            }
        }
    }
    if (!(world.abstain_cost >= 0.0 && world.abstain_cost <= 1.0))
        out.push_back("abstain_cost: must lie in [0,1]");

    return out;
}

std::vector<std::pair<Assignment, double>> enumerate_assignments(const WorldModel& world,
                                                                 long long cap) {
    const long long joint = checked_joint_size(world, cap);
    std::vector<std::pair<Assignment, double>> out;
    out.reserve(static_cast<std::size_t>(joint));
    for (long long r = 0; r < joint; ++r) {
        Assignment g = unrank(world, r);
        double p = prior_prob(world, g);
        out.emplace_back(std::move(g), p);
    }
    return out;
}

std::vector<int> support_status(const WorldModel& world, const Assignment& g) {
    if (static_cast<int>(g.size()) != world.premise_count())
        throw MissingValueError("assignment length does not match premise count");
    std::vector<int> s(world.premise_count());
    for (int i = 0; i < world.premise_count(); ++i) {
        s[i] = world.premises[i].supported_states.count(g[i]) ? 1 : 0;
    }
    return s;
}

std::vector<int> support_status(const WorldModel& world, const PartialAssignment& g) {
    Assignment total(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].has_value())
            throw MissingValueError("support_status requires a total assignment; index " +
                                    std::to_string(i + 1) + " is missing");
        total[i] = *g[i];
    }
    return support_status(world, total);
}

}  // namespace aou
