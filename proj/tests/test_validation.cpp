#include <doctest.h>

#include <cmath>

#include "aou/validation.hpp"
#include "test_support.hpp"

using namespace aou;

TEST_CASE("audit_perfect partitions by membership and charges m calls") {
    WorldModel w;
    w.premises = {test::binary_premise(1), test::binary_premise(2), test::binary_premise(3)};
    w.prior = ProductPrior{std::vector<std::vector<double>>(3, {0.5, 0.5})};
    w.n_labels = 2;
    w.label_model = FullLabelTable{std::vector<std::vector<double>>(8, {0.5, 0.5})};

    CostLedger ledger;
    auto out = audit_perfect(w, Assignment{1, 0, 1}, &ledger);
    CHECK(out.validated == std::set<int>{0, 2});
    CHECK(out.rejected == std::set<int>{1});
    CHECK(ledger.validator_calls == 3);

    SUBCASE("full supported sets reject nothing") {
        for (auto& p : w.premises) p.supported_states = {0, 1};
        auto all = audit_perfect(w, Assignment{0, 0, 1});
        CHECK(all.rejected.empty());
    }
}

TEST_CASE("audit_perfect on the empty world") {
    WorldModel w;
    w.prior = ProductPrior{};
    w.n_labels = 2;
    w.label_model = FullLabelTable{{{0.5, 0.5}}};
    auto out = audit_perfect(w, Assignment{});
    CHECK(out.validated.empty());
    CHECK(out.rejected.empty());
}

TEST_CASE("audit_probabilistic with zero rates equals audit_perfect") {
    auto w = test::w1();
    auto spec = ValidatorSpec::homogeneous(2, 0.0, 0.0);
    for (std::uint64_t trial = 0; trial < 16; ++trial) {
        CounterRng rng(99, trial);
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                Assignment g{a, b};
                auto support = support_status(w, g);
                auto probabilistic = audit_probabilistic(spec, support, rng);
                auto perfect = audit_perfect(w, g);
                CHECK(probabilistic.validated == perfect.validated);
                CHECK(probabilistic.rejected == perfect.rejected);
            }
        }
    }
}

TEST_CASE("audit_probabilistic with alpha=1 rejects every supported premise") {
    auto spec = ValidatorSpec::homogeneous(3, 1.0, 0.0);
    CounterRng rng(5, 0);
    auto out = audit_probabilistic(spec, {1, 1, 1}, rng);
    CHECK(out.validated.empty());
    CHECK(out.rejected == std::set<int>{0, 1, 2});
}

TEST_CASE("audit_probabilistic rejects mismatched rate vectors") {
    auto spec = ValidatorSpec::rates({0.1}, {0.1});
    CounterRng rng(1, 0);
    CHECK_THROWS_AS(audit_probabilistic(spec, {1, 0}, rng), InvalidArgumentError);
}

TEST_CASE("audit_probabilistic acceptance frequency tracks beta") {
    // Unsupported premise accepted with probability beta = 0.5.
    auto spec = ValidatorSpec::rates({0.0}, {0.5});
    const int n = 100000;
    int accepted = 0;
    for (int t = 0; t < n; ++t) {
        CounterRng rng(1234, static_cast<std::uint64_t>(t));
        auto out = audit_probabilistic(spec, {0}, rng);
        accepted += out.verdicts[0];
    }
    const double freq = static_cast<double>(accepted) / n;
    CHECK(freq > 0.49);
    CHECK(freq < 0.51);
}

TEST_CASE("outcome_distribution enumerates product-form probabilities") {
    SUBCASE("single premise Bernoulli") {
        auto spec = ValidatorSpec::rates({0.1}, {0.0});
        auto dist = outcome_distribution(spec, {1});
        REQUIRE(dist.size() == 2);
        CHECK(dist[0].first.verdicts == std::vector<int>{0});
        CHECK(dist[0].second == doctest::Approx(0.1));
        CHECK(dist[1].first.verdicts == std::vector<int>{1});
        CHECK(dist[1].second == doctest::Approx(0.9));
    }
    SUBCASE("two premises multiply") {
        auto spec = ValidatorSpec::rates({0.1, 0.0}, {0.0, 0.2});
        auto dist = outcome_distribution(spec, {1, 0});
        REQUIRE(dist.size() == 4);
        double sum = 0.0;
        for (const auto& [outcome, p] : dist) {
            double expect = (outcome.verdicts[0] != 0 ? 0.9 : 0.1) *
                            (outcome.verdicts[1] != 0 ? 0.2 : 0.8);
            CHECK(p == doctest::Approx(expect));
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    SUBCASE("degenerate rates give a single outcome") {
        auto spec = ValidatorSpec::homogeneous(3, 0.0, 0.0);
        auto dist = outcome_distribution(spec, {1, 0, 1});
        int positive = 0;
        for (const auto& [outcome, p] : dist) {
            if (p > 0.0) {
                ++positive;
                CHECK(p == doctest::Approx(1.0));
                CHECK(outcome.verdicts == std::vector<int>{1, 0, 1});
            }
        }
        CHECK(positive == 1);
    }
    SUBCASE("cap") {
        auto spec = ValidatorSpec::homogeneous(25, 0.0, 0.0);
        CHECK_THROWS_AS(outcome_distribution(spec, std::vector<int>(25, 1)),
                        EnumerationTooLargeError);
    }
}

TEST_CASE("outcome_distribution matches empirical frequencies within 3 sigma") {
    auto spec = ValidatorSpec::rates({0.15, 0.3}, {0.25, 0.05});
    std::vector<int> support{1, 0};
    auto dist = outcome_distribution(spec, support);

    const int n = 100000;
    std::vector<int> counts(4, 0);
    for (int t = 0; t < n; ++t) {
        CounterRng rng(777, static_cast<std::uint64_t>(t));
        auto out = audit_probabilistic(spec, support, rng);
        counts[out.verdicts[0] | out.verdicts[1] << 1] += 1;
    }
    double total_p = 0.0;
    for (const auto& [outcome, p] : dist) {
        const int idx = outcome.verdicts[0] | outcome.verdicts[1] << 1;
        const double freq = static_cast<double>(counts[idx]) / n;
        const double sigma = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(freq - p) <= 3.0 * sigma);
        total_p += p;
    }
    CHECK(std::abs(total_p - 1.0) < 1e-12);
}

TEST_CASE("partition invariant holds for every outcome") {
    auto spec = ValidatorSpec::rates({0.2, 0.4, 0.1}, {0.3, 0.2, 0.6});
    auto dist = outcome_distribution(spec, {1, 1, 0});
    for (const auto& [outcome, p] : dist) {
        (void)p;
        std::set<int> unioned = outcome.validated;
        unioned.insert(outcome.rejected.begin(), outcome.rejected.end());
        CHECK(unioned == std::set<int>{0, 1, 2});
        for (int i : outcome.validated) CHECK(outcome.rejected.count(i) == 0);
    }
}
