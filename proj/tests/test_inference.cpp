#include <doctest.h>

#include <cmath>

#include "aou/inference.hpp"
#include "aou/risk.hpp"
#include "test_support.hpp"

using namespace aou;

TEST_CASE("standard_posterior marginalizes the full prior") {
    auto w = test::w1();
    auto post = standard_posterior(w);
    CHECK(post.probs[1] == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(post.evidence_mass == doctest::Approx(1.0));

    SUBCASE("point-mass prior returns the conditional row") {
        w.prior = FullTablePrior{{0.0, 0.0, 1.0, 0.0}};  // g = (1,0)
        auto point = standard_posterior(w);
        CHECK(point.probs[1] == doctest::Approx(0.6));
    }
    SUBCASE("uniform label conditional gives a uniform posterior") {
        w.label_model = FullLabelTable{std::vector<std::vector<double>>(4, {0.5, 0.5})};
        auto uniform = standard_posterior(w);
        CHECK(uniform.probs[0] == doctest::Approx(0.5));
    }
}

TEST_CASE("constrained_posterior: event evidence on W1") {
    auto w = test::w1();
    auto post = constrained_posterior(w, Evidence::event({0}));
    CHECK(post.probs[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(post.evidence_mass == doctest::Approx(0.8));
    // One score evaluation per (consistent assignment, label) term.
    CHECK(post.ledger.score_evals == 2 * 2);
    CHECK(post.ledger.stat_updates == 1);
}

TEST_CASE("constrained_posterior: empty constraint equals the standard posterior") {
    auto w = test::w1();
    auto a = constrained_posterior(w, Evidence::event({}));
    auto b = standard_posterior(w);
    CHECK(a.probs == b.probs);
}

TEST_CASE("constrained_posterior: full value evidence returns the exact row") {
    auto w = test::w1();
    auto post = constrained_posterior(w, Evidence::value({0, 1}, Assignment{1, 0}));
    CHECK(post.probs[1] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(post.probs[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("constrained_posterior: zero-mass evidence raises") {
    auto w = test::w1();
    std::get<ProductPrior>(w.prior).factors[0] = {1.0, 0.0};
    CHECK_THROWS_AS(constrained_posterior(w, Evidence::value({0}, Assignment{1, 0})),
                    ImpossibleEvidenceError);
}

TEST_CASE("posterior normalization on random worlds") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto w = random_world(seed, 3, 3, 3);
        auto post = constrained_posterior(w, Evidence::event({0, 2}));
        double sum = 0.0;
        for (double p : post.probs) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("bayes_action minimizes expected loss with fixed tie-break") {
    PosteriorReport post;
    post.probs = {0.75, 0.25};
    auto loss = zero_one_loss(2);
    auto [action, expected] = bayes_action(post, loss);
    CHECK(action == 0);
    CHECK(expected == doctest::Approx(0.25));

    SUBCASE("uniform posterior breaks ties to the lowest index") {
        post.probs = {0.5, 0.5};
        CHECK(bayes_action(post, loss).first == 0);
    }
    SUBCASE("all-zero loss picks action 0 with zero loss") {
        std::vector<std::vector<double>> zero(2, std::vector<double>(2, 0.0));
        auto [a, e] = bayes_action(post, zero);
        CHECK(a == 0);
        CHECK(e == 0.0);
    }
    SUBCASE("empty action set throws") {
        CHECK_THROWS_AS(bayes_action(post, {}), InvalidArgumentError);
    }
    SUBCASE("0-1 loss argmin equals posterior argmax") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            SplitMix64 rng(seed);
            PosteriorReport p;
            double total = 0.0;
            p.probs.resize(4);
            for (double& v : p.probs) total += v = rng.uniform() + 1e-12;
            for (double& v : p.probs) v /= total;
            auto [a, e] = bayes_action(p, zero_one_loss(4));
            int argmax = 0;
            for (int y = 1; y < 4; ++y)
                if (p.probs[y] > p.probs[argmax]) argmax = y;
            CHECK(a == argmax);
            CHECK(e == doctest::Approx(1.0 - p.probs[argmax]));
        }
    }
}

TEST_CASE("aou_decide applies the Chow rule") {
    auto w = test::w1();
    auto outcome = ValidationOutcome::from_verdicts({1, 0});

    SUBCASE("W1 event case answers y=1 at lambda 0.3") {
        DecideOptions opt;
        opt.use_abstention = true;
        opt.lambda = 0.3;
        auto report = aou_decide(w, outcome, EvidenceMode::Event, opt);
        CHECK_FALSE(report.abstained);
        CHECK(report.action == 1);
        CHECK(report.expected_loss == doctest::Approx(0.25));
        CHECK(report.posterior.probs[1] == doctest::Approx(0.75));
    }
    SUBCASE("lambda 0 always abstains") {
        DecideOptions opt;
        opt.use_abstention = true;
        opt.lambda = 0.0;
        auto report = aou_decide(w, outcome, EvidenceMode::Event, opt);
        CHECK(report.abstained);
        CHECK(report.reason == AbstainReason::ChowRule);
        CHECK(report.expected_loss == 0.0);
    }
    SUBCASE("lambda 1 never abstains when some loss is below 1") {
        DecideOptions opt;
        opt.use_abstention = true;
        opt.lambda = 1.0;
        auto report = aou_decide(w, outcome, EvidenceMode::Event, opt);
        CHECK_FALSE(report.abstained);
    }
    SUBCASE("value mode requires realized values") {
        CHECK_THROWS_AS(aou_decide(w, outcome, EvidenceMode::Value), InvalidArgumentError);
        auto report =
            aou_decide(w, outcome, EvidenceMode::Value, {}, Assignment{1, 0});
        CHECK(report.action == 1);  // conditioning on G1=1 only
        CHECK(report.posterior.probs[1] == doctest::Approx(0.75));
    }
    SUBCASE("impossible evidence forces abstention with a reason code") {
        std::get<ProductPrior>(w.prior).factors[0] = {1.0, 0.0};
        auto report = aou_decide(w, outcome, EvidenceMode::Event, {});
        CHECK(report.abstained);
        CHECK(report.reason == AbstainReason::ImpossibleEvidence);
        CHECK(report.expected_loss == doctest::Approx(w.abstain_cost));
    }
}

TEST_CASE("chow abstention matches the max-posterior form under 0-1 loss") {
    auto loss = zero_one_loss(3);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SplitMix64 rng(seed * 31 + 7);
        PosteriorReport post;
        post.probs.resize(3);
        double total = 0.0;
        for (double& v : post.probs) total += v = rng.uniform() + 1e-12;
        for (double& v : post.probs) v /= total;
        double maxp = std::max({post.probs[0], post.probs[1], post.probs[2]});
        for (int l = 0; l <= 10; ++l) {
            const double lambda = l / 10.0;
            auto [action, expected] = bayes_action(post, loss);
            (void)action;
            const bool abstains = expected >= lambda;
            const bool max_form = maxp <= 1.0 - lambda;
            CHECK(abstains == max_form);
        }
    }
}

TEST_CASE("adversarial completion takes the worst-case consistent row") {
    auto w = test::w1();
    auto outcome = ValidationOutcome::from_verdicts({1, 0});
    DecideOptions opt;
    opt.completion = CompletionFamily::Adversarial;

    // Completions over G2 given G1=1: rows (0.4,0.6) and (0.1,0.9); the
    // minimax action is y=1 with worst-case loss 0.4.
    auto report = aou_decide(w, outcome, EvidenceMode::Event, opt);
    CHECK(report.action == 1);
    CHECK(report.expected_loss == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(report.posterior.evidence_mass == doctest::Approx(0.8));

    SUBCASE("never below the prior-completion Bayes loss") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            auto world = random_world(seed + 300, 3, 3, 2);
            for (std::uint32_t vmask = 0; vmask < 8; ++vmask) {
                auto oc = ValidationOutcome::from_verdicts({
                    static_cast<int>(vmask & 1U),
                    static_cast<int>(vmask >> 1 & 1U),
                    static_cast<int>(vmask >> 2 & 1U),
                });
                auto prior_report = aou_decide(world, oc, EvidenceMode::Event, {});
                auto adv_report = aou_decide(world, oc, EvidenceMode::Event, opt);
                CHECK(adv_report.expected_loss >= prior_report.expected_loss - 1e-12);
            }
        }
    }
    SUBCASE("abstention compares lambda against the minimax loss") {
        opt.use_abstention = true;
        opt.lambda = 0.35;  // below the 0.4 minimax -> abstain
        auto abstained = aou_decide(w, outcome, EvidenceMode::Event, opt);
        CHECK(abstained.abstained);
        CHECK(abstained.reason == AbstainReason::ChowRule);
    }
}
