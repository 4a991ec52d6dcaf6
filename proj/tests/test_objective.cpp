#include <doctest.h>

#include <cmath>

#include "rationmem/objective.hpp"
#include "oracles.hpp"
#include "properties.hpp"
#include "test_support.hpp"

using namespace rationmem;

TEST_CASE("bce_loss") {
    CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(bce_loss(1.0 - 1e-12, 1) == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(bce_loss(0.9, 0) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));
    // clamping keeps the loss finite even at the boundaries
    CHECK(std::isfinite(bce_loss(0.0, 1)));
    CHECK(std::isfinite(bce_loss(1.0, 0)));
    CHECK_THROWS_AS(bce_loss(0.5, 2), std::invalid_argument);
}

TEST_CASE("margin_pair_loss") {
    CHECK(margin_pair_loss(0.9, 0.2, 0.5) == 0.0);
    CHECK(margin_pair_loss(0.9, 0.6, 0.5) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(margin_pair_loss(0.4, 0.4, 0.25) == 0.25);
}

TEST_CASE("strong_supervision_loss worked example") {
    SupervisionSets sup;
    sup.positives = {"A"};
    sup.negatives = {"B", "C"};
    const std::map<std::string, double> gates{{"A", 0.9}, {"B", 0.2}, {"C", 0.6}};

    const double loss = strong_supervision_loss(gates, sup, 0.5);
    CHECK(std::fabs(loss - 0.1) <= 1e-15);
    CHECK(loss == oracle::strong_supervision_loss(gates, sup.positives, sup.negatives, 0.5));

    // hinge inactive everywhere
    const std::map<std::string, double> separated{{"A", 0.95}, {"B", 0.1}, {"C", 0.2}};
    CHECK(strong_supervision_loss(separated, sup, 0.5) == 0.0);

    // equal gates on a single pair reduce to gamma
    SupervisionSets pair;
    pair.positives = {"A"};
    pair.negatives = {"B"};
    const std::map<std::string, double> equal{{"A", 0.5}, {"B", 0.5}};
    CHECK(strong_supervision_loss(equal, pair, 0.3) == 0.3);
}

TEST_CASE("strong_supervision_loss error paths") {
    const std::map<std::string, double> gates{{"A", 0.9}, {"B", 0.2}};
    SupervisionSets no_pos;
    no_pos.negatives = {"A", "B"};
    CHECK_THROWS_AS(strong_supervision_loss(gates, no_pos, 0.3), DataError);
    SupervisionSets no_neg;
    no_neg.positives = {"A", "B"};
    CHECK_THROWS_AS(strong_supervision_loss(gates, no_neg, 0.3), DataError);
    SupervisionSets missing;
    missing.positives = {"A"};
    missing.negatives = {"Z"};
    CHECK_THROWS_AS(strong_supervision_loss(gates, missing, 0.3), std::invalid_argument);
}

TEST_CASE("make_supervision partitions the knowledge base") {
    Rng rng(3);
    testsup::TinyInstance inst = testsup::make_tiny_instance(rng, 4, 4);
    const SupervisionSets sup = make_supervision({"r1", "r3"}, inst.kb);
    CHECK(sup.positives == std::set<std::string>{"r1", "r3"});
    CHECK(sup.negatives == std::set<std::string>{"r0", "r2"});
    CHECK_THROWS_AS(make_supervision({"ghost"}, inst.kb), DataError);
}

TEST_CASE("total_loss") {
    Rng rng(17);
    testsup::TinyInstance inst = testsup::make_tiny_instance(rng);
    const EncodedMemory mem = encode_kb(inst.kb, inst.model);
    ForwardTrace trace = forward(inst.clause_text, inst.model, mem);
    const SupervisionSets sup = make_supervision({inst.kb.entries[0].id}, inst.kb);

    SUBCASE("lambda=0 recovers weak supervision bit-exactly") {
        const LossBreakdown lb = total_loss(trace, mem, 1, sup, 0.3, 0.0);
        CHECK(lb.total == bce_loss(trace.probability, 1));
        CHECK(lb.total == lb.classification);
    }
    SUBCASE("fair clause contributes no supervision term") {
        const LossBreakdown lb = total_loss(trace, mem, 0, sup, 0.3, 2.0);
        CHECK(lb.strong_supervision == 0.0);
        CHECK(lb.total == lb.classification);
    }
    SUBCASE("cls=0.3 ss=0.1 lambda=2 totals 0.5") {
        // engineered trace: probability with bce exactly 0.3, gates 0.9/0.2/0.6
        ForwardTrace t = trace;
        t.probability = std::exp(-0.3);
        t.weights = {0.9, 0.2, 0.6};
        const SupervisionSets s = make_supervision({"r0"}, inst.kb);
        const LossBreakdown lb = total_loss(t, mem, 1, s, 0.5, 2.0);
        CHECK(lb.classification == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(lb.strong_supervision == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(lb.total == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(lb.total == lb.classification + lb.lambda * lb.strong_supervision);
    }
    SUBCASE("absent supervision") {
        const LossBreakdown lb = total_loss(trace, mem, 1, std::nullopt, 0.3, 1.0);
        CHECK(lb.strong_supervision == 0.0);
    }
    SUBCASE("negative lambda rejected") {
        CHECK_THROWS_AS(total_loss(trace, mem, 1, sup, 0.3, -1.0), std::invalid_argument);
    }
}

TEST_CASE("objective property suite") {
    const auto failure = props::objective_properties(250, 55);
    if (failure) FAIL(*failure);
}
