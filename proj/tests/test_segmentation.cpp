#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "privseg/geometry.hpp"
#include "privseg/measure.hpp"
#include "privseg/rng.hpp"
#include "privseg/segmentation.hpp"

using namespace privseg;

namespace {

const ValueGrid kGrid5({0.8, 2.0, 3.0, 4.2, 5.0});
const Market kX5({0.2, 0.1, 0.4, 0.2, 0.1});

}  // namespace

TEST_CASE("priced segmentation validates its structure") {
    using Part = PricedSegmentation::Part;
    Market a({0.7, 0.3}), b({0.2, 0.8});
    CHECK_NOTHROW(PricedSegmentation({Part{0.5, a, 0}, Part{0.5, b, 1}}));
    // Weights off by more than the mass tolerance.
    CHECK_THROWS_AS(PricedSegmentation({Part{0.5, a, 0}, Part{0.4, b, 1}}), std::invalid_argument);
    // Duplicate price rows and descending order are both rejected.
    CHECK_THROWS_AS(PricedSegmentation({Part{0.5, a, 1}, Part{0.5, b, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(PricedSegmentation({Part{0.5, a, 1}, Part{0.5, b, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(PricedSegmentation({Part{1.0, a, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(PricedSegmentation({}), std::invalid_argument);

    PricedSegmentation seg({Part{0.5, a, 0}, Part{0.5, b, 1}});
    std::vector<double> agg = seg.aggregate_mass();
    CHECK(agg[0] == Catch::Approx(0.45));
    CHECK(agg[1] == Catch::Approx(0.55));
}

TEST_CASE("first-degree segmentation extracts all surplus") {
    PricedSegmentation fd = first_degree(kGrid5, kX5);
    REQUIRE(fd.parts.size() == 5);
    for (std::size_t s = 0; s < 5; ++s) {
        CHECK(fd.parts[s].gamma == kX5[s]);
        CHECK(fd.parts[s].market[fd.parts[s].price_index] == 1.0);
    }
    SurplusPoint primed = primed_utilities(kGrid5, fd);
    CHECK(primed.consumer == Catch::Approx(0.0).margin(1e-15));
    CHECK(primed.producer == Catch::Approx(2.9).margin(1e-12));

    // Zero-mass levels are skipped.
    PricedSegmentation sparse = first_degree(ValueGrid({1.0, 2.0, 3.0}), Market({0.5, 0.0, 0.5}));
    REQUIRE(sparse.parts.size() == 2);
    CHECK(sparse.parts[0].price_index == 0);
    CHECK(sparse.parts[1].price_index == 2);
}

TEST_CASE("reconstruction inverts a single-row assignment") {
    ValueGrid g({0.6, 1.0});
    Market x({0.5, 0.5});
    std::vector<double> y = x.ccdf();
    std::vector<double> z(4, 0.0);
    z[zidx(0, 0, 2)] = y[0];
    z[zidx(0, 1, 2)] = y[1];
    PricedSegmentation seg = build_segmentation(z, g, x, 0.2);
    REQUIRE(seg.parts.size() == 1);
    CHECK(seg.parts[0].gamma == Catch::Approx(1.0));
    CHECK(seg.parts[0].price_index == 0);
    CHECK(seg.parts[0].market[0] == Catch::Approx(0.5));
    CHECK(seg.parts[0].market[1] == Catch::Approx(0.5));
}

TEST_CASE("reconstruction rejects assignments that violate the constraints") {
    ValueGrid g({0.6, 1.0});
    Market x({0.5, 0.5});
    std::vector<double> y = x.ccdf();
    CHECK_THROWS_AS(build_segmentation(std::vector<double>(3, 0.0), g, x, 0.2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_segmentation(std::vector<double>(4, 0.0), g, x, 0.2),
                    std::invalid_argument);  // aggregates to nothing

    // Row increasing.
    std::vector<double> bad{0.3, 0.6, 0.7, 0.4};  // z(0,1) > z(0,0)
    CHECK_THROWS_AS(build_segmentation(bad, g, x, 0.2), std::invalid_argument);

    // High-value share above t* = 0.625 in the low-price row.
    std::vector<double> off{1.0, 0.8, 0.0, 0.0};
    CHECK_THROWS_AS(build_segmentation(off, g, x, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build_segmentation(off, g, x, 1.0), std::invalid_argument);
}

TEST_CASE("sweep witnesses round-trip through explicit segmentations") {
    struct Case {
        ValueGrid grid;
        Market x;
        double beta;
    };
    std::vector<Case> cases{
        {ValueGrid({0.4, 1.0}), Market({0.5, 0.5}), 0.2},
        {ValueGrid({1.0, 2.0, 3.0}), Market({0.3, 0.3, 0.4}), 0.3},
        {ValueGrid({0.5, 1.1, 1.9, 3.0}), Market({0.25, 0.25, 0.25, 0.25}), 0.25},
    };
    for (const Case& c : cases) {
        PolytopeLP P = build_polytope(c.grid, c.x, c.beta);
        SurplusPolygon shadow = project_polygon(P);
        INFO("K=" << c.grid.size());
        for (std::size_t k = 0; k < shadow.size(); ++k) {
            const std::vector<double>& z = shadow.witnesses()[k];
            REQUIRE_FALSE(z.empty());
            PricedSegmentation seg = build_segmentation(z, c.grid, c.x, c.beta);

            std::vector<double> agg = seg.aggregate_mass();
            for (std::size_t j = 0; j < agg.size(); ++j)
                CHECK(agg[j] == Catch::Approx(c.x[j]).margin(1e-9));

            SurplusPoint direct = surplus_objective(P, z);
            SurplusPoint primed = primed_utilities(c.grid, seg);
            CHECK(primed.consumer == Catch::Approx(direct.consumer).margin(1e-9));
            CHECK(primed.producer == Catch::Approx(direct.producer).margin(1e-9));

            // Each reconstructed part really sits in its price's region.
            for (const PricedSegmentation::Part& part : seg.parts)
                CHECK(polytope_row_feasible(c.grid, c.beta, part.price_index,
                                            part.market.ccdf(), 1e-7));
        }
    }
}

TEST_CASE("merging same-price parts preserves weight and utilities") {
    ValueGrid g({0.6, 1.0});
    std::vector<Segmentation::Part> parts{{0.5, Market({0.8, 0.2})}, {0.5, Market({0.5, 0.5})}};
    PricedSegmentation merged = merge_to_canonical(parts, MergePolicy::lowest(), 0.0, g);
    REQUIRE(merged.parts.size() == 1);
    CHECK(merged.parts[0].price_index == 0);
    CHECK(merged.parts[0].gamma == Catch::Approx(1.0));
    CHECK(merged.parts[0].market[0] == Catch::Approx(0.65));

    // Idempotence: re-merging the canonical form changes nothing.
    std::vector<Segmentation::Part> again;
    for (const auto& p : merged.parts) again.push_back({p.gamma, p.market});
    PricedSegmentation twice = merge_to_canonical(again, MergePolicy::lowest(), 0.0, g);
    REQUIRE(twice.parts.size() == 1);
    CHECK(twice.parts[0].market[0] == Catch::Approx(merged.parts[0].market[0]));
}

TEST_CASE("split policy reproduces the tie-mixing closed form") {
    double v1 = 0.6, v2 = 1.0, beta = 0.2;
    double t = threshold_tstar(v1 / v2, beta);  // 0.625
    Market tied({1.0 - t, t});
    REQUIRE(optimal_price_set(ValueGrid({v1, v2}), beta, tied).size() == 2);
    ValueGrid g({v1, v2});
    SurplusPoint c = k2_shift_point(v1, v2, t, beta);

    for (double delta : {0.0, 0.3, 1.0}) {
        PricedSegmentation merged =
            merge_to_canonical({{1.0, tied}}, MergePolicy::split(delta), beta, g);
        SurplusPoint primed = primed_utilities(g, merged);
        SurplusPoint expect = k2_expected_utilities(t, delta, v1, v2, beta);
        CHECK(beta * c.consumer + (1.0 - beta) * primed.consumer ==
              Catch::Approx(expect.consumer).margin(1e-12));
        CHECK(beta * c.producer + (1.0 - beta) * primed.producer ==
              Catch::Approx(expect.producer).margin(1e-12));
    }
    CHECK_THROWS_AS(MergePolicy::split(1.5), std::invalid_argument);
}

TEST_CASE("priced merge requires every assignment to be optimal") {
    ValueGrid g({1.0, 2.0, 3.0});
    PricedSegmentation fd = first_degree(g, Market({0.3, 0.3, 0.4}));
    PricedSegmentation merged = merge_to_canonical(fd, 0.0, g);
    REQUIRE(merged.parts.size() == 3);
    SurplusPoint before = primed_utilities(g, fd), after = primed_utilities(g, merged);
    CHECK(after.consumer == Catch::Approx(before.consumer).margin(1e-12));
    CHECK(after.producer == Catch::Approx(before.producer).margin(1e-12));

    PricedSegmentation bad({{1.0, Market::point_mass(3, 0), 2}});
    CHECK_THROWS_AS(merge_to_canonical(bad, 0.0, g), std::invalid_argument);
}

TEST_CASE("two-level expected utilities branch at the threshold") {
    double v1 = 0.4, v2 = 1.0, beta = 0.2;
    double t = threshold_tstar(v1 / v2, beta);  // 0.375

    SurplusPoint low = k2_expected_utilities(0.2, 0.0, v1, v2, beta);
    CHECK(low.consumer == Catch::Approx((1.0 - beta + beta * t) * 0.2 * 0.6).margin(1e-15));
    CHECK(low.producer ==
          Catch::Approx((1.0 - beta + beta * t) * v1 + beta * (1.0 - t) * 0.2 * v2).margin(1e-15));

    SurplusPoint high = k2_expected_utilities(0.7, 0.0, v1, v2, beta);
    CHECK(high.consumer == Catch::Approx(beta * t * 0.7 * 0.6).margin(1e-15));
    CHECK(high.producer ==
          Catch::Approx(beta * t * v1 + (1.0 - beta + beta * (1.0 - t)) * 0.7 * v2).margin(1e-15));

    // delta interpolates the two branch limits at the tie.
    SurplusPoint at_low = k2_expected_utilities(t, 0.0, v1, v2, beta);
    SurplusPoint at_high = k2_expected_utilities(t, 1.0, v1, v2, beta);
    SurplusPoint mid = k2_expected_utilities(t, 0.25, v1, v2, beta);
    CHECK(mid.consumer == Catch::Approx(0.75 * at_low.consumer + 0.25 * at_high.consumer));
    CHECK(mid.producer == Catch::Approx(0.75 * at_low.producer + 0.25 * at_high.producer));

    // Continuity onto the branch from below.
    SurplusPoint near = k2_expected_utilities(t - 1e-9, 0.0, v1, v2, beta);
    CHECK(std::abs(near.consumer - at_low.consumer) <= 1e-8);
    CHECK(std::abs(near.producer - at_low.producer) <= 1e-8);

    // No masking: the segment is priced deterministically.
    SurplusPoint plain = k2_expected_utilities(0.2, 0.0, v1, v2, 0.0);
    CHECK(plain.consumer == Catch::Approx(0.2 * 0.6));
    CHECK(plain.producer == Catch::Approx(v1));

    CHECK_THROWS_AS(k2_expected_utilities(0.5, 0.0, v1, v2, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(k2_expected_utilities(1.5, 0.0, v1, v2, 0.2), std::invalid_argument);
}

TEST_CASE("weighted branch formulas match the mask decomposition") {
    // Sum of per-part closed forms equals beta*c(aggregate) + (1-beta)*primed.
    double v1 = 0.6, v2 = 1.0, beta = 0.3;
    ValueGrid g({v1, v2});
    double alphas[2] = {0.2, 0.9};
    double gammas[2] = {0.4, 0.6};
    double agg_alpha = gammas[0] * alphas[0] + gammas[1] * alphas[1];

    SurplusPoint sum;
    std::vector<PricedSegmentation::Part> parts;
    double t = threshold_tstar(v1 / v2, beta);
    for (int s = 0; s < 2; ++s) {
        SurplusPoint e = k2_expected_utilities(alphas[s], 0.0, v1, v2, beta);
        sum.consumer += gammas[s] * e.consumer;
        sum.producer += gammas[s] * e.producer;
        parts.push_back({gammas[s], Market({1.0 - alphas[s], alphas[s]}),
                         alphas[s] < t ? std::size_t{0} : std::size_t{1}});
    }
    SurplusPoint c = k2_shift_point(v1, v2, agg_alpha, beta);
    SurplusPoint primed = primed_utilities(g, PricedSegmentation(std::move(parts)));
    CHECK(sum.consumer == Catch::Approx(beta * c.consumer + (1.0 - beta) * primed.consumer)
                              .margin(1e-10));
    CHECK(sum.producer == Catch::Approx(beta * c.producer + (1.0 - beta) * primed.producer)
                              .margin(1e-10));
}
