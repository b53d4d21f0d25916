#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "privseg/geometry.hpp"
#include "privseg/measure.hpp"
#include "privseg/rng.hpp"

using namespace privseg;

namespace {

const ValueGrid kGrid5({0.8, 2.0, 3.0, 4.2, 5.0});
const Market kX5({0.2, 0.1, 0.4, 0.2, 0.1});

bool close(const SurplusPoint& a, const SurplusPoint& b, double tol = 1e-9) {
    return std::abs(a.consumer - b.consumer) <= tol && std::abs(a.producer - b.producer) <= tol;
}

}  // namespace

TEST_CASE("hull construction is counterclockwise and starts lexicographically smallest") {
    std::vector<SurplusPoint> pts{{1, 1}, {0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}, {0, 0}, {0.25, 0.5}};
    SurplusPolygon poly = SurplusPolygon::from_points(pts);
    REQUIRE(poly.size() == 4);
    CHECK(close(poly.vertices()[0], {0, 0}));
    CHECK(close(poly.vertices()[1], {1, 0}));
    CHECK(close(poly.vertices()[2], {1, 1}));
    CHECK(close(poly.vertices()[3], {0, 1}));
    for (const SurplusPoint& p : pts) CHECK(poly.contains(p));
    CHECK_FALSE(poly.contains({1.1, 0.5}));
    CHECK(poly.contains({1.0 + 5e-9, 0.5}));  // boundary tolerance
}

TEST_CASE("degenerate point sets keep one or two vertices") {
    SurplusPolygon one = SurplusPolygon::from_points({{2, 3}, {2, 3}, {2.0 + 1e-12, 3}});
    CHECK(one.size() == 1);
    CHECK(one.distance_to({2, 4}) == Catch::Approx(1.0));

    SurplusPolygon seg = SurplusPolygon::from_points({{0, 0}, {1, 1}, {0.5, 0.5}, {0.25, 0.25}});
    CHECK(seg.size() == 2);
    CHECK(seg.contains({0.75, 0.75}));
    CHECK(seg.distance_to({1, 0}) == Catch::Approx(std::sqrt(0.5)));

    CHECK_THROWS_AS(SurplusPolygon::from_points({}), std::invalid_argument);
}

TEST_CASE("near-collinear bulges below tolerance are pruned") {
    SurplusPolygon poly = SurplusPolygon::from_points(
        {{0, 0}, {1, 0}, {0.5, 1e-11}, {1, 1}, {0, 1}});
    CHECK(poly.size() == 4);
}

TEST_CASE("polygon distance, support values, and affine maps") {
    SurplusPolygon tri = SurplusPolygon::from_points({{0, 0}, {2, 0}, {0, 2}});
    CHECK(tri.distance_to({0.5, 0.5}) == 0.0);
    CHECK(tri.distance_to({3, 0}) == Catch::Approx(1.0));
    CHECK(tri.distance_to({2, 2}) == Catch::Approx(std::sqrt(2.0)));
    CHECK(tri.max_along(0, 1) == Catch::Approx(2.0));
    CHECK(tri.min_along(0, 1) == Catch::Approx(0.0));
    CHECK(tri.max_along(1, 1) == Catch::Approx(2.0));

    SurplusPolygon moved = tri.affine(0.5, {1, 1});
    CHECK(moved.max_along(0, 1) == Catch::Approx(2.0));
    CHECK(moved.min_along(1, 0) == Catch::Approx(1.0));
    CHECK(hausdorff(tri, tri) == 0.0);
    CHECK(hausdorff(tri, moved) > 0.0);
}

TEST_CASE("witnesses ride along dedup, hull order, and affine maps") {
    std::vector<SurplusPoint> pts{{0, 0}, {1, 0}, {0, 1}, {0, 0}};
    std::vector<std::vector<double>> wits{{1.0}, {2.0}, {3.0}, {4.0}};
    SurplusPolygon poly = SurplusPolygon::from_points(pts, wits);
    REQUIRE(poly.size() == 3);
    REQUIRE(poly.witnesses().size() == 3);
    // First occurrence of the duplicate vertex keeps its witness.
    CHECK(poly.witnesses()[0] == std::vector<double>{1.0});
    CHECK(poly.witnesses()[1] == std::vector<double>{2.0});
    CHECK(poly.witnesses()[2] == std::vector<double>{3.0});
    SurplusPolygon moved = poly.affine(2.0, {0.5, 0.5});
    CHECK(moved.witnesses() == poly.witnesses());

    CHECK_THROWS_AS(SurplusPolygon::from_points(pts, {{1.0}}), std::invalid_argument);
}

TEST_CASE("polytope has the advertised row and column structure") {
    PolytopeLP P = build_polytope(ValueGrid({1.0, 2.0, 3.0}), Market({0.3, 0.3, 0.4}), 0.25);
    std::size_t K = 3;
    CHECK(P.lp.n_vars == K * K);
    CHECK(P.lp.le_a.size() == K * (K - 1) + K + K * K);
    CHECK(P.lp.eq_a.size() == K);
    CHECK(P.consumer_map.size() == K * K);
    // Aggregation targets are the ccdf of the market.
    CHECK(P.lp.eq_b[0] == Catch::Approx(1.0));
    CHECK(P.lp.eq_b[1] == Catch::Approx(0.7));
    CHECK(P.lp.eq_b[2] == Catch::Approx(0.4));

    CHECK_THROWS_AS(build_polytope(ValueGrid({1.0, 2.0}), Market({0.5, 0.5}), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_polytope(ValueGrid({1.0, 2.0}), Market({0.3, 0.3, 0.4}), 0.2),
                    std::invalid_argument);
}

TEST_CASE("surplus objective evaluates frozen corner assignments") {
    PolytopeLP P = build_polytope(kGrid5, kX5, 0.0);
    std::size_t K = 5;
    std::vector<double> y = kX5.ccdf();

    // Everything in the lowest-price row: consumer gets all surplus above v_0.
    std::vector<double> z_low(K * K, 0.0);
    for (std::size_t j = 0; j < K; ++j) z_low[zidx(0, j, K)] = y[j];
    SurplusPoint low = surplus_objective(P, z_low);
    CHECK(low.consumer == Catch::Approx(2.1).margin(1e-12));
    CHECK(low.producer == Catch::Approx(0.8).margin(1e-12));

    // One point-mass row per level: full extraction.
    std::vector<double> z_fd(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j <= i; ++j) z_fd[zidx(i, j, K)] = kX5[i];
    SurplusPoint fd = surplus_objective(P, z_fd);
    CHECK(fd.consumer == Catch::Approx(0.0).margin(1e-12));
    CHECK(fd.producer == Catch::Approx(2.9).margin(1e-12));

    CHECK_THROWS_AS(surplus_objective(P, std::vector<double>(K, 0.0)), std::invalid_argument);
}

TEST_CASE("two-level sweep reproduces the closed-form triangle") {
    ValueGrid g({0.4, 1.0});
    Market x({0.5, 0.5});
    for (double beta : {0.0, 0.1, 0.2, 0.35, 0.5, 0.75}) {
        ShiftVector sv = shift_vector(g, x, beta, 100, 0);
        SurplusPolygon swept = surplus_set(g, x, beta, sv);
        SurplusPolygon closed = k2_theorem1_triangle(0.4, 1.0, 0.5, beta);
        INFO("beta=" << beta);
        CHECK(hausdorff(swept, closed) <= 1e-9);
    }
}

TEST_CASE("worked two-level instance hits its frozen vertices") {
    ValueGrid g({0.4, 1.0});
    Market x({0.5, 0.5});
    ShiftVector sv = shift_vector(g, x, 0.2, 100, 0);
    CHECK(close(sv.point, {0.1125, 0.4625}));
    SurplusPolygon S = surplus_set(g, x, 0.2, sv);
    REQUIRE(S.size() == 3);
    CHECK(close(S.vertices()[0], {0.0225, 0.4925}));
    CHECK(close(S.vertices()[1], {0.1665, 0.5085}));
    CHECK(close(S.vertices()[2], {0.0225, 0.6525}));

    // Every sweep vertex carries a feasible witness that maps back onto it.
    PolytopeLP P = build_polytope(g, x, 0.2);
    for (std::size_t k = 0; k < S.size(); ++k) {
        const std::vector<double>& z = S.witnesses()[k];
        REQUIRE(z.size() == 4);
        SurplusPoint back = surplus_objective(P, z);
        SurplusPoint mapped{0.2 * sv.point.consumer + 0.8 * back.consumer,
                            0.2 * sv.point.producer + 0.8 * back.producer};
        CHECK(close(mapped, S.vertices()[k], 1e-8));
    }
}

TEST_CASE("exact-arithmetic sweep agrees with the float sweep") {
    ValueGrid g({0.4, 1.0});
    Market x({0.3, 0.7});
    ShiftVector sv = shift_vector(g, x, 0.3, 100, 0);
    SweepOptions exact;
    exact.exact = true;
    SurplusPolygon a = surplus_set(g, x, 0.3, sv);
    SurplusPolygon b = surplus_set(g, x, 0.3, sv, exact);
    CHECK(hausdorff(a, b) <= 1e-9);
}

TEST_CASE("dominant-price mask rates collapse the sweep to a singleton") {
    // eta = 0.3: above beta = 0.6 only the high price survives anywhere.
    ValueGrid g({0.3, 1.0});
    Market x({0.5, 0.5});
    ShiftVector sv = shift_vector(g, x, 0.7, 100, 0);
    SurplusPolygon S = surplus_set(g, x, 0.7, sv);
    REQUIRE(S.size() == 1);
    CHECK(close(S.vertices()[0], {0.0, 0.5}));
    SurplusPolygon closed = k2_theorem1_triangle(0.3, 1.0, 0.5, 0.7);
    CHECK(hausdorff(S, closed) <= 1e-9);
}

TEST_CASE("boundary mask rate degenerates the triangle to a vertical segment") {
    ValueGrid g({0.3, 1.0});
    Market x({0.5, 0.5});
    double beta = 0.6;  // exactly 2*eta: t* = 0
    ShiftVector sv = shift_vector(g, x, beta, 100, 0);
    SurplusPolygon S = surplus_set(g, x, beta, sv);
    REQUIRE(S.size() == 2);
    CHECK(close(S.vertices()[0], {0.0, 0.5}));
    CHECK(close(S.vertices()[1], {0.0, 0.56}));
    CHECK(hausdorff(S, k2_theorem1_triangle(0.3, 1.0, 0.5, beta)) <= 1e-9);
}

TEST_CASE("full masking short-circuits to the shift point") {
    ValueGrid g({0.4, 1.0});
    Market x({0.5, 0.5});
    for (double beta : {1.0, 1.0 - 1e-13}) {
        ShiftVector sv = shift_vector(g, x, beta, 100, 0);
        SurplusPolygon S = surplus_set(g, x, beta, sv);
        REQUIRE(S.size() == 1);
        CHECK(S.vertices()[0].consumer == sv.point.consumer);
        CHECK(S.vertices()[0].producer == sv.point.producer);
    }
}

TEST_CASE("shadow triangle matches the shifted set after inverting the mask map") {
    // t* = 0.375 at eta = 0.4, beta = 0.2: exercise both branches and the seam.
    for (double alpha : {0.2, 0.375, 0.7, 0.0, 1.0}) {
        SurplusPoint c = k2_shift_point(0.4, 1.0, alpha, 0.2);
        SurplusPolygon sprime = k2_sprime_triangle(0.4, 1.0, alpha, 0.2);
        SurplusPolygon mapped = sprime.affine(0.8, {0.2 * c.consumer, 0.2 * c.producer});
        SurplusPolygon closed = k2_theorem1_triangle(0.4, 1.0, alpha, 0.2);
        INFO("alpha=" << alpha);
        CHECK(hausdorff(mapped, closed) <= 1e-12);
    }
    CHECK_THROWS_AS(k2_sprime_triangle(0.3, 1.0, 0.5, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(k2_sprime_triangle(1.0, 0.4, 0.5, 0.2), std::invalid_argument);
}

TEST_CASE("non-private reference triangle has the frozen corners") {
    SurplusPolygon tri = non_private_triangle(kGrid5, kX5);
    REQUIRE(tri.size() == 3);
    CHECK(close(tri.vertices()[0], {0.0, 2.1}));
    CHECK(close(tri.vertices()[1], {0.8, 2.1}));
    CHECK(close(tri.vertices()[2], {0.0, 2.9}));
}

TEST_CASE("random instances satisfy the global surplus bounds") {
    CounterRng rng(17, 0);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t K = 2 + static_cast<std::size_t>(trial % 3);
        std::vector<double> vals(K);
        double v = 0.0;
        for (double& x : vals) v = (x = v + 0.2 + rng.next_unit());
        ValueGrid grid(vals);
        Market x_star = sample_uniform_market(rng, K);
        double beta = 0.5 * rng.next_unit();
        ShiftVector sv = shift_vector(grid, x_star, beta, 200000, 7 + trial);
        SurplusPolygon S = surplus_set(grid, x_star, beta, sv);
        double ts = total_surplus(grid, x_star);

        for (const SurplusPoint& p : S.vertices()) {
            CHECK(p.consumer >= -1e-9);
            CHECK(p.producer >= -1e-9);
            CHECK(p.consumer + p.producer <= ts + 1e-9);
        }
        // The aggregate itself, priced at any posterior-optimal price, must land in S.
        for (std::size_t i : optimal_price_set(grid, beta, x_star)) {
            SurplusPoint pt{beta * sv.point.consumer +
                                (1.0 - beta) * consumer_utility(grid, x_star, i),
                            beta * sv.point.producer +
                                (1.0 - beta) * producer_utility(grid, x_star, i)};
            CHECK(S.distance_to(pt) <= 1e-7);
        }
    }
}

TEST_CASE("zero mask rate recovers the non-private triangle") {
    for (int trial = 0; trial < 4; ++trial) {
        CounterRng rng(23 + trial, 0);
        std::size_t K = 2 + static_cast<std::size_t>(trial);
        std::vector<double> vals(K);
        double v = 0.0;
        for (double& x : vals) v = (x = v + 0.3 + rng.next_unit());
        ValueGrid grid(vals);
        Market x_star = sample_uniform_market(rng, K);
        ShiftVector sv = shift_vector(grid, x_star, 0.0, 100, 0);
        SurplusPolygon S = surplus_set(grid, x_star, 0.0, sv);
        CHECK(hausdorff(S, non_private_triangle(grid, x_star)) <= 1e-9);
    }
}
