#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "plap/grid.hpp"
#include "plap/rng.hpp"

using namespace plap;

TEST_CASE("make_grid: uniform interval") {
    auto g = make_interval_grid(0.0, 1.0, 5);
    REQUIRE(g->n == 5);
    const double expect[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) CHECK(g->nodes[i] == Catch::Approx(expect[i]));
    CHECK(g->domain_measure() == Catch::Approx(1.0));

    auto g2 = make_interval_grid(0.0, 2.0, 9);
    for (int c = 0; c < g2->cells(); ++c)
        CHECK(g2->nodes[c + 1] - g2->nodes[c] == Catch::Approx(0.25));
}

TEST_CASE("make_grid: radial measure") {
    auto g = make_radial_grid(1.0, 2, 5);
    CHECK(g->domain_measure() == Catch::Approx(0.5).epsilon(1e-14));  // int_0^1 r dr
    CHECK_FALSE(g->dirichlet_left);
    for (double w : g->cell_w) CHECK(w > 0.0);

    auto g3 = make_radial_grid(2.0, 3, 9);  // int_0^2 r^2 dr = 8/3
    CHECK(g3->domain_measure() == Catch::Approx(8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("make_grid: rejects bad input") {
    CHECK_THROWS_AS(make_interval_grid(0, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_interval_grid(1, 0, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_radial_grid(-1.0, 2, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_radial_grid(1.0, 1, 8), std::invalid_argument);
}

TEST_CASE("norm_W1p: anchors") {
    SECTION("zero field") {
        auto g = make_interval_grid(0, 1, 17);
        Field f(g);
        CHECK(norm_W1p(f, 2.0) == 0.0);
    }
    SECTION("x(1-x), p=2 -> sqrt(1/3) mesh-converged") {
        auto g = make_interval_grid(0, 1, 4097);
        Field f = make_field(g, [](double x) { return x * (1 - x); });
        CHECK(norm_W1p(f, 2.0) == Catch::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-6));
    }
    SECTION("homogeneity under scaling") {
        auto g = make_interval_grid(0, 1, 33);
        auto rng = make_rng(7);
        Field f = random_field(g, rng);
        CHECK(norm_W1p(scaled(f, 3.0), 2.0) ==
              Catch::Approx(3.0 * norm_W1p(f, 2.0)).epsilon(1e-13));
    }
    SECTION("p <= 1 rejected") {
        auto g = make_interval_grid(0, 1, 8);
        CHECK_THROWS_AS(norm_W1p(Field(g), 1.0), std::invalid_argument);
    }
}

TEST_CASE("norm_Lq: anchors") {
    auto g = make_interval_grid(0, 1, 65);
    SECTION("constant one, q=2") {
        Field f(g, 1.0);
        CHECK(norm_Lq(f, 2.0) == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("constant one on radial(1,2), q=1") {
        auto gr = make_radial_grid(1.0, 2, 65);
        Field f(gr, 1.0);
        CHECK(norm_Lq(f, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
    }
    SECTION("f(x)=x, q=inf") {
        Field f = make_field(g, [](double x) { return x; });
        CHECK(norm_Lq(f, std::numeric_limits<double>::infinity()) == 1.0);
    }
    SECTION("q < 1 rejected") {
        CHECK_THROWS_AS(norm_Lq(Field(g), 0.5), std::invalid_argument);
    }
}

TEST_CASE("quadrature converges at order >= 2 on smooth data") {
    // Richardson check on three resolutions for int_0^1 sin(pi x) = 2/pi
    const double exact = 2.0 / M_PI;
    double err[3];
    int idx = 0;
    for (int n : {33, 65, 129}) {
        auto g = make_interval_grid(0, 1, n);
        Field f = make_field(g, [](double x) { return std::sin(M_PI * x); });
        err[idx++] = std::abs(integrate(f) - exact);
    }
    CHECK(err[0] / err[1] > 3.5);
    CHECK(err[1] / err[2] > 3.5);
}

TEST_CASE("norm_W1p triangle inequality on random pairs") {
    auto g = make_interval_grid(0, 1, 41);
    for (int trial = 0; trial < 30; ++trial) {
        auto rng = make_rng(100 + trial);
        Field f = random_field(g, rng), h = random_field(g, rng);
        for (double p : {1.5, 2.0, 3.0}) {
            const double lhs = norm_W1p(axpy(1.0, f, h), p);
            CHECK(lhs <= norm_W1p(f, p) + norm_W1p(h, p) + 1e-12);
        }
    }
}

TEST_CASE("radial grid with constant factor matches interval (regression)") {
    // Formally N = 1 makes the radial weight constant; built directly since
    // make_grid rejects N < 2.
    const int n = 33;
    auto gi = make_interval_grid(0.0, 1.0, n);
    Grid graw = *make_radial_grid(1.0, 2, n);
    graw.dim = 1;
    for (int c = 0; c < graw.cells(); ++c) {
        graw.cell_w[c] = graw.dx;
        graw.cell_rho[c] = 1.0;
        graw.cell_theta[c] = 0.5;
        graw.cell_x[c] = 0.5 * (graw.nodes[c] + graw.nodes[c + 1]);
    }
    for (int i = 0; i < n; ++i) graw.cv[i] = graw.dx;
    graw.cv.front() = graw.cv.back() = 0.5 * graw.dx;
    auto gr = std::make_shared<const Grid>(graw);

    Field fi = make_field(gi, [](double x) { return x * x * (1 - x); });
    Field fr(gr, fi.v);
    CHECK(integrate(fr) == Catch::Approx(integrate(fi)).epsilon(1e-14));
    CHECK(norm_W1p(fr, 2.5) == Catch::Approx(norm_W1p(fi, 2.5)).epsilon(1e-14));
    CHECK(norm_Lq(fr, 3.0) == Catch::Approx(norm_Lq(fi, 3.0)).epsilon(1e-14));
}

TEST_CASE("field invariants") {
    auto g = make_interval_grid(0, 1, 9);
    Field f(g, 1.0);
    CHECK_FALSE(f.dirichlet_ok());
    f.enforce_dirichlet();
    CHECK(f.dirichlet_ok());
    CHECK(f.finite());
    f.v[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(f.finite());
}
