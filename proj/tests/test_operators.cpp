#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "plap/minimize.hpp"
#include "plap/operators.hpp"
#include "plap/rng.hpp"

using namespace plap;

namespace {

ProblemSpec basic_spec(GridPtr g, double p, double mu, double lambda, double cval,
                       double hval) {
    ProblemSpec s;
    s.grid = g;
    s.p = p;
    s.mu = mu;
    s.lambda = lambda;
    s.c = Field(g, cval);
    s.h = Field(g, hval);
    return s;
}

// Ad-hoc truncation data for operator-level tests: a constant negative
// lower field, far below the solutions the tests work with.
TruncationData shallow_trunc(const ProblemSpec& s, double level = -2.0) {
    Field ul(s.grid, level);
    return TruncationData::from_lower(ul, s.p, s.mu);
}

}  // namespace

TEST_CASE("energy anchors") {
    auto g = make_interval_grid(0, 1, 513);
    SECTION("all terms vanish") {
        auto s = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
        EnergyModel m(s, shallow_trunc(s));
        CHECK(energy(Field(g), m) == 0.0);
    }
    SECTION("I(0) = -(p-1)/(p mu) int h") {
        for (double p : {1.5, 2.0, 3.0}) {
            for (double mu : {0.5, 2.0}) {
                auto s = basic_spec(g, p, mu, 0.0, 1.0, 0.0);
                s.h = make_field(g, [](double x) { return 1.0 + std::sin(3 * x); });
                EnergyModel m(s, shallow_trunc(s));
                const double expect = -(p - 1.0) / (p * mu) * integrate(s.h);
                CHECK(energy(Field(g), m) == Catch::Approx(expect).epsilon(1e-12));
            }
        }
    }
    SECTION("Dirichlet energy of x(1-x) at p=2") {
        auto gf = make_interval_grid(0, 1, 2049);
        auto s = basic_spec(gf, 2.0, 1.0, 0.0, 1.0, 0.0);
        EnergyModel m(s, shallow_trunc(s));
        Field v = make_field(gf, [](double x) { return x * (1 - x); });
        CHECK(energy(v, m) == Catch::Approx(1.0 / 6.0).epsilon(1e-5));
    }
}

TEST_CASE("energy_gradient is the exact differential") {
    auto g = make_interval_grid(0, 1, 65);
    SECTION("global minimum at zero data") {
        auto s = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
        EnergyModel m(s, shallow_trunc(s));
        CHECK(energy_gradient(Field(g), m).max_abs() == 0.0);
    }
    SECTION("finite differences at random fields") {
        int checked = 0;
        for (double p : {1.5, 2.0, 3.0}) {
            auto s = basic_spec(g, p, 1.0, 0.7, 1.0, 0.0);
            s.h = make_field(g, [](double x) { return std::cos(2 * x); });
            EnergyModel m(s, shallow_trunc(s));
            for (int trial = 0; trial < 7; ++trial) {
                auto rng = make_rng(900 + trial);
                Field v = random_field(g, rng, 0.8);
                Field d = random_field(g, rng, 1.0);
                const double t = 1e-6;
                const double fd =
                    (energy(axpy(t, d, v), m) - energy(axpy(-t, d, v), m)) / (2 * t);
                Field gr = energy_gradient(v, m);
                double dot = 0.0;
                for (int i = 0; i < g->n; ++i) dot += gr.v[i] * d.v[i];
                CHECK(dot == Catch::Approx(fd).epsilon(1e-6).margin(1e-10));
                ++checked;
            }
        }
        CHECK(checked >= 20);
    }
    SECTION("fields touching the seam stay FD-consistent") {
        auto s = basic_spec(g, 2.0, 1.0, 1.0, 1.0, -1.0);
        TruncationData tr = shallow_trunc(s, -0.4);
        EnergyModel m(s, tr);
        // place nodes exactly at the seam
        Field v(g);
        for (int i = 1; i < g->n - 1; ++i)
            v.v[i] = (i % 3 == 0) ? tr.alpha_lambda.v[i] : -0.2;
        auto rng = make_rng(7);
        Field d = random_field(g, rng);
        const double t = 1e-6;
        const double fd = (energy(axpy(t, d, v), m) - energy(axpy(-t, d, v), m)) / (2 * t);
        Field gr = energy_gradient(v, m);
        double dot = 0.0;
        for (int i = 0; i < g->n; ++i) dot += gr.v[i] * d.v[i];
        CHECK(dot == Catch::Approx(fd).epsilon(2e-5).margin(1e-9));
    }
}

TEST_CASE("f_lambda / F_lambda seam behaviour") {
    auto g = make_interval_grid(0, 1, 33);
    auto s = basic_spec(g, 2.5, 1.3, 0.8, 1.0, 0.6);
    TruncationData tr = shallow_trunc(s, -0.5);
    const int i = 10;
    const double a = tr.alpha_lambda.v[i];
    SECTION("branches agree at the seam") {
        CHECK(f_lambda(i, a, s, tr) ==
              Catch::Approx(f_lambda(i, a - 1e-12, s, tr)).epsilon(1e-9));
    }
    SECTION("lambda=0, h=0 gives zero reaction above the seam") {
        auto s0 = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
        TruncationData tr0 = shallow_trunc(s0);
        CHECK(f_lambda(i, 0.7, s0, tr0) == 0.0);
        CHECK(f_lambda(i, tr0.alpha_lambda.v[i] + 0.1, s0, tr0) == 0.0);
    }
    SECTION("p=2 mu=1 lambda=1 c=1 h=0: f(e-1) = e") {
        auto s1 = basic_spec(g, 2.0, 1.0, 1.0, 1.0, 0.0);
        TruncationData tr1 = shallow_trunc(s1);
        CHECK(f_lambda(i, std::exp(1.0) - 1.0, s1, tr1) ==
              Catch::Approx(std::exp(1.0)).epsilon(1e-13));
    }
    SECTION("F is C1 across the seam: dF/ds == f by finite differences") {
        for (double seam_offset : {-0.3, 0.0, 0.25}) {
            const double sv = a + seam_offset;
            const double t = 1e-7;
            const double fd = (F_lambda(i, sv + t, s, tr) - F_lambda(i, sv - t, s, tr)) / (2 * t);
            CHECK(fd == Catch::Approx(f_lambda(i, sv, s, tr)).epsilon(1e-6).margin(1e-8));
        }
    }
    SECTION("F(x, 0) = (p-1)/(mu p) h at lambda = 0") {
        auto s0 = basic_spec(g, 2.5, 1.3, 0.0, 1.0, 0.6);
        TruncationData tr0 = shallow_trunc(s0);
        CHECK(F_lambda(i, 0.0, s0, tr0) ==
              Catch::Approx((s0.p - 1.0) / (s0.mu * s0.p) * s0.h.v[i]).epsilon(1e-13));
    }
    SECTION("affine growth below the seam") {
        const double d1 = F_lambda(i, a - 2.0, s, tr) - F_lambda(i, a - 1.0, s, tr);
        const double d2 = F_lambda(i, a - 5.0, s, tr) - F_lambda(i, a - 4.0, s, tr);
        CHECK(d1 == Catch::Approx(d2).epsilon(1e-12));
    }
    SECTION("dF/ds == f on random (x, s) pairs") {
        auto rng = make_rng(31);
        std::uniform_real_distribution<double> S(-1.2, 2.0);
        std::uniform_int_distribution<int> I(0, g->n - 1);
        for (int t = 0; t < 40; ++t) {
            const int j = I(rng);
            const double sv = S(rng);
            if (std::abs(sv - tr.alpha_lambda.v[j]) < 1e-5) continue;
            const double dt = 1e-6;
            const double fd =
                (F_lambda(j, sv + dt, s, tr) - F_lambda(j, sv - dt, s, tr)) / (2 * dt);
            CHECK(fd == Catch::Approx(f_lambda(j, sv, s, tr)).epsilon(1e-6).margin(1e-9));
        }
    }
}

TEST_CASE("residual_P: manufactured solutions") {
    SECTION("zero everything") {
        auto g = make_interval_grid(0, 1, 65);
        auto s = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
        CHECK(residual_P(Field(g), s).max_abs() == 0.0);
    }
    SECTION("p=2, mu=1, manufactured h") {
        // u* = A sin(pi x): h = -u*'' - mu (u*')^2 with lambda = 0
        const double A = 0.3;
        double prev = 0.0;
        for (int n : {65, 129, 257}) {
            auto g = make_interval_grid(0, 1, n);
            auto s = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
            s.h = make_field(g, [A](double x) {
                const double sp = M_PI * std::cos(M_PI * x);
                return A * M_PI * M_PI * std::sin(M_PI * x) - A * A * sp * sp;
            });
            Field u = make_field(g, [A](double x) { return A * std::sin(M_PI * x); });
            const double r = sup_norm_free(residual_P(u, s));
            if (prev > 0) CHECK(prev / r > 3.4);  // second order
            prev = r;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("residual_general: verification problems") {
    SECTION("radial p=4 pair from the 2-ball") {
        // -Delta_4 u = |grad u|^2 admits u = (R^2 - r^2)/8 alongside 0
        double prev = 0.0;
        for (int n : {129, 257, 513}) {
            auto g = make_radial_grid(1.0, 2, n);
            GeneralQuasilinearProblem prob;
            prob.H_term = [](double, double, double xi) { return -xi * xi; };
            prob.f_rhs = Field(g);
            Field u = make_field(g, [](double r) { return (1.0 - r * r) / 8.0; });
            const double r = sup_norm_free(residual_general(u, prob, 4.0));
            if (prev > 0) CHECK(prev / r > 1.8);
            prev = r;
            CHECK(sup_norm_free(residual_general(Field(g), prob, 4.0)) == 0.0);
        }
    }
    SECTION("H = 0, classical Poisson MMS") {
        double prev = 0.0;
        for (int n : {65, 129, 257}) {
            auto g = make_interval_grid(0, 1, n);
            GeneralQuasilinearProblem prob;
            prob.H_term = [](double, double, double) { return 0.0; };
            prob.f_rhs = make_field(g, [](double x) {
                return M_PI * M_PI * std::sin(M_PI * x);
            });
            Field u = make_field(g, [](double x) { return std::sin(M_PI * x); });
            const double r = sup_norm_free(residual_general(u, prob, 2.0));
            if (prev > 0) CHECK(prev / r > 3.4);
            prev = r;
        }
    }
}

TEST_CASE("jacobian properties") {
    auto g = make_interval_grid(0, 1, 49);
    auto s = basic_spec(g, 3.0, 1.0, 0.5, 1.0, -0.4);
    EnergyModel m(s, shallow_trunc(s));
    auto rng = make_rng(55);
    Field v = random_field(g, rng, 0.7);

    SECTION("p=2 Jacobian does not depend on the regularization") {
        auto s2 = basic_spec(g, 2.0, 1.0, 0.0, 1.0, 0.0);
        EnergyModel ma(s2, shallow_trunc(s2), 0.0);
        EnergyModel mb(s2, shallow_trunc(s2), 1e-4);
        TriDiag Ja = jacobian(v, ma), Jb = jacobian(v, mb);
        for (int i = 0; i < Ja.size(); ++i)
            CHECK(Ja.d[i] == Catch::Approx(Jb.d[i]).epsilon(1e-14));
    }
    SECTION("symmetry") {
        TriDiag J = jacobian(v, m);
        auto rngx = make_rng(77);
        std::uniform_real_distribution<double> U(-1, 1);
        std::vector<double> x(J.size()), y(J.size());
        for (auto& t : x) t = U(rngx);
        for (auto& t : y) t = U(rngx);
        auto Jx = J.apply(x), Jy = J.apply(y);
        double a = 0, b = 0;
        for (int i = 0; i < J.size(); ++i) {
            a += Jx[i] * y[i];
            b += Jy[i] * x[i];
        }
        CHECK(a == Catch::Approx(b).epsilon(1e-13));
    }
    SECTION("finite-difference check against energy_gradient") {
        EnergyModel me(s, shallow_trunc(s), 1e-6);
        TriDiag J = jacobian(v, me);
        auto rngd = make_rng(78);
        Field d = random_field(g, rngd);
        const double t = 1e-6;
        Field gp = energy_gradient(axpy(t, d, v), me);
        Field gm = energy_gradient(axpy(-t, d, v), me);
        std::vector<double> dwin(J.size());
        for (int w = 0; w < J.size(); ++w) dwin[w] = d.v[g->first_free() + w];
        auto Jd = J.apply(dwin);
        double scale = 0.0;
        for (double x : Jd) scale = std::max(scale, std::abs(x));
        for (int w = 0; w < J.size(); ++w) {
            const int i = g->first_free() + w;
            const double fd = (gp.v[i] - gm.v[i]) / (2 * t);
            CHECK(Jd[w] == Catch::Approx(fd).margin(1e-4 * scale));
        }
    }
}

TEST_CASE("equivalence of formulations at a converged solution") {
    // lambda = 0, h = -1, p = 2: solve (Q_0), transform back, and compare the
    // strong residuals of both formulations across two meshes.
    double prev_p = 0.0;
    for (int n : {129, 257}) {
        auto g = make_interval_grid(0, 1, n);
        auto s = basic_spec(g, 2.0, 1.0, 0.0, 1.0, -1.0);
        EnergyModel m(s, shallow_trunc(s, -2.0));
        SolveOptions opt;
        opt.grad_tol = 1e-12;
        SolveReport rep = newton_minimize(g, s.p, m.reaction, Field(g), opt);
        REQUIRE(rep.ok());
        const Field& v = rep.solution;
        CHECK(v.min_value() > m.trunc.alpha_lambda.min_value() - 1e-8);
        Field u = hopf_cole_inv(v, s.p, s.mu);
        const double rp = sup_norm_free(residual_P(u, s));
        const double rq = sup_norm_free(residual_Q(v, m));
        CHECK(rp <= 10.0 * std::max(rq, 1e-14));
        CHECK(rp <= 5.0 * g->dx);  // C * mesh_size
        if (prev_p > 0) CHECK(prev_p / rp > 1.8);
        prev_p = rp;
    }
}
