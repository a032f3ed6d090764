// Scalar quantities governing existence: the first eigenvalue gamma_1 of
// -Delta_p u = gamma c |u|^{p-2} u, the infimum m_p, the constrained
// variants m_{p,lambda}^{+/-}, the threshold k_0, and the sufficient -
// condition checker built on discrete Sobolev constants.
//
// All infima are computed on the unit sphere of the W^{1,p} seminorm by
// inverse-power outer iterations (each step one convex p-Poisson-type solve,
// a preconditioned descent on the quotient) with Rayleigh updates and
// seeded random restarts run in parallel.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/minimize.hpp"
#include "plap/operators.hpp"
#include "plap/parallel.hpp"
#include "plap/problem.hpp"
#include "plap/rng.hpp"

namespace plap {

struct SpectralReport {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool plus_infinity = false;  // empty admissible set W_lambda
    Field minimizer;
    int iterations = 0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::string constraint_active;  // description of the W_lambda restriction
    std::uint64_t seed = 0;
};

namespace detail {

// Normalize to unit W^{1,p} seminorm.
inline bool normalize_W1p(Field& w, double p) {
    const double n = norm_W1p(w, p);
    if (!(n > 0.0) || !std::isfinite(n)) return false;
    for (double& x : w.v) x /= n;
    return true;
}

// Weighted p-mass: int weight |w|^p with midpoint quadrature.
inline double weighted_pmass(const Field& w, const Field& weight, double p) {
    const Grid& g = *w.grid;
    double s = 0.0;
    for (int c = 0; c < g.cells(); ++c)
        s += g.cell_w[c] * cell_mid(weight, c) * std::pow(std::abs(cell_mid(w, c)), p);
    return s;
}

struct RayleighProblem {
    GridPtr grid;
    double p;
    Field weight;                 // B(w) = int weight |w|^p
    std::vector<char> zero_mask;  // dofs forced to zero (constraint set)
    bool maximize = false;        // maximize B on the sphere instead of min

    bool masked(int i) const { return !zero_mask.empty() && zero_mask[i]; }
};

inline void apply_mask(Field& w, const RayleighProblem& rp) {
    if (rp.zero_mask.empty()) return;
    for (int i = 0; i < w.size(); ++i)
        if (rp.zero_mask[i]) w.v[i] = 0.0;
}

// One inverse-power step: solve the convex problem
//   -Delta_p z = sigma * weight * phi_p(w_k)   (sigma = +-1)
// then renormalize. Masked dofs stay pinned at zero. The Newton solve is
// warm-started from the amplitude-corrected p = 2 solution of the same
// right-hand side.
inline std::optional<Field> inverse_power_step(const RayleighProblem& rp,
                                               const Field& w, double sigma,
                                               const SolveOptions& opt) {
    const Grid& g = *rp.grid;
    LinearDatumReaction r;
    r.rho.resize(g.cells());
    for (int c = 0; c < g.cells(); ++c)
        r.rho[c] = sigma * cell_mid(rp.weight, c) * phi_p(cell_mid(w, c), rp.p);
    Box box;
    const bool use_box = !rp.zero_mask.empty();
    if (use_box) {
        box.lo = Field(rp.grid, -1e30);
        box.hi = Field(rp.grid, 1e30);
        for (int i = 0; i < g.n; ++i)
            if (rp.zero_mask[i]) box.lo.v[i] = box.hi.v[i] = 0.0;
    }
    // p = 2 solution of the same datum (one tridiagonal solve)
    Field start(rp.grid);
    {
        TriDiag J = jacobian_of(g, 2.0, r, start.v, 0.0);
        const int lo = g.first_free(), m = g.free_count();
        std::vector<double> grad;
        gradient_of(g, 2.0, r, start.v, grad);
        std::vector<double> rhs(m);
        for (int k = 0; k < m; ++k) rhs[k] = -grad[lo + k];
        if (use_box)
            for (int k = 0; k < m; ++k)
                if (rp.zero_mask[lo + k]) pin_dof(J, rhs, k);
        LDLT fac = LDLT::factor(J);
        if (!fac.singular) {
            fac.solve(rhs);
            for (int k = 0; k < m; ++k) start.v[lo + k] = rhs[k];
        }
        if (rp.p != 2.0) {
            const double amp = start.max_abs();
            if (amp > 0)
                for (double& x : start.v)
                    x *= std::pow(amp, (2.0 - rp.p) / (rp.p - 1.0));
        }
    }
    SolveReport rep = minimize_then_polish(rp.grid, rp.p, r, start, opt,
                                           use_box ? &box : nullptr);
    if (!rep.ok() && rep.grad_norm > 1e-6) return std::nullopt;
    Field z = rep.solution;
    apply_mask(z, rp);
    if (!normalize_W1p(z, rp.p)) return std::nullopt;
    return z;
}

// Monotone ascent on the degree-0 ratio R(v) = int weight |v|^p / ||v||^p
// (equivalently: projected gradient on the unit sphere of ||.||), with
// renormalized iterates. Returns the number of iterations spent.
inline int ratio_ascent(const RayleighProblem& rp, Field& w, double& q,
                        int max_iter) {
    const Grid& g = *rp.grid;
    const double p = rp.p;
    std::vector<double> dDen;
    double eta = 0.1;
    int it = 0;
    ZeroReaction zero;
    for (; it < max_iter; ++it) {
        // numerator and denominator gradients at the unit-norm iterate
        Field dNum(rp.grid);
        for (int c = 0; c < g.cells(); ++c) {
            const double mid = cell_mid(w, c);
            const double t = 0.5 * g.cell_w[c] * cell_mid(rp.weight, c) * p *
                             phi_p(mid, p);
            dNum.v[c] += t;
            dNum.v[c + 1] += t;
        }
        gradient_of(g, p, zero, w.v, dDen);  // = grad of ||v||^p / p
        Field dir(rp.grid);
        double gnorm = 0.0;
        for (int i = 0; i < g.n; ++i) {
            if (g.is_dirichlet(i) || rp.masked(i)) continue;
            dir.v[i] = dNum.v[i] - q * p * dDen[i];
            gnorm = std::max(gnorm, std::abs(dir.v[i]));
        }
        if (gnorm < 1e-14 * (1.0 + std::abs(q))) break;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Field cand = axpy(eta, dir, w);
            apply_mask(cand, rp);
            cand.enforce_dirichlet();
            const double den = norm_W1p(cand, p);
            if (den > 0.0) {
                for (double& x : cand.v) x /= den;
                const double qc = weighted_pmass(cand, rp.weight, p);
                if (qc > q + 1e-16 * std::abs(q)) {
                    w = cand;
                    q = qc;
                    eta *= 1.5;
                    accepted = true;
                    break;
                }
            }
            eta *= 0.25;
        }
        if (!accepted) break;
    }
    return it;
}

// Maximize (or, for the trivial zero weight, evaluate) int weight |w|^p on
// the unit sphere: monotone ratio ascent as the workhorse, inverse-power
// steps accepted whenever they improve the quotient.
inline SpectralReport sphere_extremize(const RayleighProblem& rp, int restarts,
                                       std::uint64_t seed, int threads = 0) {
    const Grid& g = *rp.grid;
    SpectralReport best;
    best.seed = seed;
    const double sgn = rp.maximize ? 1.0 : -1.0;

    std::vector<SpectralReport> results(restarts);
    parallel_for_indexed(restarts, threads, [&](int r) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(r));
        Field w = random_field(rp.grid, rng, 1.0, 4 + (r % 5));
        if (r == 0)
            w = make_field(rp.grid, [&](double x) {
                const double t = (x - g.a) / (g.b - g.a);
                return std::sin(M_PI * t);
            });
        if (r == 1) {
            // seed on the positive part of the weight
            w = rp.weight;
            for (double& x : w.v) x = std::max(x, 0.0);
        }
        apply_mask(w, rp);
        w.enforce_dirichlet();
        if (!normalize_W1p(w, rp.p)) return;

        SolveOptions opt;
        opt.grad_tol = 1e-11;
        opt.max_iter = 200;
        double q = weighted_pmass(w, rp.weight, rp.p);
        int it = 0;
        if (rp.maximize) {
            for (int round = 0; round < 60; ++round) {
                it += ratio_ascent(rp, w, q, 200);
                auto z = inverse_power_step(rp, w, 1.0, opt);
                ++it;
                if (!z) break;
                const double qz = weighted_pmass(*z, rp.weight, rp.p);
                if (qz > q + 1e-15 * (1.0 + std::abs(q))) {
                    w = *z;
                    q = qz;
                } else {
                    break;
                }
            }
            it += ratio_ascent(rp, w, q, 200);
        }
        SpectralReport rep;
        rep.value = q;
        rep.minimizer = w;
        rep.iterations = it;
        rep.converged = true;
        results[r] = rep;
    });

    for (const auto& rep : results) {
        if (!rep.converged) continue;
        if (!best.converged || sgn * (rep.value - best.value) > 0) {
            best = rep;
            best.seed = seed;
        }
    }
    return best;
}

// KKT residual of the quotient problem at the reported minimizer:
// || -Delta_p w - theta * weight * phi_p(w) || on free dofs, weak form.
inline double quotient_residual(const RayleighProblem& rp, const Field& w,
                                double theta) {
    const Grid& g = *rp.grid;
    SemilinearReaction r;
    r.p = rp.p;
    r.theta = theta;
    r.cbar.resize(g.cells());
    r.rho.assign(g.cells(), 0.0);
    for (int c = 0; c < g.cells(); ++c) r.cbar[c] = cell_mid(rp.weight, c);
    std::vector<double> grad;
    gradient_of(g, rp.p, r, w.v, grad);
    double m = 0.0;
    for (int i = g.first_free(); i <= g.last_free(); ++i)
        if (!rp.masked(i)) m = std::max(m, std::abs(grad[i]));
    return m;
}

}  // namespace detail

// First eigenvalue of -Delta_p u = gamma c |u|^{p-2} u.
inline SpectralReport gamma1(const Field& c, double p, const GridPtr& grid,
                             std::uint64_t seed = 1, int restarts = 20,
                             int threads = 0) {
    double cmax = 0.0;
    for (double x : c.v) {
        if (x < 0) throw std::invalid_argument("gamma1: c must be >= 0");
        cmax = std::max(cmax, x);
    }
    if (!(cmax > 0)) throw std::invalid_argument("gamma1: c must not vanish");
    detail::RayleighProblem rp{grid, p, c, {}, true};  // maximize int c|w|^p
    SpectralReport rep = detail::sphere_extremize(rp, restarts, seed, threads);
    if (!rep.converged || !(rep.value > 0)) {
        rep.converged = false;
        return rep;
    }
    const double B = rep.value;  // sup int c |w|^p over the unit sphere
    rep.value = 1.0 / B;         // gamma_1
    // fix the sign: the ground state can be chosen positive
    double s = 0.0;
    for (double x : rep.minimizer.v) s += x;
    if (s < 0)
        for (double& x : rep.minimizer.v) x = -x;
    rep.residual = detail::quotient_residual(rp, rep.minimizer, rep.value);
    return rep;
}

// m_p = inf { int |grad w|^p - (mu/(p-1))^{p-1} h |w|^p : ||w|| = 1 }
//     = 1 - (mu/(p-1))^{p-1} * sup { int h |w|^p : ||w|| = 1 }.
inline SpectralReport m_p(const Field& h, double p, double mu, const GridPtr& grid,
                          std::uint64_t seed = 1, int restarts = 20,
                          int threads = 0) {
    const double kappa = std::pow(mu / (p - 1.0), p - 1.0);
    detail::RayleighProblem rp{grid, p, h, {}, true};
    SpectralReport rep = detail::sphere_extremize(rp, restarts, seed, threads);
    const double B = rep.value;
    rep.value = 1.0 - kappa * B;
    rep.residual = detail::quotient_residual(rp, rep.minimizer,
                                             B == 0.0 ? 0.0 : 1.0 / B);
    return rep;
}

// Constrained variants on W_lambda = {w : lambda c w = 0 a.e., ||w|| = 1};
// the support of c is detected as c > 1e-14 * max c.
inline std::pair<SpectralReport, SpectralReport> m_p_lambda_pm(
    const ProblemSpec& spec, std::uint64_t seed = 1, int restarts = 20,
    int threads = 0) {
    const GridPtr& grid = spec.grid;
    const Grid& g = *grid;
    const double p = spec.p;

    std::vector<char> mask;
    std::string constraint = "W_0 = W_0^{1,p} (lambda = 0, unconstrained)";
    if (spec.lambda != 0.0) {
        mask.assign(g.n, 0);
        double cmax = 0.0;
        for (double x : spec.c.v) cmax = std::max(cmax, x);
        int free_left = 0;
        for (int i = 0; i < g.n; ++i) {
            if (spec.c.v[i] > 1e-14 * cmax) mask[i] = 1;
            else if (!g.is_dirichlet(i)) ++free_left;
        }
        constraint = "w = 0 on {c > 0} (" + std::to_string(free_left) +
                     " free dofs)";
        if (free_left == 0) {
            SpectralReport inf_rep;
            inf_rep.plus_infinity = true;
            inf_rep.converged = true;
            inf_rep.constraint_active = "W_lambda = empty set";
            inf_rep.seed = seed;
            return {inf_rep, inf_rep};
        }
    }

    auto run = [&](double mu_bound, std::uint64_t stream) {
        SpectralReport rep;
        if (mu_bound <= 0.0) {
            // the perturbation term vanishes; the infimum is the norm itself
            detail::RayleighProblem rp{grid, p, Field(grid, 0.0), mask, true};
            rep = detail::sphere_extremize(rp, 2, mix_seed(seed, stream), threads);
            rep.value = 1.0;
        } else {
            const double kappa = std::pow(mu_bound / (p - 1.0), p - 1.0);
            detail::RayleighProblem rp{grid, p, spec.h, mask, true};
            rep = detail::sphere_extremize(rp, restarts, mix_seed(seed, stream),
                                           threads);
            rep.value = 1.0 - kappa * rep.value;
        }
        rep.constraint_active = constraint;
        rep.seed = seed;
        return rep;
    };
    return {run(spec.mu_plus, 11), run(spec.mu_minus, 13)};
}

// k_0 = sup { k >= 0 : m_p(k h) > 0 } = ((p-1)/mu)^{p-1} gamma_1^{(h)};
// +infinity when h+ vanishes. Falls back to bisection on the sign of
// m_p(k h) if the weighted eigenvalue solve degenerates.
inline SpectralReport k0(const Field& h, double p, double mu, const GridPtr& grid,
                         std::uint64_t seed = 1, int restarts = 20,
                         int threads = 0) {
    SpectralReport rep;
    rep.seed = seed;
    double hplus = 0.0;
    for (double x : h.v) hplus = std::max(hplus, x);
    if (!(hplus > 0.0)) {
        rep.plus_infinity = true;
        rep.converged = true;
        return rep;
    }
    const double kappa_inv = std::pow((p - 1.0) / mu, p - 1.0);
    detail::RayleighProblem rp{grid, p, h, {}, true};
    SpectralReport sup_rep = detail::sphere_extremize(rp, restarts, seed, threads);
    if (sup_rep.converged && sup_rep.value > 0.0) {
        rep = sup_rep;
        rep.value = kappa_inv / sup_rep.value;
        rep.converged = true;
        return rep;
    }
    // degenerate weight: bisection on sign of m_p(k h)
    double lo = 0.0, hi = 1.0;
    auto mp_at = [&](double k) {
        Field kh = scaled(h, k);
        return m_p(kh, p, mu, grid, seed, 8, threads).value;
    };
    while (mp_at(hi) > 0 && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mp_at(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    rep.value = 0.5 * (lo + hi);
    rep.converged = true;
    rep.constraint_active = "bisection fallback";
    return rep;
}

// Sufficient conditions for m_p > 0 via the discrete Sobolev constants.
struct SufficientReport {
    bool supported = false;
    bool holds = false;
    double margin = std::numeric_limits<double>::quiet_NaN();
    double sobolev_constant = std::numeric_limits<double>::quiet_NaN();
    double lhs = std::numeric_limits<double>::quiet_NaN();
    std::string which_case;
};

namespace detail {

// S = inf ||grad u||_p^p / ||u||_t^p, by normalized descent on the quotient.
inline double sobolev_constant_qnorm(const GridPtr& grid, double p, double t,
                                     std::uint64_t seed) {
    const Grid& g = *grid;
    auto quotient = [&](const Field& u) {
        const double num = std::pow(norm_W1p(u, p), p);
        const double den = std::pow(norm_Lq(u, t), p);
        return num / den;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < 8; ++r) {
        auto rng = make_rng(seed, 1000 + r);
        Field u = (r == 0) ? make_field(grid, [&](double x) {
            const double tt = (x - g.a) / (g.b - g.a);
            return std::sin(M_PI * tt);
        })
                           : random_field(grid, rng);
        u.enforce_dirichlet();
        if (norm_W1p(u, p) == 0.0) continue;
        double q = quotient(u);
        double step = 0.5;
        std::vector<double> grad;
        for (int it = 0; it < 4000 && step > 1e-12; ++it) {
            // numerator gradient minus q * denominator gradient, both exact
            const double tnorm = norm_Lq(u, t);
            Field dQ(grid);
            ZeroReaction zr;
            gradient_of(g, p, zr, u.v, dQ.v);  // d/du of ||grad u||_p^p / p
            for (double& x : dQ.v) x *= p;
            // d/du of ||u||_t^p = p ||u||_t^{p-t} * (cellwise |u|^{t-1} sgn)
            Field dD(grid);
            for (int c = 0; c < g.cells(); ++c) {
                const double mid = cell_mid(u, c);
                const double w = g.cell_w[c] * phi_p(mid, t) * 0.5;
                dD.v[c] += w;
                dD.v[c + 1] += w;
            }
            const double fac = p * std::pow(tnorm, p - t);
            for (double& x : dD.v) x *= fac;
            Field dir(grid);
            const double den = std::pow(tnorm, p);
            for (int i = 0; i < g.n; ++i)
                dir.v[i] = -(dQ.v[i] - q * dD.v[i]) / den;
            dir.enforce_dirichlet();
            Field cand = axpy(step, dir, u);
            cand.enforce_dirichlet();
            if (norm_W1p(cand, p) == 0.0) {
                step *= 0.5;
                continue;
            }
            const double qc = quotient(cand);
            if (qc < q - 1e-15 * std::abs(q)) {
                u = cand;
                q = qc;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        best = std::min(best, q);
    }
    return best;
}

// S = inf { ||grad u||_p^p : ||u||_inf = 1 }: pin each candidate peak node
// to one and relax p-harmonically on both sides, take the minimum.
inline double sobolev_constant_sup(const GridPtr& grid, double p) {
    const Grid& g = *grid;
    double best = std::numeric_limits<double>::infinity();
    ZeroReaction zr;
    for (int j = g.first_free(); j <= g.last_free(); ++j) {
        Box box;
        box.lo = Field(grid, -1e30);
        box.hi = Field(grid, 1e30);
        box.lo.v[j] = box.hi.v[j] = 1.0;
        Field start(grid);
        for (int i = 0; i < g.n; ++i)
            start.v[i] = std::max(0.0, 1.0 - std::abs(g.nodes[i] - g.nodes[j]) /
                                            (0.25 * (g.b - g.a)));
        start.v[j] = 1.0;
        SolveOptions opt;
        opt.grad_tol = 1e-11;
        SolveReport rep = newton_minimize(grid, p, zr, start, opt, &box);
        if (rep.ok())
            best = std::min(best, std::pow(norm_W1p(rep.solution, p), p));
    }
    return best;
}

}  // namespace detail

inline SufficientReport appendix_sufficient(const Field& h, double p, double mu,
                                            const GridPtr& grid, double q,
                                            std::uint64_t seed = 1) {
    SufficientReport out;
    const int N = grid->dim;
    const double kappa_inv = std::pow((p - 1.0) / mu, p - 1.0);
    Field hp = h;
    for (double& x : hp.v) x = std::max(x, 0.0);

    if (p < N) {
        const double pstar = static_cast<double>(N) * p / (N - p);
        out.sobolev_constant = detail::sobolev_constant_qnorm(grid, p, pstar, seed);
        out.lhs = norm_Lq(hp, static_cast<double>(N) / p);
        out.which_case = "p < N: ||h+||_{N/p} < ((p-1)/mu)^{p-1} S_N";
    } else if (p == N) {
        if (!(q > 1.0)) return out;  // unsupported pairing
        const double target = static_cast<double>(N) * q / (q - 1.0);
        out.sobolev_constant = detail::sobolev_constant_qnorm(grid, p, target, seed);
        out.lhs = norm_Lq(hp, q);
        out.which_case = "p = N: ||h+||_q < ((p-1)/mu)^{p-1} S_{N,q}";
    } else {
        out.sobolev_constant = detail::sobolev_constant_sup(grid, p);
        out.lhs = norm_Lq(hp, 1.0);
        out.which_case = "p > N: ||h+||_1 < ((p-1)/mu)^{p-1} S_N";
    }
    if (!std::isfinite(out.sobolev_constant)) return out;
    out.supported = true;
    out.margin = kappa_inv * out.sobolev_constant - out.lhs;
    out.holds = out.margin > 0.0;
    return out;
}

}  // namespace plap
