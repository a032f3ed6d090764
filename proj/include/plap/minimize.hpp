// Damped-Newton energy minimization (optionally box-constrained) and
// Newton root-finding on nodal gradients. One solve context per call; no
// shared state.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/operators.hpp"
#include "plap/tridiag.hpp"

namespace plap {

enum class SolveStatus { converged, diverged, max_iter, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "?";
}

struct SolveOptions {
    double grad_tol = 1e-10;
    int max_iter = 400;
    double blowup_sup = 1e8;   // sup-norm divergence guard
    double eps = 1e-6;         // Jacobian regularization
    bool hessian_signal = false;  // record definiteness at the solution
};

struct SolveReport {
    SolveStatus status = SolveStatus::max_iter;
    Field solution;
    double energy = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool hessian_psd = false;
    std::string lineage;

    bool ok() const { return status == SolveStatus::converged; }
};

struct Box {
    Field lo;
    Field hi;
};

namespace detail {

inline void clip_to_box(std::vector<double>& v, const Box* box) {
    if (!box) return;
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = std::min(std::max(v[i], box->lo.v[i]), box->hi.v[i]);
}

// Projected gradient: components pushing out of an active bound are removed.
inline double projected_grad_sup(const Grid& g, const std::vector<double>& v,
                                 const std::vector<double>& grad, const Box* box,
                                 double atol) {
    double m = 0.0;
    for (int i = g.first_free(); i <= g.last_free(); ++i) {
        double gi = grad[i];
        if (box) {
            if (v[i] <= box->lo.v[i] + atol && gi > 0) gi = 0.0;
            if (v[i] >= box->hi.v[i] - atol && gi < 0) gi = 0.0;
        }
        m = std::max(m, std::abs(gi));
    }
    return m;
}

inline void pin_dof(TriDiag& J, std::vector<double>& rhs, int w) {
    J.d[w] = 1.0;
    if (w > 0) J.e[w - 1] = 0.0;
    if (w < J.size() - 1) J.e[w] = 0.0;
    rhs[w] = 0.0;
}

}  // namespace detail

// Minimize energy_of(grid, p, reaction, .) over the box (if any), starting
// from `start`. Newton with a Levenberg shift when the Hessian is not
// positive definite, Armijo backtracking on the exact energy, projected
// steps under box constraints.
template <class Reaction>
inline SolveReport newton_minimize(const GridPtr& grid, double p, const Reaction& r,
                                   Field start, const SolveOptions& opt,
                                   const Box* box = nullptr) {
    const Grid& g = *grid;
    SolveReport rep;
    std::vector<double> v = start.v;
    if (g.dirichlet_left) v[0] = 0.0;
    v[g.n - 1] = 0.0;
    detail::clip_to_box(v, box);
    if (box) {
        for (int i = 0; i < g.n; ++i)
            if (box->lo.v[i] > box->hi.v[i] + 1e-14) {
                rep.status = SolveStatus::infeasible;
                rep.solution = Field(grid, std::move(v));
                return rep;
            }
    }

    const double atol = 1e-12;
    std::vector<double> grad, dir, trial, gtrial;
    double E = energy_of(g, p, r, v);
    const int lo = g.first_free();
    const int m = g.free_count();
    int stagnant = 0;

    for (int it = 0; it < opt.max_iter; ++it) {
        gradient_of(g, p, r, v, grad);
        const double pg = detail::projected_grad_sup(g, v, grad, box, atol);
        const double gscale = 1.0 + gradient_scale_of(g, p, r, v);
        rep.iterations = it;
        rep.grad_norm = pg;
        if (pg <= opt.grad_tol * gscale) {
            rep.status = SolveStatus::converged;
            break;
        }

        TriDiag J = jacobian_of(g, p, r, v, opt.eps);
        std::vector<double> rhs(m);
        for (int w = 0; w < m; ++w) rhs[w] = -grad[lo + w];
        if (box) {
            for (int w = 0; w < m; ++w) {
                const int i = lo + w;
                const bool act_lo = v[i] <= box->lo.v[i] + atol && grad[i] > 0;
                const bool act_hi = v[i] >= box->hi.v[i] - atol && grad[i] < 0;
                if (act_lo || act_hi) detail::pin_dof(J, rhs, w);
            }
        }
        LDLT fac = LDLT::factor(J);
        if (!fac.positive_definite()) {
            double shift = 1e-8;
            double dmax = 0.0;
            for (double x : J.d) dmax = std::max(dmax, std::abs(x));
            shift = std::max(shift, 1e-10 * dmax);
            for (int tries = 0; tries < 60 && !fac.positive_definite(); ++tries) {
                TriDiag Js = J;
                for (double& x : Js.d) x += shift;
                fac = LDLT::factor(Js);
                shift *= 4.0;
            }
        }
        std::vector<double> delta = rhs;
        fac.solve(delta);

        double dirderiv = 0.0;
        for (int w = 0; w < m; ++w) dirderiv += grad[lo + w] * delta[w];
        if (!(dirderiv < 0.0)) {
            // fall back to (projected) steepest descent
            double gmax = 0.0;
            for (int w = 0; w < m; ++w) gmax = std::max(gmax, std::abs(rhs[w]));
            const double sc = gmax > 0 ? 1.0 / gmax : 1.0;
            for (int w = 0; w < m; ++w) delta[w] = rhs[w] * sc;
            dirderiv = 0.0;
            for (int w = 0; w < m; ++w) dirderiv += grad[lo + w] * delta[w];
            if (!(dirderiv < 0.0)) {
                rep.status = SolveStatus::converged;  // numerically stationary
                break;
            }
        }

        // Armijo with projection; afterwards keep halving while that still
        // improves (guards against far overshoot on nearly flat energies,
        // p < 2 especially)
        const double Eprev = E;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            trial = v;
            for (int w = 0; w < m; ++w) trial[lo + w] += t * delta[w];
            detail::clip_to_box(trial, box);
            double dE_pred = 0.0;
            for (int i = lo; i <= g.last_free(); ++i)
                dE_pred += grad[i] * (trial[i] - v[i]);
            double Et = energy_of(g, p, r, trial);
            if (Et <= E + 1e-4 * dE_pred && std::isfinite(Et)) {
                for (int refine = 0; refine < 40; ++refine) {
                    std::vector<double> half = v;
                    for (int w = 0; w < m; ++w) half[lo + w] += 0.5 * t * delta[w];
                    detail::clip_to_box(half, box);
                    const double Eh = energy_of(g, p, r, half);
                    if (!(Eh < Et)) break;
                    trial.swap(half);
                    Et = Eh;
                    t *= 0.5;
                }
                v.swap(trial);
                E = Et;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            rep.status = pg <= 1e3 * opt.grad_tol ? SolveStatus::converged
                                                  : SolveStatus::max_iter;
            break;
        }
        // energy resolution exhausted: leave the endgame to the callers
        if (Eprev - E <= 8.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + std::abs(Eprev))) {
            if (++stagnant >= 3) {
                rep.status = SolveStatus::max_iter;
                break;
            }
        } else {
            stagnant = 0;
        }
        double vsup = 0.0;
        for (double x : v) vsup = std::max(vsup, std::abs(x));
        if (vsup > opt.blowup_sup) {
            rep.status = SolveStatus::diverged;
            break;
        }
    }

    rep.solution = Field(grid, std::move(v));
    rep.energy = energy_of(g, p, r, rep.solution.v);
    gradient_of(g, p, r, rep.solution.v, grad);
    rep.grad_norm = detail::projected_grad_sup(g, rep.solution.v, grad, box, atol);
    if (rep.status == SolveStatus::max_iter &&
        rep.grad_norm <=
            opt.grad_tol * (1.0 + gradient_scale_of(g, p, r, rep.solution.v)))
        rep.status = SolveStatus::converged;
    if (opt.hessian_signal) {
        TriDiag J = jacobian_of(g, p, r, rep.solution.v, std::max(opt.eps, 1e-8));
        rep.hessian_psd = LDLT::factor(J).neg_pivots == 0;
    }
    return rep;
}

// Newton on gradient_of(...) = 0 (sign-indefinite Hessians allowed), damped
// by residual decrease. Used for continuation steps and saddle polishing.
template <class Reaction>
inline SolveReport newton_root(const GridPtr& grid, double p, const Reaction& r,
                               Field start, const SolveOptions& opt) {
    const Grid& g = *grid;
    SolveReport rep;
    std::vector<double> v = start.v;
    if (g.dirichlet_left) v[0] = 0.0;
    v[g.n - 1] = 0.0;
    const int lo = g.first_free();
    const int m = g.free_count();

    std::vector<double> grad, trial, gtrial;
    gradient_of(g, p, r, v, grad);
    auto res_norm = [&](const std::vector<double>& gr) {
        double s = 0.0;
        for (int i = lo; i <= g.last_free(); ++i) s = std::max(s, std::abs(gr[i]));
        return s;
    };
    double R = res_norm(grad);

    for (int it = 0; it < opt.max_iter; ++it) {
        rep.iterations = it;
        if (R <= opt.grad_tol * (1.0 + gradient_scale_of(g, p, r, v))) {
            rep.status = SolveStatus::converged;
            break;
        }
        TriDiag J = jacobian_of(g, p, r, v, opt.eps);
        LDLT fac = LDLT::factor(J);
        if (fac.singular) {
            TriDiag Js = J;
            for (double& x : Js.d) x += 1e-10 * (1.0 + std::abs(x));
            fac = LDLT::factor(Js);
        }
        std::vector<double> delta(m);
        for (int w = 0; w < m; ++w) delta[w] = -grad[lo + w];
        fac.solve(delta);

        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            trial = v;
            for (int w = 0; w < m; ++w) trial[lo + w] += t * delta[w];
            gradient_of(g, p, r, trial, gtrial);
            const double Rt = res_norm(gtrial);
            if (Rt < (1.0 - 1e-4 * t) * R && std::isfinite(Rt)) {
                v.swap(trial);
                grad.swap(gtrial);
                R = Rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            rep.status = SolveStatus::max_iter;
            break;
        }
        double vsup = 0.0;
        for (double x : v) vsup = std::max(vsup, std::abs(x));
        if (vsup > opt.blowup_sup) {
            rep.status = SolveStatus::diverged;
            break;
        }
    }
    if (R <= opt.grad_tol * (1.0 + gradient_scale_of(g, p, r, v)))
        rep.status = SolveStatus::converged;
    rep.solution = Field(grid, std::move(v));
    rep.energy = energy_of(g, p, r, rep.solution.v);
    rep.grad_norm = R;
    return rep;
}

// Minimize, then finish the last digits with residual-based Newton when the
// energy line search runs out of floating-point resolution. With a box the
// polish only runs while the solution sits strictly inside it.
template <class Reaction>
inline SolveReport minimize_then_polish(const GridPtr& grid, double p,
                                        const Reaction& r, Field start,
                                        const SolveOptions& opt,
                                        const Box* box = nullptr) {
    SolveReport rep = newton_minimize(grid, p, r, start, opt, box);
    if (rep.ok() || rep.status == SolveStatus::diverged ||
        rep.status == SolveStatus::infeasible || !std::isfinite(rep.grad_norm))
        return rep;
    if (box) {
        for (int i = 0; i < rep.solution.size(); ++i) {
            if (rep.solution.v[i] <= box->lo.v[i] + 1e-12) return rep;
            if (rep.solution.v[i] >= box->hi.v[i] - 1e-12) return rep;
        }
    }
    SolveOptions popt = opt;
    popt.max_iter = 80;
    SolveReport polish = newton_root(grid, p, r, rep.solution, popt);
    if (polish.ok() &&
        sup_distance(polish.solution, rep.solution) <=
            1e-3 * (1.0 + rep.solution.max_abs())) {
        polish.iterations += rep.iterations;
        return polish;
    }
    return rep;
}

// Solve -Delta_p u = rhs (Dirichlet) by convex minimization, warm-started
// from the p = 2 solution.
inline SolveReport p_poisson_solve(const GridPtr& grid, double p, const Field& rhs,
                                   SolveOptions opt = {}) {
    const Grid& g = *grid;
    LinearDatumReaction r;
    r.rho.resize(g.cells());
    for (int c = 0; c < g.cells(); ++c) r.rho[c] = cell_mid(rhs, c);

    // p = 2 start: one linear solve
    Field start(grid);
    {
        TriDiag J = jacobian_of(g, 2.0, r, start.v, 0.0);
        std::vector<double> grad;
        gradient_of(g, 2.0, r, start.v, grad);
        std::vector<double> rhsv(g.free_count());
        for (int w = 0; w < g.free_count(); ++w) rhsv[w] = -grad[g.first_free() + w];
        LDLT fac = LDLT::factor(J);
        fac.solve(rhsv);
        for (int w = 0; w < g.free_count(); ++w) start.v[g.first_free() + w] = rhsv[w];
        if (p != 2.0) {
            // amplitude correction for the p-homogeneity
            const double amp = start.max_abs();
            if (amp > 0) {
                const double scale = std::pow(amp, (2.0 - p) / (p - 1.0));
                for (double& x : start.v) x *= std::pow(scale, 1.0);
            }
        }
    }
    if (p == 2.0) {
        SolveReport rep;
        rep.status = SolveStatus::converged;
        rep.solution = start;
        rep.energy = energy_of(g, 2.0, r, start.v);
        std::vector<double> grad;
        gradient_of(g, 2.0, r, start.v, grad);
        rep.grad_norm = detail::projected_grad_sup(g, start.v, grad, nullptr, 0.0);
        rep.lineage = "p_poisson/linear";
        return rep;
    }
    SolveReport rep = minimize_then_polish(grid, p, r, start, opt);
    rep.lineage = "p_poisson/newton";
    return rep;
}

}  // namespace plap
