// Solution pipelines: the a priori lower bound and lower solution, ordered
// lower/upper existence by box-constrained minimization, the first solution
// as a local minimum, the second via a discretized mountain-pass path, and
// the orchestration for (P_{lambda,k}).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/minimize.hpp"
#include "plap/operators.hpp"
#include "plap/parallel.hpp"
#include "plap/problem.hpp"
#include "plap/rng.hpp"
#include "plap/spectra.hpp"

namespace plap {

struct OrderedPair {
    Field lower;
    Field upper;
    bool ordered(double tol = 1e-14) const {
        for (int i = 0; i < lower.size(); ++i)
            if (lower.v[i] > upper.v[i] + tol) return false;
        return true;
    }
};

namespace detail {

inline Field negative_part_of_datum(const ProblemSpec& spec) {
    Field hm(spec.grid);
    for (int i = 0; i < hm.size(); ++i)
        hm.v[i] = std::max(-spec.k * spec.h.v[i], 0.0);
    return hm;
}

inline double datum_scale(const ProblemSpec& spec) {
    double m = 0.0;
    for (int i = 0; i < spec.h.size(); ++i)
        m = std::max(m, std::abs(spec.k * spec.h.v[i]));
    return m;
}

}  // namespace detail

// Numerical surrogate for the a priori bound M_lambda: iterate the
// comparison problem -Delta_p w = lambda c+ M^{p-1} + (kh)- (+ extra) to a
// fixed point; safety factor 2. Independent of h+ by construction.
struct LowerBoundResult {
    SolveStatus status = SolveStatus::infeasible;
    double M = 0.0;
};

inline LowerBoundResult estimate_lower_bound_ext(const ProblemSpec& spec,
                                                 double extra) {
    const double lam = std::max(spec.lambda, 0.0);
    const Field hm = detail::negative_part_of_datum(spec);
    LowerBoundResult out;
    double M = 0.0;
    for (int it = 0; it < 60; ++it) {
        Field rhs(spec.grid);
        const double Mp = std::pow(M, spec.p - 1.0);
        for (int i = 0; i < rhs.size(); ++i)
            rhs.v[i] = lam * spec.c.v[i] * Mp + hm.v[i] + extra;
        SolveOptions opt;
        opt.grad_tol = 1e-11;
        SolveReport rep = p_poisson_solve(spec.grid, spec.p, rhs, opt);
        if (!rep.ok()) return out;
        const double Mnew = std::max(rep.solution.max_value(), 0.0);
        if (Mnew <= M * (1.0 + 1e-3) + 1e-12) {
            out.status = SolveStatus::converged;
            out.M = 2.0 * std::max(M, Mnew);
            return out;
        }
        if (Mnew > 1e10) return out;  // fixed point diverged
        M = Mnew;
    }
    return out;
}

inline LowerBoundResult estimate_lower_bound(const ProblemSpec& spec) {
    return estimate_lower_bound_ext(spec, 0.0);
}

// Lower solution of (P_{lambda,k}) below every upper solution, and the
// truncation data alpha_lambda it induces.
struct LowerSolutionResult {
    SolveStatus status = SolveStatus::infeasible;
    TruncationData trunc;
    double M_lambda = 0.0;
    double k_trunc = 0.0;  // truncation level used for lambda > 0
    std::string lineage;
};

inline LowerSolutionResult build_lower_solution(const ProblemSpec& spec) {
    spec.validate_constant_mu();
    LowerSolutionResult out;
    const Field hm = detail::negative_part_of_datum(spec);
    const double tau = spec.tau();

    if (spec.lambda <= 0.0) {
        Field rhs = scaled(hm, -1.0);  // -(kh)-
        SolveOptions opt;
        opt.grad_tol = 1e-11;
        SolveReport alpha = p_poisson_solve(spec.grid, spec.p, rhs, opt);
        if (!alpha.ok()) {
            out.lineage = "lower_solution/alpha_failed";
            return out;
        }
        ProblemSpec s0 = spec;
        s0.lambda = 0.0;
        LowerBoundResult lb = estimate_lower_bound(s0);
        if (lb.status != SolveStatus::converged) {
            out.lineage = "lower_solution/bound_failed";
            return out;
        }
        Field ul = alpha.solution;
        for (double& x : ul.v) x -= lb.M;
        out.status = SolveStatus::converged;
        out.trunc = TruncationData::from_lower(ul, spec.p, spec.mu);
        out.M_lambda = lb.M;
        out.lineage = "lower_solution/shifted_poisson";
        return out;
    }

    // lambda > 0: problems (ls1)-(ls3) with the extra -1 in the datum
    LowerBoundResult lb = estimate_lower_bound_ext(spec, 1.0);
    double kt = lb.status == SolveStatus::converged
                    ? std::max(2.0 * lb.M, 1.0)
                    : 4.0 * (1.0 + hm.max_abs());
    out.M_lambda = lb.M;

    for (int attempt = 0; attempt < 9; ++attempt, kt *= 2.0) {
        // (ls2): fixed datum
        Field rhs(spec.grid);
        const double ktp = std::pow(kt, spec.p - 1.0);
        for (int i = 0; i < rhs.size(); ++i)
            rhs.v[i] = -spec.lambda * spec.c.v[i] * ktp - hm.v[i] - 1.0;
        SolveOptions opt;
        opt.grad_tol = 1e-11;
        SolveReport ls2 = p_poisson_solve(spec.grid, spec.p, rhs, opt);
        if (!ls2.ok()) continue;

        // (ls3): transformed truncated problem on the box [w_lo, 0]
        Box box;
        box.hi = Field(spec.grid, 0.0);
        box.lo = hopf_cole(ls2.solution, spec.p, spec.mu);
        const double floor = -tau * (1.0 - 1e-15);
        for (double& x : box.lo.v) x = std::max(x, floor);

        std::vector<double> rho(spec.grid->cells());
        for (int c = 0; c < spec.grid->cells(); ++c)
            rho[c] = -cell_mid(hm, c) - 1.0;
        TruncatedLowerReaction r(spec, kt, rho);

        Field start = box.lo;
        for (double& x : start.v) x *= 0.5;
        SolveOptions lopt;
        lopt.grad_tol = 1e-11;
        lopt.max_iter = 600;
        SolveReport rep = minimize_then_polish(spec.grid, spec.p, r, start, lopt, &box);
        if (!rep.ok()) continue;

        Field w = rep.solution;
        bool above_floor = true;
        for (double x : w.v) above_floor &= (x > floor + 1e-16);
        if (!above_floor) continue;
        Field ul = hopf_cole_inv(w, spec.p, spec.mu);
        if (ul.min_value() <= -0.999 * kt) continue;  // truncation was active

        out.status = SolveStatus::converged;
        out.trunc = TruncationData::from_lower(ul, spec.p, spec.mu);
        out.k_trunc = kt;
        out.lineage = "lower_solution/ls3";
        return out;
    }
    out.lineage = "lower_solution/truncation_active";
    return out;
}

// Discrete weak lower/upper checks for (Q_lambda): the sign of the energy
// gradient against nonnegative test functions.
inline bool discrete_upper_Q(const EnergyModel& m, const Field& beta, double slack) {
    std::vector<double> grad;
    gradient_of(m.grid(), m.spec.p, m.reaction, beta.v, grad);
    for (int i = m.grid().first_free(); i <= m.grid().last_free(); ++i)
        if (grad[i] < -slack) return false;
    return true;
}
inline bool discrete_lower_Q(const EnergyModel& m, const Field& alpha, double slack) {
    std::vector<double> grad;
    gradient_of(m.grid(), m.spec.p, m.reaction, alpha.v, grad);
    for (int i = m.grid().first_free(); i <= m.grid().last_free(); ++i)
        if (grad[i] > slack) return false;
    return true;
}

// Minimize the (Q_lambda) energy over the box {alpha <= v <= beta}.
inline SolveReport solve_between(const EnergyModel& m, const OrderedPair& pair,
                                 SolveOptions opt = {}) {
    SolveReport rep;
    if (!pair.ordered()) {
        rep.status = SolveStatus::infeasible;
        rep.lineage = "solve_between/box_unordered";
        return rep;
    }
    if (sup_distance(pair.lower, pair.upper) == 0.0) {
        rep.status = SolveStatus::converged;
        rep.solution = pair.lower;
        rep.energy = energy(rep.solution, m);
        rep.grad_norm = 0.0;
        rep.lineage = "solve_between/degenerate_box";
        return rep;
    }
    Box box{pair.lower, pair.upper};
    Field start = pair.lower;
    for (int i = 0; i < start.size(); ++i)
        start.v[i] = 0.5 * (pair.lower.v[i] + pair.upper.v[i]);
    start.enforce_dirichlet();
    rep = minimize_then_polish(m.spec.grid, m.spec.p, m.reaction, start, opt, &box);
    std::string note;
    const double slack = 1e-7 * (1.0 + detail::datum_scale(m.spec));
    if (!discrete_lower_Q(m, pair.lower, slack)) note += "|lower_sign_unverified";
    if (!discrete_upper_Q(m, pair.upper, slack)) note += "|upper_sign_unverified";
    rep.lineage = "solve_between" + note;
    return rep;
}

// Unconstrained critical point search from a start field; damped Newton /
// gradient hybrid with a blow-up guard. Energy-based line searches lose
// resolution once the decrease drops below roundoff, so an endgame polish
// on the gradient residual finishes the last digits.
inline SolveReport find_local_min(const EnergyModel& m, const Field& start,
                                  SolveOptions opt = {}) {
    opt.hessian_signal = true;
    opt.blowup_sup =
        std::min(opt.blowup_sup,
                 1e3 * (1.0 + detail::datum_scale(m.spec) +
                        m.trunc.underline_u.max_abs()));
    SolveReport rep =
        minimize_then_polish(m.spec.grid, m.spec.p, m.reaction, start, opt);
    rep.lineage = "local_min";
    if (opt.hessian_signal && rep.ok()) {
        TriDiag J = jacobian_of(m.grid(), m.spec.p, m.reaction, rep.solution.v,
                                std::max(opt.eps, 1e-8));
        rep.hessian_psd = LDLT::factor(J).neg_pivots == 0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Discretized mountain-pass algorithm on a generic energy.
// ---------------------------------------------------------------------------

struct MountainPassOptions {
    int path_nodes = 41;  // odd, keeps a center node
    int max_sweeps = 300;
    double level_tol = 1e-6;   // the Newton polish supplies the final accuracy
    int stable_sweeps = 5;
    int plateau_sweeps = 40;   // stop when the level stops improving
    double grad_tol = 1e-8;
    double collapse_tol = 1e-12;
};

struct MountainPassCoreResult {
    SolveStatus status = SolveStatus::max_iter;
    std::vector<double> saddle;
    double level = std::numeric_limits<double>::quiet_NaN();
    int sweeps = 0;
    double endpoint_max = std::numeric_limits<double>::quiet_NaN();
};

// Model requirements: double energy(const std::vector<double>&) and
// void gradient(const std::vector<double>&, std::vector<double>&).
template <class Model>
inline MountainPassCoreResult mountain_pass_core(const Model& model,
                                                 const std::vector<double>& e1,
                                                 const std::vector<double>& e2,
                                                 const MountainPassOptions& opt = {}) {
    const int P = opt.path_nodes;
    const int dim = static_cast<int>(e1.size());
    MountainPassCoreResult out;
    std::vector<std::vector<double>> path(P, std::vector<double>(dim));
    for (int j = 0; j < P; ++j) {
        const double t = static_cast<double>(j) / (P - 1);
        for (int i = 0; i < dim; ++i) path[j][i] = (1 - t) * e1[i] + t * e2[i];
    }
    out.endpoint_max = std::max(model.energy(e1), model.energy(e2));

    auto path_dist = [&](int a, int b) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double d = path[a][i] - path[b][i];
            s += d * d;
        }
        return std::sqrt(s);
    };

    std::vector<double> grad(dim), energies(P);
    double level_prev = std::numeric_limits<double>::infinity();
    double best_level = std::numeric_limits<double>::infinity();
    int stable = 0, since_improvement = 0;
    std::vector<double> best_saddle;

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        out.sweeps = sweep;
        // deform interior nodes: descent orthogonal to the local tangent
        for (int j = 1; j < P - 1; ++j) {
            model.gradient(path[j], grad);
            std::vector<double> tan(dim);
            double tn = 0.0;
            for (int i = 0; i < dim; ++i) {
                tan[i] = path[j + 1][i] - path[j - 1][i];
                tn += tan[i] * tan[i];
            }
            tn = std::sqrt(tn);
            double dot = 0.0;
            if (tn > 0) {
                for (int i = 0; i < dim; ++i) {
                    tan[i] /= tn;
                    dot += grad[i] * tan[i];
                }
            }
            std::vector<double> dir(dim);
            double dn = 0.0;
            for (int i = 0; i < dim; ++i) {
                dir[i] = -(grad[i] - dot * tan[i]);
                dn += dir[i] * dir[i];
            }
            dn = std::sqrt(dn);
            if (dn < 1e-15) continue;
            // trust the step to the local node spacing
            const double spacing =
                0.5 * (path_dist(j, j - 1) + path_dist(j, j + 1)) + 1e-12;
            const double cap = std::min(1.0, spacing / dn);
            const double E0 = model.energy(path[j]);
            double t = cap;
            for (int ls = 0; ls < 20; ++ls) {
                std::vector<double> cand(dim);
                for (int i = 0; i < dim; ++i) cand[i] = path[j][i] + t * dir[i];
                if (model.energy(cand) < E0 - 1e-4 * t * dn * dn) {
                    path[j] = std::move(cand);
                    break;
                }
                t *= 0.5;
            }
        }

        // re-equidistribute by arclength
        std::vector<double> arc(P, 0.0);
        for (int j = 1; j < P; ++j) arc[j] = arc[j - 1] + path_dist(j, j - 1);
        if (arc[P - 1] < opt.collapse_tol) {
            out.status = SolveStatus::diverged;  // path collapse
            out.saddle = path[P / 2];
            out.level = model.energy(out.saddle);
            return out;
        }
        std::vector<std::vector<double>> fresh(P, std::vector<double>(dim));
        fresh[0] = path[0];
        fresh[P - 1] = path[P - 1];
        int seg = 0;
        for (int j = 1; j < P - 1; ++j) {
            const double target = arc[P - 1] * j / (P - 1);
            while (seg < P - 2 && arc[seg + 1] < target) ++seg;
            const double den = std::max(arc[seg + 1] - arc[seg], 1e-300);
            const double w = (target - arc[seg]) / den;
            for (int i = 0; i < dim; ++i)
                fresh[j][i] = (1 - w) * path[seg][i] + w * path[seg + 1][i];
        }
        path.swap(fresh);

        int imax = 0;
        for (int j = 0; j < P; ++j) {
            energies[j] = model.energy(path[j]);
            if (energies[j] > energies[imax]) imax = j;
        }
        const double level = energies[imax];
        if (level < best_level - opt.level_tol * (1.0 + std::abs(level))) {
            best_level = level;
            best_saddle = path[imax];
            since_improvement = 0;
        } else {
            ++since_improvement;
            if (best_saddle.empty() || level < best_level) {
                best_level = std::min(best_level, level);
                best_saddle = path[imax];
            }
        }
        if (std::abs(level - level_prev) <= opt.level_tol * (1.0 + std::abs(level)))
            ++stable;
        else
            stable = 0;
        level_prev = level;
        // stabilized, or oscillating at path resolution without improvement
        if (stable >= opt.stable_sweeps || since_improvement >= opt.plateau_sweeps) {
            out.saddle = best_saddle;
            out.level = best_level;
            out.status = SolveStatus::converged;
            out.sweeps = sweep + 1;
            return out;
        }
    }
    out.saddle = best_saddle;
    out.level = best_level;
    if (best_saddle.empty()) {
        int imax = 0;
        for (int j = 0; j < P; ++j)
            if (model.energy(path[j]) > model.energy(path[imax])) imax = j;
        out.saddle = path[imax];
        out.level = model.energy(out.saddle);
    }
    out.status = SolveStatus::max_iter;
    return out;
}

namespace detail {

struct QModel {
    const EnergyModel* m;
    double energy(const std::vector<double>& v) const {
        return energy_of(m->grid(), m->spec.p, m->reaction, v);
    }
    void gradient(const std::vector<double>& v, std::vector<double>& out) const {
        gradient_of(m->grid(), m->spec.p, m->reaction, v, out);
    }
};

}  // namespace detail

// Mountain pass between two low-energy fields, followed by a Newton polish
// of the saddle candidate.
inline SolveReport mountain_pass(const EnergyModel& m, const Field& e1,
                                 const Field& e2, MountainPassOptions mopt = {},
                                 SolveOptions popt = {}) {
    detail::QModel qm{&m};
    MountainPassCoreResult core = mountain_pass_core(qm, e1.v, e2.v, mopt);
    SolveReport rep;
    rep.iterations = core.sweeps;
    rep.lineage = "mountain_pass";
    if (core.status == SolveStatus::diverged) {
        rep.status = SolveStatus::diverged;
        rep.lineage += "/path_collapse";
        return rep;
    }
    Field saddle(m.spec.grid, core.saddle);
    popt.grad_tol = std::min(popt.grad_tol, mopt.grad_tol);
    popt.max_iter = 120;
    SolveReport polish = newton_root(m.spec.grid, m.spec.p, m.reaction, saddle, popt);
    const double floor = core.endpoint_max;
    if (polish.ok() && polish.energy > floor - 1e-9 * (1.0 + std::abs(floor))) {
        rep.status = SolveStatus::converged;
        rep.solution = polish.solution;
        rep.energy = polish.energy;
        rep.grad_norm = polish.grad_norm;
        rep.iterations += polish.iterations;
        rep.lineage += "/polished";
        return rep;
    }
    // keep the unpolished path maximum; report its gradient honestly
    rep.solution = saddle;
    rep.energy = core.level;
    std::vector<double> grad;
    gradient_of(m.grid(), m.spec.p, m.reaction, saddle.v, grad);
    double gn = 0.0;
    for (int i = m.grid().first_free(); i <= m.grid().last_free(); ++i)
        gn = std::max(gn, std::abs(grad[i]));
    rep.grad_norm = gn;
    rep.status = (core.status == SolveStatus::converged && gn <= mopt.grad_tol)
                     ? SolveStatus::converged
                     : SolveStatus::max_iter;
    rep.lineage += "/unpolished";
    return rep;
}

}  // namespace plap
