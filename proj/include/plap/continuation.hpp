// Continuation of solution branches in lambda (or in the datum scaling k),
// fold detection by arclength reversal plus bisection on solvability, and
// the (lambda, k) existence-region diagram.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plap/pipeline.hpp"

namespace plap {

enum class BranchParam { lambda, k };

struct BranchPoint {
    double param = 0.0;
    double energy = 0.0;
    double min_value = 0.0;
    double sup_norm = 0.0;
    double residual_inf = 0.0;
    bool has_field = false;
    Field field;  // stored at every 10th point for replay
};

struct Fold {
    double param = 0.0;
    double window = 0.0;
};

struct Branch {
    BranchParam param_name = BranchParam::lambda;
    std::vector<BranchPoint> points;
    std::optional<Fold> fold;
    bool truncated = false;  // continuation lost before the window was covered
    std::string note;
};

namespace detail {

inline ProblemSpec spec_at(const ProblemSpec& base, BranchParam which, double value) {
    ProblemSpec s = base;
    if (which == BranchParam::lambda)
        s.lambda = value;
    else
        s.k = value;
    return s;
}

// P1 interpolation of the data onto a refined grid (factor-2 refinement keeps
// the original nodes).
inline Field interpolate_to(const Field& f, const GridPtr& gnew) {
    const Grid& go = *f.grid;
    Field out(gnew);
    for (int i = 0; i < gnew->n; ++i) {
        const double x = gnew->nodes[i];
        const double t = (x - go.a) / go.dx;
        int c = std::clamp(static_cast<int>(std::floor(t)), 0, go.n - 2);
        const double w = std::clamp(t - c, 0.0, 1.0);
        out.v[i] = (1 - w) * f.v[c] + w * f.v[c + 1];
    }
    return out;
}

inline ProblemSpec refine_spec(const ProblemSpec& s, int factor) {
    const Grid& g = *s.grid;
    const int n_new = (g.n - 1) * factor + 1;
    GridPtr gnew = (g.kind == DomainKind::interval)
                       ? make_interval_grid(g.a, g.b, n_new)
                       : make_radial_grid(g.b, g.dim, n_new);
    ProblemSpec out = s;
    out.grid = gnew;
    out.c = interpolate_to(s.c, gnew);
    out.h = interpolate_to(s.h, gnew);
    return out;
}

// d(gradient)/d(param) at fixed v: the reaction is affine in both lambda
// and k above the seam.
inline void dgrad_dparam(const EnergyModel& m, BranchParam which,
                         const std::vector<double>& v, std::vector<double>& out) {
    const Grid& g = m.grid();
    out.assign(g.n, 0.0);
    for (int c = 0; c < g.cells(); ++c) {
        const double mid = 0.5 * (v[c] + v[c + 1]);
        const double d = (which == BranchParam::lambda)
                             ? m.reaction.dfdlambda(c, mid)
                             : m.reaction.dfdk(c, mid);
        out[c] += -0.5 * g.cell_w[c] * d;
        out[c + 1] += -0.5 * g.cell_w[c] * d;
    }
    if (g.dirichlet_left) out[0] = 0.0;
    out[g.n - 1] = 0.0;
}

}  // namespace detail

struct ContinuationOptions {
    double step = 0.0;        // 0: gamma1/100 convention chosen by caller
    double step_min_factor = 1.0 / 64.0;
    int max_points = 400;
    double grad_tol = 1e-10;
    int newton_iter = 60;
    std::uint64_t seed = 1;
    int threads = 0;
    int store_every = 10;
    bool use_arclength = true;  // go around folds
};

// Re-solve (Q_lambda) at a fixed parameter from a warm start.
inline SolveReport resolve_at(const ProblemSpec& spec, const Field& warm,
                              double grad_tol, int max_iter) {
    auto ls = build_lower_solution(spec);
    SolveReport rep;
    if (ls.status != SolveStatus::converged) {
        rep.status = SolveStatus::infeasible;
        return rep;
    }
    EnergyModel m(spec, ls.trunc);
    SolveOptions opt;
    opt.grad_tol = grad_tol;
    opt.max_iter = max_iter;
    Field start = warm.grid == spec.grid ? warm
                                         : detail::interpolate_to(warm, spec.grid);
    rep = newton_root(spec.grid, spec.p, m.reaction, start, opt);
    if (rep.ok()) {
        bool above = true;
        for (int i = 0; i < rep.solution.size(); ++i)
            above &= rep.solution.v[i] >= ls.trunc.alpha_lambda.v[i] - 1e-7;
        if (!above) rep.status = SolveStatus::infeasible;
    }
    return rep;
}

namespace detail {

inline BranchPoint make_point(const ProblemSpec& spec, double param,
                              const SolveReport& rep, bool store_field) {
    BranchPoint pt;
    pt.param = param;
    pt.energy = rep.energy;
    pt.min_value = rep.solution.min_value();
    pt.sup_norm = rep.solution.max_abs();
    Field u = hopf_cole_inv(rep.solution, spec.p, spec.mu);
    pt.residual_inf = sup_norm_free(residual_P(u, spec));
    pt.has_field = store_field;
    if (store_field) pt.field = rep.solution;
    return pt;
}

// One pseudo-arclength corrector step with a bordered tridiagonal solve.
// Returns the accepted (v, param) or nullopt.
inline std::optional<std::pair<Field, double>> arclength_step(
    const ProblemSpec& base, BranchParam which, const Field& v_prev,
    double param_prev, const std::vector<double>& tang_v, double tang_p,
    double ds, double grad_tol) {
    ProblemSpec spec = detail::spec_at(base, which, param_prev + ds * tang_p);
    auto ls = build_lower_solution(spec);
    if (ls.status != SolveStatus::converged) return std::nullopt;

    const Grid& g = *spec.grid;
    const int lo = g.first_free(), m = g.free_count();
    std::vector<double> v = v_prev.v;
    for (int w = 0; w < m; ++w) v[lo + w] += ds * tang_v[w];
    double param = param_prev + ds * tang_p;

    for (int it = 0; it < 60; ++it) {
        ProblemSpec sp = detail::spec_at(base, which, param);
        EnergyModel model(sp, ls.trunc);
        std::vector<double> grad;
        gradient_of(g, sp.p, model.reaction, v, grad);
        // normalization residual
        double rn = -ds;
        for (int w = 0; w < m; ++w) rn += tang_v[w] * (v[lo + w] - v_prev.v[lo + w]);
        rn += tang_p * (param - param_prev);
        double rmax = std::abs(rn);
        for (int w = 0; w < m; ++w) rmax = std::max(rmax, std::abs(grad[lo + w]));
        if (rmax <= grad_tol) {
            Field out(sp.grid, v);
            return std::make_pair(out, param);
        }
        TriDiag J = jacobian_of(g, sp.p, model.reaction, v, 1e-6);
        LDLT fac = LDLT::factor(J);
        if (fac.singular) {
            TriDiag Js = J;
            for (double& x : Js.d) x += 1e-9 * (1.0 + std::abs(x));
            fac = LDLT::factor(Js);
        }
        std::vector<double> fparam;
        dgrad_dparam(model, which, v, fparam);
        std::vector<double> a(m), b(m);
        for (int w = 0; w < m; ++w) {
            a[w] = -grad[lo + w];
            b[w] = -fparam[lo + w];
        }
        fac.solve(a);
        fac.solve(b);
        double ta = 0.0, tb = 0.0;
        for (int w = 0; w < m; ++w) {
            ta += tang_v[w] * a[w];
            tb += tang_v[w] * b[w];
        }
        const double denom = tb + tang_p;
        if (std::abs(denom) < 1e-14) return std::nullopt;
        const double dparam = (-rn - ta) / denom;
        for (int w = 0; w < m; ++w) v[lo + w] += a[w] + dparam * b[w];
        param += dparam;
        if (!std::isfinite(param)) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

// Natural-parameter continuation with warm starts, switching to
// pseudo-arclength when step halving bottoms out (a fold), tracing the
// second branch back through the fold.
inline Branch trace_branch(const ProblemSpec& base, BranchParam which,
                           double from, double to, const Field& seed,
                           ContinuationOptions opt = {}) {
    Branch br;
    br.param_name = which;
    const double dir = (to >= from) ? 1.0 : -1.0;
    double step0 = opt.step != 0.0 ? opt.step : std::abs(to - from) / 100.0;
    double step = step0;
    const double step_min = step0 * opt.step_min_factor;

    ProblemSpec spec = detail::spec_at(base, which, from);
    SolveReport cur = resolve_at(spec, seed, opt.grad_tol, opt.newton_iter);
    if (!cur.ok()) {
        br.truncated = true;
        br.note = "seed solve failed";
        return br;
    }
    double param = from;
    br.points.push_back(detail::make_point(spec, param, cur, true));

    Field prev_sol = cur.solution;
    double prev_param = param;

    while (static_cast<int>(br.points.size()) < opt.max_points) {
        if (dir > 0 ? param >= to : param <= to) break;
        double next = param + dir * step;
        if (dir > 0 ? next > to : next < to) next = to;
        ProblemSpec sp = detail::spec_at(base, which, next);
        SolveReport rep = resolve_at(sp, cur.solution, opt.grad_tol, opt.newton_iter);
        if (rep.ok() && sup_distance(rep.solution, cur.solution) <
                            50.0 * (std::abs(next - param) / step0 + 1.0) *
                                (1.0 + cur.solution.max_abs())) {
            prev_sol = cur.solution;
            prev_param = param;
            cur = rep;
            param = next;
            const bool store =
                (br.points.size() % opt.store_every == 0) || next == to;
            br.points.push_back(detail::make_point(sp, param, cur, store));
            if (rep.iterations <= 5) step = std::min(step * 1.3, step0);
            continue;
        }
        if (step > step_min) {
            step *= 0.5;
            continue;
        }
        // natural continuation exhausted: fold suspected near `param`
        if (!opt.use_arclength) {
            br.truncated = true;
            br.note = "step halving exhausted";
            return br;
        }
        break;
    }

    if ((dir > 0 ? param >= to : param <= to) || !opt.use_arclength) return br;

    // pseudo-arclength around the fold
    const Grid& g = *base.grid;
    const int lo = g.first_free(), m = g.free_count();
    std::vector<double> tv(m);
    double tp = 0.0;
    {
        double norm2 = 0.0;
        for (int w = 0; w < m; ++w) {
            tv[w] = cur.solution.v[lo + w] - prev_sol.v[lo + w];
            norm2 += tv[w] * tv[w];
        }
        tp = param - prev_param;
        norm2 += tp * tp;
        const double nn = std::sqrt(std::max(norm2, 1e-300));
        for (double& x : tv) x /= nn;
        tp /= nn;
    }
    double ds = std::max(step, step_min) * 4.0;
    Field v = cur.solution;
    int fold_seen = 0;
    for (int pts = 0; pts < opt.max_points; ++pts) {
        auto next = detail::arclength_step(base, which, v, param, tv, tp, ds,
                                           opt.grad_tol);
        if (!next) {
            ds *= 0.5;
            if (ds < step_min * 0.1) {
                br.truncated = true;
                br.note = "arclength step collapsed";
                return br;
            }
            continue;
        }
        auto [vn, pn] = *next;
        // new secant tangent
        double norm2 = 0.0;
        std::vector<double> tv_new(m);
        for (int w = 0; w < m; ++w) {
            tv_new[w] = vn.v[lo + w] - v.v[lo + w];
            norm2 += tv_new[w] * tv_new[w];
        }
        double tp_new = pn - param;
        norm2 += tp_new * tp_new;
        const double nn = std::sqrt(std::max(norm2, 1e-300));
        for (double& x : tv_new) x /= nn;
        tp_new /= nn;
        if (tp * tp_new < 0 && fold_seen == 0) {
            fold_seen = 1;
            br.fold = Fold{0.5 * (pn + param), std::abs(pn - param) + ds};
        }
        ProblemSpec sp = detail::spec_at(base, which, pn);
        SolveReport repn;
        repn.status = SolveStatus::converged;
        repn.solution = vn;
        {
            auto ls = build_lower_solution(sp);
            if (ls.status == SolveStatus::converged) {
                EnergyModel mm(sp, ls.trunc);
                repn.energy = energy(vn, mm);
            }
        }
        const bool store = (br.points.size() % opt.store_every == 0);
        br.points.push_back(detail::make_point(sp, pn, repn, store));
        v = vn;
        param = pn;
        tv = tv_new;
        tp = tp_new;
        ds = std::min(ds * 1.2, step0 * 4.0);
        if (fold_seen && (dir > 0 ? param <= from : param >= from)) break;
        if (pts > 3 && !fold_seen && (dir > 0 ? param >= to : param <= to)) break;
    }
    return br;
}

inline Branch trace_lambda(const ProblemSpec& base, double lambda_from,
                           double lambda_to, double step, const Field& seed,
                           ContinuationOptions opt = {}) {
    opt.step = step;
    return trace_branch(base, BranchParam::lambda, lambda_from, lambda_to, seed, opt);
}

// Sign change of d(param)/ds along the stored branch.
inline std::optional<Fold> detect_fold(const Branch& br) {
    if (br.fold) return br.fold;
    for (size_t i = 2; i < br.points.size(); ++i) {
        const double d1 = br.points[i - 1].param - br.points[i - 2].param;
        const double d2 = br.points[i].param - br.points[i - 1].param;
        if (d1 * d2 < 0.0)
            return Fold{br.points[i - 1].param,
                        std::abs(br.points[i].param - br.points[i - 2].param)};
    }
    return std::nullopt;
}

// Empirical solvability: does any first-solution pipeline converge?
inline bool solvable_first(const ProblemSpec& spec, PipelineOptions opt,
                           PipelineContext* ctx = nullptr,
                           bool require_strongly_negative = false) {
    opt.want_second = false;
    PipelineResult res = solve_Plambda(spec, opt, ctx);
    if (res.status != SolveStatus::converged || res.solutions.empty()) return false;
    if (!require_strongly_negative) return true;
    for (const auto& s : res.solutions)
        if (strongly_negative(s.u)) return true;
    return false;
}

// "All pipelines fail at 3 mesh resolutions": the operational nonexistence
// certificate (empirical, never a proof).
inline bool certify_unsolvable(const ProblemSpec& spec, PipelineOptions opt,
                               bool require_strongly_negative = false) {
    for (int factor : {1, 2, 4}) {
        ProblemSpec s = factor == 1 ? spec : detail::refine_spec(spec, factor);
        PipelineContext ctx;
        if (solvable_first(s, opt, &ctx, require_strongly_negative)) return false;
    }
    return true;
}

// Bisection refinement of a fold located between a solvable and an
// unsolvable parameter value.
inline Fold refine_fold(const ProblemSpec& base, BranchParam which,
                        double solvable_param, double unsolvable_param,
                        double window, PipelineOptions opt,
                        PipelineContext* ctx = nullptr) {
    double lo = solvable_param, hi = unsolvable_param;
    while (std::abs(hi - lo) > window) {
        const double mid = 0.5 * (lo + hi);
        if (solvable_first(detail::spec_at(base, which, mid), opt, ctx))
            lo = mid;
        else
            hi = mid;
    }
    return Fold{0.5 * (lo + hi), std::abs(hi - lo)};
}

// ---------------------------------------------------------------------------
// Region diagram of the (lambda, k) plane.
// ---------------------------------------------------------------------------

struct RegionDiagram {
    std::vector<double> lambda_samples;  // all sampled lambdas
    std::vector<double> kbar;            // NaN where not applicable/unresolved
    std::vector<double> ktilde1;
    std::vector<double> ktilde2;
    double gamma1 = std::numeric_limits<double>::quiet_NaN();
    double k0 = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> unresolved;
};

struct RegionOptions {
    PipelineOptions pipeline;
    double k_rel_tol = 0.02;  // bisection tolerance relative to k0
    double k_min_frac = 1e-3;
    int threads = 0;
};

inline RegionDiagram region_diagram(const ProblemSpec& base,
                                    const std::vector<double>& lambda_grid,
                                    const std::vector<double>& k_bounds,
                                    RegionOptions ropt = {}) {
    RegionDiagram out;
    out.lambda_samples = lambda_grid;
    const int L = static_cast<int>(lambda_grid.size());
    out.kbar.assign(L, std::numeric_limits<double>::quiet_NaN());
    out.ktilde1.assign(L, std::numeric_limits<double>::quiet_NaN());
    out.ktilde2.assign(L, std::numeric_limits<double>::quiet_NaN());

    SpectralReport g1 = gamma1(base.c, base.p, base.grid,
                               mix_seed(ropt.pipeline.seed, 17), 12, ropt.threads);
    SpectralReport kz = k0(base.h, base.p, base.mu, base.grid,
                           mix_seed(ropt.pipeline.seed, 19), 12, ropt.threads);
    out.gamma1 = g1.value;
    out.k0 = kz.plus_infinity ? std::numeric_limits<double>::infinity() : kz.value;

    const double kmax =
        k_bounds.empty() ? out.k0 : *std::max_element(k_bounds.begin(), k_bounds.end());
    const double kmin = ropt.k_min_frac * (std::isfinite(out.k0) ? out.k0 : kmax);

    std::vector<std::string> unresolved(L);
    parallel_for_indexed(L, ropt.threads, [&](int idx) {
        const double lam = lambda_grid[idx];
        PipelineOptions popt = ropt.pipeline;
        popt.want_second = false;
        popt.seed = mix_seed(ropt.pipeline.seed, 100 + idx);
        PipelineContext ctx;
        ProblemSpec spec0 = base;
        spec0.lambda = lam;
        const double tol = ropt.k_rel_tol * (std::isfinite(out.k0) ? out.k0 : kmax);

        auto bisect_k = [&](bool need_negative) -> double {
            ProblemSpec s_lo = with_k(spec0, kmin);
            if (!solvable_first(s_lo, popt, &ctx, need_negative))
                return std::numeric_limits<double>::quiet_NaN();
            double lo = kmin, hi = kmax;
            bool hi_unsolv = !solvable_first(with_k(spec0, hi), popt, &ctx, need_negative);
            int expand = 0;
            while (!hi_unsolv && expand++ < 8) {
                lo = hi;
                hi *= 2.0;
                hi_unsolv = !solvable_first(with_k(spec0, hi), popt, &ctx, need_negative);
            }
            if (!hi_unsolv) return std::numeric_limits<double>::infinity();
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                if (solvable_first(with_k(spec0, mid), popt, &ctx, need_negative))
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        };

        if (lam < out.gamma1 * (1.0 - 1e-9)) {
            const double kb = bisect_k(false);
            if (std::isnan(kb))
                unresolved[idx] = "kbar unresolved at lambda=" + std::to_string(lam);
            else
                out.kbar[idx] = kb;
        } else if (lam > out.gamma1 * (1.0 + 1e-9)) {
            const double k1 = bisect_k(true);
            const double k2 = bisect_k(false);
            if (std::isnan(k1))
                unresolved[idx] = "ktilde1 unresolved at lambda=" + std::to_string(lam);
            else
                out.ktilde1[idx] = k1;
            if (std::isnan(k2))
                unresolved[idx] += "|ktilde2 unresolved";
            else
                out.ktilde2[idx] = std::max(k2, k1);
        }
        // lam == gamma1: solvable only at k = 0; nothing to record
    });
    for (auto& u : unresolved)
        if (!u.empty()) out.unresolved.push_back(u);
    return out;
}

}  // namespace plap
