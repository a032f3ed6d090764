// Orchestration for (P_{lambda,k}): lower solution, first solution (box
// minimization or local minimum), second solution by mountain pass, and the
// transformed-solution verification. Uniqueness mode for lambda <= 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "plap/solvers.hpp"

namespace plap {

// Discrete order predicates: u >> 0 means positive at interior nodes with a
// strictly inward slope at the Dirichlet boundary.
inline bool strongly_positive(const Field& u) {
    const Grid& g = *u.grid;
    for (int i = g.first_free(); i <= g.last_free(); ++i)
        if (!(u.v[i] > 0.0)) return false;
    if (g.dirichlet_left && !(u.v[1] > u.v[0])) return false;
    return u.v[g.n - 2] > u.v[g.n - 1];
}
inline bool strongly_negative(const Field& u) {
    Field neg = scaled(u, -1.0);
    return strongly_positive(neg);
}

struct PlambdaSolution {
    SolveReport rep;          // transformed problem (Q) report
    Field u;                  // solution of (P_{lambda,k})
    double residual_P_inf = std::numeric_limits<double>::quiet_NaN();
    double residual_Q_inf = std::numeric_limits<double>::quiet_NaN();
    bool above_lower = false;     // u >= lower solution - tol
    bool above_alpha = false;     // v >= alpha_lambda - tol
};

struct PipelineOptions {
    std::uint64_t seed = 1;
    int threads = 0;
    int multistarts = 20;
    double grad_tol = 1e-10;
    int max_iter = 400;
    double distinct_tol = 1e-6;  // dedup threshold in sup norm
    bool want_second = true;     // mountain pass for lambda > 0
    int eigen_restarts = 12;
};

struct PipelineResult {
    SolveStatus status = SolveStatus::infeasible;  // overall
    std::vector<PlambdaSolution> solutions;        // deduplicated, by energy
    LowerSolutionResult lower;
    double gamma1_value = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> diagnostics;
};

// Cache for quantities shared across many solves on the same (grid, c, p).
struct PipelineContext {
    std::optional<SpectralReport> gamma1_rep;
    const SpectralReport& gamma1_for(const ProblemSpec& spec,
                                     const PipelineOptions& opt) {
        if (!gamma1_rep)
            gamma1_rep = gamma1(spec.c, spec.p, spec.grid, mix_seed(opt.seed, 91),
                                opt.eigen_restarts, opt.threads);
        return *gamma1_rep;
    }
};

namespace detail {

inline int datum_sign(const ProblemSpec& spec) {
    // +1 for kh >= 0 (not identically 0), -1 for kh <= 0 (not identically 0),
    // 0 for sign-changing or identically zero
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < spec.h.size(); ++i) {
        const double x = spec.k * spec.h.v[i];
        if (x > 0) has_pos = true;
        if (x < 0) has_neg = true;
    }
    if (has_pos && !has_neg) return 1;
    if (has_neg && !has_pos) return -1;
    return 0;
}

inline PlambdaSolution finalize_solution(const EnergyModel& m, SolveReport rep) {
    PlambdaSolution out;
    const double tau = m.spec.tau();
    out.above_alpha = true;
    for (int i = 0; i < rep.solution.size(); ++i) {
        if (rep.solution.v[i] < m.trunc.alpha_lambda.v[i] - 1e-8)
            out.above_alpha = false;
        // clamp roundoff-level dips below the transform domain
        rep.solution.v[i] = std::max(rep.solution.v[i], -tau * (1.0 - 1e-15));
    }
    out.u = hopf_cole_inv(rep.solution, m.spec.p, m.spec.mu);
    out.residual_P_inf = sup_norm_free(residual_P(out.u, m.spec));
    out.residual_Q_inf = sup_norm_free(residual_Q(rep.solution, m));
    out.above_lower = true;
    for (int i = 0; i < out.u.size(); ++i)
        if (out.u.v[i] < m.trunc.underline_u.v[i] - 1e-6) out.above_lower = false;
    out.rep = std::move(rep);
    return out;
}

inline void add_solution(std::vector<PlambdaSolution>& sols, const EnergyModel& m,
                         const SolveReport& rep, double distinct_tol) {
    if (!rep.ok()) return;
    for (const auto& s : sols)
        if (sup_distance(s.rep.solution, rep.solution) <= distinct_tol) return;
    sols.push_back(finalize_solution(m, rep));
}

// Ray descent along t*dir (c dir != 0): doubling t until the energy drops
// well below both endpoints. Returns nullopt if the energy never drops
// (e.g. lambda = 0 where the functional is coercive).
inline std::optional<Field> ray_descent_point(const EnergyModel& m,
                                              const Field& dir, double below) {
    double t = 1.0;
    const double tau = m.spec.tau();
    for (int it = 0; it < 200; ++it, t *= 1.5) {
        Field e2 = scaled(dir, t);
        bool domain_ok = true;
        for (double x : e2.v) domain_ok &= (x > -tau * (1.0 - 1e-12));
        if (!domain_ok) return std::nullopt;
        if (energy(e2, m) < below) return e2;
        if (t > 1e12) break;
    }
    return std::nullopt;
}

// Scaled-solution upper barrier for lambda in (0, gamma1), h >= 0:
// solve the lambda_0-problem with the datum, scale down until the discrete
// upper-solution inequality for (Q_lambda) verifies.
inline std::optional<Field> positive_upper_barrier(const EnergyModel& m,
                                                   double gamma1_value) {
    const ProblemSpec& spec = m.spec;
    const Grid& g = *spec.grid;
    const double lam0 = 0.5 * (spec.lambda + gamma1_value);
    SemilinearReaction r;
    r.p = spec.p;
    r.theta = lam0;
    r.cbar.resize(g.cells());
    r.rho.resize(g.cells());
    for (int c = 0; c < g.cells(); ++c) {
        r.cbar[c] = cell_mid(spec.c, c);
        r.rho[c] = spec.k * cell_mid(spec.h, c);
    }
    SolveOptions opt;
    opt.grad_tol = 1e-11;
    SolveReport w = minimize_then_polish(spec.grid, spec.p, r, Field(spec.grid), opt);
    if (!w.ok() || !(w.solution.max_value() > 0)) return std::nullopt;

    const double slack = 1e-9 * (1.0 + detail::datum_scale(spec));
    double l = 1.0;
    for (int it = 0; it < 60; ++it, l *= 0.5) {
        Field beta = scaled(w.solution, l);
        if (discrete_upper_Q(m, beta, slack)) return beta;
    }
    return std::nullopt;
}

// Negative upper barrier for lambda > gamma1, h >= 0: solve the
// lambda_0-problem near gamma1 by root-finding from negative seeds (the
// discrete counterpart of the anti-maximum construction), then scale down.
inline std::optional<Field> negative_upper_barrier(const EnergyModel& m,
                                                   double gamma1_value,
                                                   const Field& eigenfunction) {
    const ProblemSpec& spec = m.spec;
    const Grid& g = *spec.grid;
    const double slack = 1e-9 * (1.0 + detail::datum_scale(spec));
    for (double frac : {0.25, 0.1, 0.5}) {
        const double lam0 =
            gamma1_value + frac * std::min(spec.lambda - gamma1_value, gamma1_value);
        SemilinearReaction r;
        r.p = spec.p;
        r.theta = lam0;
        r.cbar.resize(g.cells());
        r.rho.resize(g.cells());
        for (int c = 0; c < g.cells(); ++c) {
            r.cbar[c] = cell_mid(spec.c, c);
            r.rho[c] = spec.k * cell_mid(spec.h, c);
        }
        for (double t0 : {0.1, 1.0, 10.0}) {
            Field start = scaled(eigenfunction, -t0 * (1.0 + datum_scale(spec)));
            SolveOptions opt;
            opt.grad_tol = 1e-11;
            opt.max_iter = 200;
            SolveReport w = newton_root(spec.grid, spec.p, r, start, opt);
            if (!w.ok() || !strongly_negative(w.solution)) continue;
            double l = 1.0;
            for (int it = 0; it < 60; ++it, l *= 0.5) {
                Field beta = scaled(w.solution, l);
                bool above_alpha = true;
                for (int i = 0; i < beta.size(); ++i)
                    above_alpha &= beta.v[i] >= m.trunc.alpha_lambda.v[i];
                if (above_alpha && discrete_upper_Q(m, beta, slack)) return beta;
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Multistart critical-point search; returns every distinct converged field.
// For lambda <= 0 the theory says the set has one element; the scatter is
// what the uniqueness harness measures.
inline std::vector<SolveReport> multistart_solutions(const EnergyModel& m,
                                                     const PipelineOptions& opt) {
    const int M = opt.multistarts;
    std::vector<SolveReport> raw(M);
    parallel_for_indexed(M, opt.threads, [&](int s) {
        SolveOptions sopt;
        sopt.grad_tol = opt.grad_tol;
        sopt.max_iter = opt.max_iter;
        Field start(m.spec.grid);
        if (s > 0) {
            auto rng = make_rng(opt.seed, 7000 + s);
            start = random_field(m.spec.grid, rng, 0.5 + 0.2 * (s % 5));
        }
        raw[s] = find_local_min(m, start, sopt);
    });
    std::vector<SolveReport> out;
    for (auto& r : raw) {
        if (!r.ok()) continue;
        bool dup = false;
        for (const auto& o : out)
            dup |= sup_distance(o.solution, r.solution) <= opt.distinct_tol;
        if (!dup) out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(),
              [](const SolveReport& a, const SolveReport& b) {
                  return a.energy < b.energy;
              });
    return out;
}

inline PipelineResult solve_Plambda(const ProblemSpec& spec, PipelineOptions opt = {},
                                    PipelineContext* ctx = nullptr) {
    spec.validate_constant_mu();
    PipelineResult out;
    out.lower = build_lower_solution(spec);
    if (out.lower.status != SolveStatus::converged) {
        out.diagnostics.push_back("lower solution failed: " + out.lower.lineage);
        return out;
    }
    EnergyModel model(spec, out.lower.trunc);
    SolveOptions sopt;
    sopt.grad_tol = opt.grad_tol;
    sopt.max_iter = opt.max_iter;

    if (spec.lambda <= 0.0) {
        // coercive / limit-coercive: global minimization, uniqueness regime
        auto sols = multistart_solutions(model, opt);
        if (sols.empty()) {
            out.status = SolveStatus::diverged;
            out.diagnostics.push_back("no converged minimizer over multistarts");
            return out;
        }
        if (sols.size() > 1)
            out.diagnostics.push_back("uniqueness regime returned " +
                                      std::to_string(sols.size()) +
                                      " distinct fields");
        detail::add_solution(out.solutions, model, sols.front(), opt.distinct_tol);
        out.status = out.solutions.empty() ? SolveStatus::diverged
                                           : SolveStatus::converged;
        return out;
    }

    // lambda > 0
    PipelineContext local_ctx;
    PipelineContext& cx = ctx ? *ctx : local_ctx;
    const SpectralReport& g1 = cx.gamma1_for(spec, opt);
    out.gamma1_value = g1.value;
    const int hsign = detail::datum_sign(spec);

    SolveReport first;
    first.status = SolveStatus::infeasible;

    if (hsign < 0) {
        // kh <= 0: zero is an upper solution of (Q_lambda)
        OrderedPair pair{out.lower.trunc.alpha_lambda, Field(spec.grid, 0.0)};
        first = solve_between(model, pair, sopt);
        if (first.ok()) first.lineage += "|box[alpha,0]";
    } else if (hsign > 0) {
        if (g1.converged && spec.lambda < g1.value * (1.0 - 1e-10)) {
            auto beta = detail::positive_upper_barrier(model, g1.value);
            if (beta) {
                OrderedPair pair{Field(spec.grid, 0.0), *beta};
                first = solve_between(model, pair, sopt);
                if (first.ok()) first.lineage += "|box[0,beta]";
            } else {
                out.diagnostics.push_back("positive upper barrier not found");
            }
        } else if (g1.converged && spec.lambda > g1.value * (1.0 + 1e-10)) {
            auto beta = detail::negative_upper_barrier(model, g1.value, g1.minimizer);
            if (beta) {
                OrderedPair pair{out.lower.trunc.alpha_lambda, *beta};
                first = solve_between(model, pair, sopt);
                if (first.ok()) first.lineage += "|box[alpha,beta<0]";
            } else {
                out.diagnostics.push_back("negative upper barrier not found");
            }
        } else {
            out.diagnostics.push_back("lambda at gamma1: no barrier construction");
        }
    }

    if (!first.ok()) {
        // fallback: unconstrained local minimum from rest, the transformed
        // datum response, and perturbed starts
        for (int s = 0; s < 7 && !first.ok(); ++s) {
            Field start(spec.grid);
            if (s == 1) {
                Field kh = scaled(spec.h, spec.k);
                SolveOptions popt2;
                popt2.grad_tol = 1e-9;
                SolveReport w = p_poisson_solve(spec.grid, spec.p, kh, popt2);
                if (!w.ok()) continue;
                start = hopf_cole(w.solution, spec.p, spec.mu);
            } else if (s > 1) {
                auto rng = make_rng(opt.seed, 300 + s);
                start = random_field(spec.grid, rng, 0.3 * s);
                if (hsign > 0 && spec.lambda > g1.value)
                    start = scaled(g1.minimizer, -0.5 * s);
            }
            SolveReport cand = find_local_min(model, start, sopt);
            if (cand.ok()) {
                first = cand;
                first.lineage += "|fallback_start_" + std::to_string(s);
            }
        }
    }
    if (!first.ok()) {
        out.status = first.status == SolveStatus::infeasible ? SolveStatus::diverged
                                                             : first.status;
        out.diagnostics.push_back("first solution not found (lineage " +
                                  first.lineage + ")");
        return out;
    }
    detail::add_solution(out.solutions, model, first, opt.distinct_tol);

    if (opt.want_second) {
        // ray direction with c * dir != 0: the weighted first eigenfunction
        Field dir = g1.converged ? g1.minimizer : Field(spec.grid, 0.0);
        if (!g1.converged) {
            dir = make_field(spec.grid, [&](double x) {
                const double t = (x - spec.grid->a) / (spec.grid->b - spec.grid->a);
                return std::sin(M_PI * t);
            });
        }
        const double below =
            std::min(first.energy, energy(Field(spec.grid), model)) -
            std::max(1.0, 0.5 * std::abs(first.energy));
        auto e2 = detail::ray_descent_point(model, dir, below);
        if (e2) {
            MountainPassOptions mopt;
            SolveReport second = mountain_pass(model, first.solution, *e2, mopt, sopt);
            if (second.ok())
                detail::add_solution(out.solutions, model, second, opt.distinct_tol);
            else
                out.diagnostics.push_back("mountain pass: " + second.lineage +
                                          " status " + to_string(second.status));
        } else {
            out.diagnostics.push_back("ray descent found no low-energy endpoint");
        }
    }

    std::sort(out.solutions.begin(), out.solutions.end(),
              [](const PlambdaSolution& a, const PlambdaSolution& b) {
                  return a.rep.energy < b.rep.energy;
              });
    out.status = SolveStatus::converged;
    return out;
}

}  // namespace plap
