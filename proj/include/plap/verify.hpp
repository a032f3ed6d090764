// Executable property checks on the solution structure: the comparison
// principle, Picone's identity, the p = 4 non-uniqueness counterexample,
// and the a priori lower bound. Checks never report `fail` when the
// discrete data cannot certify the hypotheses; that outcome is
// `inconclusive`.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "plap/operators.hpp"
#include "plap/pipeline.hpp"

namespace plap {

enum class PropertyStatus { pass, fail, inconclusive };

inline const char* to_string(PropertyStatus s) {
    switch (s) {
        case PropertyStatus::pass: return "pass";
        case PropertyStatus::fail: return "fail";
        case PropertyStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

struct PropertyReport {
    std::string id;
    PropertyStatus status = PropertyStatus::inconclusive;
    std::string message;
    double tolerance = 0.0;
    // worst-case witness
    int witness_index = -1;
    double witness_value = std::numeric_limits<double>::quiet_NaN();

    bool passed() const { return status == PropertyStatus::pass; }
};

// Comparison principle for lambda <= 0: a verified lower solution lies below
// a verified upper solution. Verification is the signed strong residual at
// mesh tolerance; unverifiable hypotheses yield `inconclusive`.
inline PropertyReport check_comparison(const ProblemSpec& spec, const Field& u1,
                                       const Field& u2) {
    PropertyReport rep;
    rep.id = "comparison_principle";
    const double scale = 1.0 + detail::datum_scale(spec);
    // signed residuals are certified at truncation-error level only
    rep.tolerance = 50.0 * spec.grid->dx * spec.grid->dx * scale;
    if (spec.lambda > 0.0) {
        rep.message = "requires lambda <= 0";
        return rep;
    }
    Field r1 = residual_P(u1, spec), r2 = residual_P(u2, spec);
    double worst1 = 0.0, worst2 = 0.0;
    for (int i = 0; i < r1.size(); ++i) {
        worst1 = std::max(worst1, r1.v[i]);    // lower: residual <= tol
        worst2 = std::max(worst2, -r2.v[i]);   // upper: residual >= -tol
    }
    if (worst1 > rep.tolerance || worst2 > rep.tolerance) {
        rep.message = "lower/upper residual signs not certified (lower excess " +
                      std::to_string(worst1) + ", upper excess " +
                      std::to_string(worst2) + ")";
        return rep;
    }
    const double order_tol = 10.0 * spec.grid->dx * scale;
    for (int i = 0; i < u1.size(); ++i) {
        if (u1.v[i] > u2.v[i] + order_tol) {
            rep.status = PropertyStatus::fail;
            rep.witness_index = i;
            rep.witness_value = u1.v[i] - u2.v[i];
            rep.message = "ordering violated";
            return rep;
        }
    }
    rep.status = PropertyStatus::pass;
    rep.message = "u1 <= u2 nodewise";
    return rep;
}

// Picone: L(u,v) = R(u,v) >= 0 cellwise, with equality only on proportional
// pairs. L uses the three-term form, R the transport form; they are two
// associations of the same cell quantities, so the identity holds to
// roundoff while nonnegativity is the substantive inequality.
struct PiconeReport {
    PropertyReport report;
    double max_LmR = 0.0;
    double min_L = 0.0;
    double L1_norm = 0.0;
    double fitted_k = std::numeric_limits<double>::quiet_NaN();
};

inline PiconeReport check_picone(const Field& u, const Field& v, double p,
                                 double tol = 1e-10) {
    PiconeReport out;
    PropertyReport& rep = out.report;
    rep.id = "picone_identity";
    rep.tolerance = tol;
    const Grid& g = *u.grid;
    for (int i = 0; i < g.n; ++i) {
        if (u.v[i] < 0.0) {
            rep.message = "requires u >= 0";
            return out;
        }
        if (!g.is_dirichlet(i) && !(v.v[i] > 0.0)) {
            rep.message = "requires v > 0 at interior nodes";
            return out;
        }
    }
    double scale = 0.0;
    double minL = std::numeric_limits<double>::infinity();
    double maxdiff = 0.0, l1 = 0.0;
    for (int c = 0; c < g.cells(); ++c) {
        const double du = cell_slope(u, c), dv = cell_slope(v, c);
        const double um = cell_mid(u, c), vm = cell_mid(v, c);
        if (!(vm > 0.0)) {
            rep.message = "vanishing v at a cell midpoint";
            return out;
        }
        const double t = um / vm;
        const double tp = std::pow(t, p);
        const double tpm1 = std::pow(t, p - 1.0);
        const double adup = std::pow(std::abs(du), p);
        const double advp = std::pow(std::abs(dv), p);
        const double L = adup + (p - 1.0) * tp * advp - p * tpm1 * phi_p(dv, p) * du;
        const double transport = p * tpm1 * du - (p - 1.0) * tp * dv;
        const double R = adup - transport * phi_p(dv, p);
        scale = std::max(scale, std::abs(L));
        minL = std::min(minL, L);
        maxdiff = std::max(maxdiff, std::abs(L - R));
        l1 += g.cell_w[c] * std::abs(L);
        if (L < -tol * (1.0 + scale)) rep.witness_index = c;
    }
    out.max_LmR = maxdiff;
    out.min_L = minL;
    out.L1_norm = l1;
    const double rel = tol * (1.0 + scale);
    if (maxdiff > rel || minL < -rel) {
        rep.status = PropertyStatus::fail;
        rep.witness_value = std::min(minL, -maxdiff);
        rep.message = "identity or nonnegativity violated";
        return out;
    }
    // equality detection: ||L||_1 tiny forces u = k v
    if (l1 <= 1e-10) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.n; ++i) {
            num += u.v[i] * v.v[i];
            den += v.v[i] * v.v[i];
        }
        out.fitted_k = den > 0 ? num / den : 0.0;
        for (int i = 0; i < g.n; ++i) {
            if (std::abs(u.v[i] - out.fitted_k * v.v[i]) >
                1e-6 * (1.0 + std::abs(out.fitted_k) * v.max_abs())) {
                rep.status = PropertyStatus::fail;
                rep.message = "L = 0 but the pair is not proportional";
                rep.witness_index = i;
                return out;
            }
        }
        rep.message = "equality case, fitted k = " + std::to_string(out.fitted_k);
    } else {
        rep.message = "strict inequality on a positive-measure set";
    }
    rep.status = PropertyStatus::pass;
    return out;
}

// Non-uniqueness on the 2-ball with p = 4: both 0 and (R^2-r^2)/8 solve
// -Delta_4 u = |grad u|^2; residuals vanish at the refinement rate while
// the two fields stay apart.
struct CounterexampleReport {
    PropertyReport report;
    std::vector<double> residuals;  // per resolution, for u2
    double center_value = std::numeric_limits<double>::quiet_NaN();
};

inline CounterexampleReport check_nonuniqueness_counterexample(int n,
                                                               double R = 1.0) {
    CounterexampleReport out;
    PropertyReport& rep = out.report;
    rep.id = "nonuniqueness_p4_counterexample";
    double prev = 0.0;
    bool rates_ok = true;
    for (int k = 0; k < 3; ++k) {
        const int nk = (n - 1) * (1 << k) + 1;
        auto g = make_radial_grid(R, 2, nk);
        GeneralQuasilinearProblem prob;
        prob.H_term = [](double, double, double xi) { return -xi * xi; };
        prob.f_rhs = Field(g);
        Field u2 = make_field(g, [R](double r) { return (R * R - r * r) / 8.0; });
        const double res2 = sup_norm_free(residual_general(u2, prob, 4.0));
        const double res0 = sup_norm_free(residual_general(Field(g), prob, 4.0));
        out.residuals.push_back(res2);
        if (res0 != 0.0) rates_ok = false;
        if (k > 0 && !(prev / res2 >= 1.8)) rates_ok = false;
        prev = res2;
        if (k == 0) out.center_value = u2.v[0];
    }
    rep.tolerance = 1.8;
    if (!rates_ok) {
        rep.status = PropertyStatus::fail;
        rep.message = "refinement rate below 1.8 per doubling";
        rep.witness_value = out.residuals.back();
        return out;
    }
    if (std::abs(out.center_value - R * R / 8.0) > 1e-14) {
        rep.status = PropertyStatus::fail;
        rep.message = "center value mismatch";
        return out;
    }
    rep.status = PropertyStatus::pass;
    rep.message = "two distinct solutions with vanishing residuals";
    return out;
}

// Lower bound: every computed solution stays above -M_lambda, and the bound
// is unchanged when h+ is doubled.
inline PropertyReport check_lower_bound(const ProblemSpec& spec,
                                        const std::vector<Field>& solutions) {
    PropertyReport rep;
    rep.id = "a_priori_lower_bound";
    if (spec.lambda < 0.0) {
        rep.message = "requires lambda >= 0";
        return rep;
    }
    auto lb = estimate_lower_bound(spec);
    if (lb.status != SolveStatus::converged) {
        rep.message = "bound surrogate did not converge";
        return rep;
    }
    ProblemSpec doubled = spec;
    for (int i = 0; i < doubled.h.size(); ++i)
        if (doubled.h.v[i] > 0) doubled.h.v[i] *= 2.0;
    auto lb2 = estimate_lower_bound(doubled);
    if (lb2.status != SolveStatus::converged ||
        std::abs(lb2.M - lb.M) > 1e-12 * (1.0 + lb.M)) {
        rep.status = PropertyStatus::fail;
        rep.message = "bound depends on h+";
        rep.witness_value = lb2.M - lb.M;
        return rep;
    }
    rep.tolerance = 1e-8;
    const double floor = -(lb.M + rep.tolerance);
    for (const auto& u : solutions) {
        const double mn = u.min_value();
        if (mn < floor) {
            rep.status = PropertyStatus::fail;
            rep.message = "solution dips below -M_lambda";
            rep.witness_value = mn + lb.M;
            return rep;
        }
    }
    rep.status = PropertyStatus::pass;
    rep.message = "min u > -M_lambda (M = " + std::to_string(lb.M) +
                  "), independent of h+";
    return rep;
}

// The default verify suite run by the CLI. Checks are independent and run
// in parallel; reports are emitted in fixed id order.
inline std::vector<PropertyReport> run_verify_suite(const ProblemSpec& base,
                                                    std::uint64_t seed,
                                                    int threads = 0) {
    std::vector<std::vector<PropertyReport>> slots(5);
    const GridPtr& g = base.grid;

    auto block_comparison = [&](std::vector<PropertyReport>& out) {
        ProblemSpec s = base;
        s.lambda = std::min(base.lambda, 0.0);
        PipelineOptions popt;
        popt.seed = seed;
        popt.threads = threads;
        popt.multistarts = 6;
        ProblemSpec s_lo = s, s_hi = s;
        for (int i = 0; i < s.h.size(); ++i) {
            const double bump = 0.5 * (1.0 + std::abs(s.h.v[i]));
            s_lo.h.v[i] = s.h.v[i] - bump;
            s_hi.h.v[i] = s.h.v[i] + bump;
        }
        PipelineResult r_lo = solve_Plambda(s_lo, popt);
        PipelineResult r_hi = solve_Plambda(s_hi, popt);
        if (r_lo.status == SolveStatus::converged &&
            r_hi.status == SolveStatus::converged) {
            out.push_back(check_comparison(s, r_lo.solutions.front().u,
                                           r_hi.solutions.front().u));
        } else {
            PropertyReport rep;
            rep.id = "comparison_principle";
            rep.message = "auxiliary solves failed";
            out.push_back(rep);
        }
    };

    auto block_picone = [&](std::vector<PropertyReport>& out) {
        Field v = make_field(g, [&](double x) {
            const double t = (x - g->a) / (g->b - g->a);
            return std::sin(M_PI * t) + 0.1 * t * (1 - t);
        });
        PiconeReport prop = check_picone(scaled(v, 2.0), v, base.p);
        prop.report.id = "picone_proportional";
        out.push_back(prop.report);
        auto rng = make_rng(seed, 404);
        Field u = random_field(g, rng);
        for (double& x : u.v) x = std::abs(x);
        u.enforce_dirichlet();
        PiconeReport rnd = check_picone(u, v, base.p);
        rnd.report.id = "picone_random_pair";
        if (rnd.report.status == PropertyStatus::pass && rnd.L1_norm <= 1e-10) {
            rnd.report.status = PropertyStatus::fail;
            rnd.report.message = "random pair reported as proportional";
        }
        out.push_back(rnd.report);
    };

    auto block_counterexample = [&](std::vector<PropertyReport>& out) {
        out.push_back(check_nonuniqueness_counterexample(129).report);
    };

    auto block_lower_bound = [&](std::vector<PropertyReport>& out) {
        ProblemSpec s = base;
        s.lambda = std::max(base.lambda, 0.0);
        PipelineOptions popt;
        popt.seed = seed;
        popt.threads = threads;
        PipelineResult res = solve_Plambda(s, popt);
        std::vector<Field> sols;
        for (const auto& ps : res.solutions) sols.push_back(ps.u);
        out.push_back(check_lower_bound(s, sols));
    };

    auto block_uniqueness = [&](std::vector<PropertyReport>& out) {
        PropertyReport rep;
        rep.id = "uniqueness_multistart";
        rep.tolerance = 1e-6;
        ProblemSpec s = base;
        s.lambda = std::min(base.lambda, 0.0);
        auto ls = build_lower_solution(s);
        if (ls.status == SolveStatus::converged) {
            EnergyModel m(s, ls.trunc);
            PipelineOptions popt;
            popt.seed = seed;
            popt.threads = threads;
            popt.multistarts = 20;
            auto sols = multistart_solutions(m, popt);
            if (sols.empty()) {
                rep.message = "no converged starts";
            } else {
                double diam = 0.0;
                for (const auto& a : sols)
                    for (const auto& b : sols)
                        diam = std::max(diam, sup_distance(a.solution, b.solution));
                rep.witness_value = diam;
                rep.status = diam <= rep.tolerance ? PropertyStatus::pass
                                                   : PropertyStatus::fail;
                rep.message = "multistart diameter " + std::to_string(diam);
            }
        } else {
            rep.message = "lower solution failed";
        }
        out.push_back(rep);
    };

    parallel_for_indexed(5, threads, [&](int b) {
        switch (b) {
            case 0: block_comparison(slots[0]); break;
            case 1: block_picone(slots[1]); break;
            case 2: block_counterexample(slots[2]); break;
            case 3: block_lower_bound(slots[3]); break;
            case 4: block_uniqueness(slots[4]); break;
        }
    });
    std::vector<PropertyReport> out;
    for (auto& s : slots)
        for (auto& r : s) out.push_back(std::move(r));
    return out;
}

}  // namespace plap
