// Problem data for -Delta_p u = lambda c |u|^{p-2} u + mu |grad u|^p + k h,
// the truncation data built from the lower solution, and the reaction
// f_lambda / F_lambda of the transformed problem.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"

namespace plap {

struct ProblemSpec {
    GridPtr grid;
    double p = 2.0;
    double mu = 1.0;      // constant-mu coefficient
    double lambda = 0.0;
    double k = 1.0;       // scaling of h in (P_{lambda,k})
    Field c;              // coefficient, c >= 0 and not identically 0
    Field h;              // datum
    double mu_plus = 0.0;   // bounds for the variable-mu coercive check
    double mu_minus = 0.0;

    double tau() const { return (p - 1.0) / mu; }
    GFun gfun() const { return GFun(p, mu); }

    void validate() const {
        if (!grid) throw std::invalid_argument("ProblemSpec: missing grid");
        if (!(p > 1.0)) throw std::invalid_argument("ProblemSpec: need p > 1");
        if (!(k >= 0.0)) throw std::invalid_argument("ProblemSpec: need k >= 0");
        if (c.grid != grid || h.grid != grid)
            throw std::invalid_argument("ProblemSpec: c/h not on the grid");
        double cmax = 0.0;
        for (double x : c.v) {
            if (x < 0.0) throw std::invalid_argument("ProblemSpec: c must be >= 0");
            cmax = std::max(cmax, x);
        }
        if (!(cmax > 0.0))
            throw std::invalid_argument("ProblemSpec: c must be positive somewhere");
    }
    void validate_constant_mu() const {
        validate();
        if (!(mu > 0.0)) throw std::invalid_argument("ProblemSpec: need mu > 0");
    }
};

inline ProblemSpec with_lambda(ProblemSpec s, double lam) {
    s.lambda = lam;
    return s;
}
inline ProblemSpec with_k(ProblemSpec s, double kk) {
    s.k = kk;
    return s;
}

// alpha_lambda = tau (e^{u_lower/tau} - 1), the transformed lower solution.
struct TruncationData {
    Field alpha_lambda;
    Field underline_u;
    double gap = 0.0;  // min_i (alpha_lambda_i + tau) > 0

    static TruncationData from_lower(const Field& u_lower, double p, double mu) {
        TruncationData t;
        t.underline_u = u_lower;
        t.alpha_lambda = hopf_cole(u_lower, p, mu);
        const double tau = (p - 1.0) / mu;
        t.gap = t.alpha_lambda.min_value() + tau;
        return t;
    }
};

// Nodal reaction of the transformed problem (Q_lambda): frozen below the
// seam alpha_lambda(x), ties at the seam go to the upper branch.
inline double f_lambda(int i, double s, const ProblemSpec& spec,
                       const TruncationData& tr) {
    const GFun gf = spec.gfun();
    const double a = tr.alpha_lambda.v[i];
    const double se = (s >= a) ? s : a;
    return spec.lambda * spec.c.v[i] * gf.g(se) +
           std::pow(1.0 + se / gf.tau, spec.p - 1.0) * spec.k * spec.h.v[i];
}

inline double F_lambda(int i, double s, const ProblemSpec& spec,
                       const TruncationData& tr) {
    const GFun gf = spec.gfun();
    const double a = tr.alpha_lambda.v[i];
    const double tau = gf.tau;
    const double kh = spec.k * spec.h.v[i];
    const double lc = spec.lambda * spec.c.v[i];
    if (s >= a)
        return lc * gf.G(s) + (tau / spec.p) * std::pow(1.0 + s / tau, spec.p) * kh;
    const double Fa = lc * gf.G(a) + (tau / spec.p) * std::pow(1.0 + a / tau, spec.p) * kh;
    const double fa = lc * gf.g(a) + std::pow(1.0 + a / tau, spec.p - 1.0) * kh;
    return Fa + fa * (s - a);
}

inline double df_lambda(int i, double s, const ProblemSpec& spec,
                        const TruncationData& tr, double eps = 0.0) {
    const GFun gf = spec.gfun();
    const double a = tr.alpha_lambda.v[i];
    if (s < a) return 0.0;
    const double tau = gf.tau;
    return spec.lambda * spec.c.v[i] * gf.g_prime(s, eps) +
           (spec.p - 1.0) / tau * std::pow(1.0 + s / tau, spec.p - 2.0) *
               spec.k * spec.h.v[i];
}

// ---------------------------------------------------------------------------
// Cell reactions: energies integrate F over cells at midpoint values, so the
// assembly routines consume reactions sampled per cell. Each type provides
//   F(c, s), f(c, s) = dF/ds, df(c, s, eps).
// ---------------------------------------------------------------------------

struct ZeroReaction {
    double F(int, double) const { return 0.0; }
    double f(int, double) const { return 0.0; }
    double df(int, double, double) const { return 0.0; }
};

// F = rho_c * s  (fixed datum; p-Poisson problems)
struct LinearDatumReaction {
    std::vector<double> rho;  // per cell
    double F(int c, double s) const { return rho[c] * s; }
    double f(int c, double) const { return rho[c]; }
    double df(int, double, double) const { return 0.0; }
};

// F = theta * cbar_c |s|^p / p + rho_c * s  (semilinear eigen-type problems)
struct SemilinearReaction {
    double p;
    double theta;
    std::vector<double> cbar;
    std::vector<double> rho;
    double F(int c, double s) const {
        return theta * cbar[c] * std::pow(std::abs(s), p) / p + rho[c] * s;
    }
    double f(int c, double s) const { return theta * cbar[c] * phi_p(s, p) + rho[c]; }
    double df(int c, double s, double eps) const {
        return theta * cbar[c] * phi_p_weight(s, p, eps);
    }
};

// Reaction of (Q_lambda) with the alpha_lambda freeze, coefficients averaged
// onto cells.
struct QReaction {
    GFun gf;
    double p;
    double lambda;
    double k;
    std::vector<double> cbar;
    std::vector<double> hbar;
    std::vector<double> alpha;  // seam per cell

    QReaction(const ProblemSpec& spec, const TruncationData& tr)
        : gf(spec.gfun()), p(spec.p), lambda(spec.lambda), k(spec.k) {
        const Grid& g = *spec.grid;
        cbar.resize(g.cells());
        hbar.resize(g.cells());
        alpha.resize(g.cells());
        for (int c = 0; c < g.cells(); ++c) {
            cbar[c] = cell_mid(spec.c, c);
            hbar[c] = cell_mid(spec.h, c);
            alpha[c] = cell_mid(tr.alpha_lambda, c);
        }
    }

    double F(int c, double s) const {
        const double a = alpha[c];
        const double tau = gf.tau;
        if (s >= a)
            return lambda * cbar[c] * gf.G(s) +
                   (tau / p) * std::pow(1.0 + s / tau, p) * k * hbar[c];
        const double Fa = lambda * cbar[c] * gf.G(a) +
                          (tau / p) * std::pow(1.0 + a / tau, p) * k * hbar[c];
        return Fa + f_at(c, a) * (s - a);
    }
    double f(int c, double s) const { return f_at(c, std::max(s, alpha[c])); }
    double df(int c, double s, double eps) const {
        if (s < alpha[c]) return 0.0;
        return lambda * cbar[c] * gf.g_prime(s, eps) +
               (p - 1.0) / gf.tau * std::pow(1.0 + s / gf.tau, p - 2.0) * k * hbar[c];
    }
    // partials for continuation (frozen branch below the seam included)
    double dfdlambda(int c, double s) const {
        return cbar[c] * gf.g(std::max(s, alpha[c]));
    }
    double dfdk(int c, double s) const {
        return std::pow(1.0 + std::max(s, alpha[c]) / gf.tau, p - 1.0) * hbar[c];
    }

private:
    double f_at(int c, double s) const {
        return lambda * cbar[c] * gf.g(s) +
               std::pow(1.0 + s / gf.tau, p - 1.0) * k * hbar[c];
    }
};

// Reaction of the truncated lower-solution problem (transformed): the
// truncation acts inside g at level u = -ktrunc, the datum factor stays live.
//   f(c, s) = lamc_c * g_k(s) + (1+s/tau)^{p-1} rho_c,  g_k as in the notes:
//   g_k(s) = g(s) for s >= s_k, -(1+s/tau)^{p-1} ktrunc^{p-1} below,
//   s_k = tau (e^{-ktrunc/tau} - 1).
struct TruncatedLowerReaction {
    GFun gf;
    double p;
    double ktrunc;
    double sk;
    std::vector<double> lamc;
    std::vector<double> rho;

    TruncatedLowerReaction(const ProblemSpec& spec, double ktrunc_,
                           const std::vector<double>& rho_cells)
        : gf(spec.gfun()), p(spec.p), ktrunc(ktrunc_), rho(rho_cells) {
        sk = gf.tau * std::expm1(-ktrunc / gf.tau);
        const Grid& g = *spec.grid;
        lamc.resize(g.cells());
        for (int c = 0; c < g.cells(); ++c)
            lamc[c] = spec.lambda * cell_mid(spec.c, c);
    }

    double pow1(double s, double q) const {
        const double base = 1.0 + s / gf.tau;
        return base <= 0.0 ? 0.0 : std::pow(base, q);
    }

    double gk(double s) const {
        if (s >= sk) return gf.g(s);
        return -pow1(s, p - 1.0) * std::pow(ktrunc, p - 1.0);
    }
    double Gk(double s) const {
        if (s >= sk) return gf.G(s);
        const double tau = gf.tau;
        const double kp = std::pow(ktrunc, p - 1.0);
        return gf.G(sk) - kp * (tau / p) * (pow1(s, p) - pow1(sk, p));
    }
    double F(int c, double s) const {
        return lamc[c] * Gk(s) + (gf.tau / p) * pow1(s, p) * rho[c];
    }
    double f(int c, double s) const {
        return lamc[c] * gk(s) + pow1(s, p - 1.0) * rho[c];
    }
    double df(int c, double s, double eps) const {
        const double tau = gf.tau;
        double d = (p - 1.0) / tau * pow1(s, p - 2.0) * rho[c];
        if (s >= sk)
            d += lamc[c] * gf.g_prime(s, eps);
        else
            d += -lamc[c] * std::pow(ktrunc, p - 1.0) * (p - 1.0) / tau * pow1(s, p - 2.0);
        return d;
    }
};

}  // namespace plap
