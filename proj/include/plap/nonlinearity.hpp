// The scalar nonlinearity g and its primitives G, H underlying the
// transformed problem, plus the Hopf-Cole change of variable.
//
// With tau = (p-1)/mu and m(s) = tau*(1+s/tau)*ln(1+s/tau) for s > -tau,
//   g(s) = |m(s)|^{p-2} m(s),  g = 0 for s <= -tau,
//   G(s) = int_0^s g,          H(s) = g(s) s / p - G(s).
// Substituting u = tau*ln(1+s/tau) reduces G to incomplete-gamma integrals,
//   G(s) = tau^p p^{-p} * int_0^{pY} e^z z^{p-1} dz          (Y >= 0),
//   G(s) = tau^p p^{-p} * gamma_lower(p, -pY)                (Y < 0),
// with Y = ln(1+s/tau), which is what the evaluation below uses.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "plap/grid.hpp"

namespace plap {

inline double phi_p(double t, double p) {
    if (t == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

// derivative weight of phi_p, regularized: (t^2 + eps^2)^{(p-2)/2} * (p-1)
inline double phi_p_weight(double t, double p, double eps) {
    return (p - 1.0) * std::pow(t * t + eps * eps, 0.5 * (p - 2.0));
}

namespace detail {

// int_0^x e^{-z} z^{a-1} dz, a > 0, x >= 0 (lower incomplete gamma).
inline double gamma_lower(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        // series representation
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int k = 0; k < 500; ++k) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(-x + a * std::log(x));
    }
    // continued fraction for the upper tail (modified Lentz)
    const double fpmin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double dd = 1.0 / b;
    double h = dd;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::abs(dd) < fpmin) dd = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        dd = 1.0 / dd;
        double del = dd * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    double upper = std::exp(-x + a * std::log(x)) * h;
    return std::tgamma(a) - upper;
}

// int_0^x e^{z} z^{a-1} dz, a > 0, x >= 0.
inline double exp_moment(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < 60.0) {
        // sum_k x^{a+k} / (k! (a+k)); every term positive
        double term = std::pow(x, a) / a;  // k = 0
        double sum = term;
        double fact_ratio = 1.0;
        for (int k = 1; k < 400; ++k) {
            fact_ratio *= x / k;
            double t = std::pow(x, a) * fact_ratio / (a + k);
            sum += t;
            if (t < sum * 1e-17) break;
        }
        return sum;
    }
    // asymptotic: e^x x^{a-1} sum_k prod_{j=1..k}(a-j)/x^k, truncated at the
    // smallest term
    double pref = std::exp(x + (a - 1.0) * std::log(x));
    if (!std::isfinite(pref)) return std::numeric_limits<double>::infinity();
    double term = 1.0, sum = 1.0, prev = std::abs(term);
    for (int k = 1; k < 200; ++k) {
        term *= (a - k) / x;
        if (std::abs(term) >= prev) break;
        prev = std::abs(term);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return pref * sum;
}

}  // namespace detail

// Scalar nonlinearity bundle for fixed (p, mu).
struct GFun {
    double p;
    double mu;
    double tau;  // (p-1)/mu

    GFun(double p_, double mu_) : p(p_), mu(mu_), tau((p_ - 1.0) / mu_) {
        if (!(p > 1.0)) throw std::invalid_argument("GFun: need p > 1");
        if (!(mu > 0.0)) throw std::invalid_argument("GFun: need mu > 0");
    }

    // m(s) = tau (1+s/tau) ln(1+s/tau)
    double m(double s) const {
        const double y = s / tau;
        if (y <= -1.0) return 0.0;
        return tau * (1.0 + y) * std::log1p(y);
    }

    double g(double s) const {
        if (s <= -tau) return 0.0;
        return phi_p(m(s), p);
    }

    // One-sided derivative; 0 at the flat branch and at zeros of m when the
    // exact value is unbounded (1 < p < 2). eps regularizes |m|^{p-2}.
    double g_prime(double s, double eps = 0.0) const {
        if (s <= -tau) return 0.0;
        const double ms = m(s);
        const double mprime = 1.0 + std::log1p(s / tau);
        if (p < 2.0 && ms == 0.0 && eps == 0.0) return 0.0;
        return phi_p_weight(ms, p, eps) * mprime;
    }

    double G(double s) const {
        const double pref = std::pow(tau, p) * std::pow(p, -p);
        if (s <= -tau) return pref * std::tgamma(p);
        const double Y = std::log1p(s / tau);
        if (Y >= 0.0) return pref * detail::exp_moment(p, p * Y);
        return pref * detail::gamma_lower(p, -p * Y);
    }

    double H(double s) const { return g(s) * s / p - G(s); }

    double G_floor() const { return std::pow(tau, p) * std::pow(p, -p) * std::tgamma(p); }
};

// v = tau (e^{u/tau} - 1)
inline Field hopf_cole(const Field& u, double p, double mu) {
    const double tau = (p - 1.0) / mu;
    Field v = u;
    for (double& x : v.v) x = tau * std::expm1(x / tau);
    return v;
}

inline double hopf_cole_inv_scalar(double v, double p, double mu) {
    const double tau = (p - 1.0) / mu;
    return tau * std::log1p(v / tau);
}

// u = tau ln(1 + v/tau); requires v > -tau at every node.
inline Field hopf_cole_inv(const Field& v, double p, double mu) {
    const double tau = (p - 1.0) / mu;
    Field u = v;
    for (int i = 0; i < u.size(); ++i) {
        if (!(v.v[i] > -tau))
            throw std::domain_error(
                "hopf_cole_inv: node " + std::to_string(i) +
                " at or below -(p-1)/mu, lower bound lost");
        u.v[i] = tau * std::log1p(v.v[i] / tau);
    }
    return u;
}

}  // namespace plap
