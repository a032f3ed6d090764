// Discrete energies, gradients, tridiagonal Jacobians, and strong-form
// residuals. The energy of a cell reaction R is
//   E(v) = 1/p sum_c w_c |D_c|^p - sum_c w_c R.F(c, vbar_c),
// an explicit smooth function of the nodal values; its exact differential is
// what the solvers drive to zero. Regularization enters Jacobians only.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/problem.hpp"
#include "plap/tridiag.hpp"

namespace plap {

template <class Reaction>
inline double energy_of(const Grid& g, double p, const Reaction& r,
                        const std::vector<double>& v) {
    const double dx = g.dx;
    double e = 0.0;
    for (int c = 0; c < g.cells(); ++c) {
        const double D = (v[c + 1] - v[c]) / dx;
        const double th = g.cell_theta[c];
        const double mid = th * v[c] + (1.0 - th) * v[c + 1];
        e += g.cell_w[c] * (std::pow(std::abs(D), p) / p - r.F(c, mid));
    }
    return e;
}

// Exact differential of energy_of; rows at Dirichlet nodes are zeroed.
template <class Reaction>
inline void gradient_of(const Grid& g, double p, const Reaction& r,
                        const std::vector<double>& v, std::vector<double>& out) {
    const double dx = g.dx;
    out.assign(g.n, 0.0);
    for (int c = 0; c < g.cells(); ++c) {
        const double D = (v[c + 1] - v[c]) / dx;
        const double th = g.cell_theta[c];
        const double mid = th * v[c] + (1.0 - th) * v[c + 1];
        const double flux = g.cell_w[c] * phi_p(D, p) / dx;
        const double react = g.cell_w[c] * r.f(c, mid);
        out[c] += -flux - th * react;
        out[c + 1] += flux - (1.0 - th) * react;
    }
    if (g.dirichlet_left) out[0] = 0.0;
    out[g.n - 1] = 0.0;
}

// Magnitude of the gradient assembly (absolute sums): the natural scale
// against which gradient tolerances are measured.
template <class Reaction>
inline double gradient_scale_of(const Grid& g, double p, const Reaction& r,
                                const std::vector<double>& v) {
    const double dx = g.dx;
    std::vector<double> acc(g.n, 0.0);
    for (int c = 0; c < g.cells(); ++c) {
        const double D = (v[c + 1] - v[c]) / dx;
        const double th = g.cell_theta[c];
        const double mid = th * v[c] + (1.0 - th) * v[c + 1];
        const double flux = std::abs(g.cell_w[c] * phi_p(D, p) / dx);
        const double react = std::abs(g.cell_w[c] * r.f(c, mid));
        acc[c] += flux + th * react;
        acc[c + 1] += flux + (1.0 - th) * react;
    }
    double m = 0.0;
    for (int i = g.first_free(); i <= g.last_free(); ++i) m = std::max(m, acc[i]);
    return m;
}

// Hessian over the free-dof window [first_free, last_free].
template <class Reaction>
inline TriDiag jacobian_of(const Grid& g, double p, const Reaction& r,
                           const std::vector<double>& v, double eps) {
    const double dx = g.dx;
    const int lo = g.first_free();
    TriDiag J(g.free_count());
    for (int c = 0; c < g.cells(); ++c) {
        const double D = (v[c + 1] - v[c]) / dx;
        const double th = g.cell_theta[c];
        const double mid = th * v[c] + (1.0 - th) * v[c + 1];
        const double wflux = g.cell_w[c] * phi_p_weight(D, p, eps) / (dx * dx);
        const double wreact = g.cell_w[c] * r.df(c, mid, eps);
        const int i = c - lo, j = c + 1 - lo;  // window indices of cell nodes
        const bool ifree = (i >= 0 && i < J.size());
        const bool jfree = (j >= 0 && j < J.size());
        if (ifree) J.d[i] += wflux - th * th * wreact;
        if (jfree) J.d[j] += wflux - (1.0 - th) * (1.0 - th) * wreact;
        if (ifree && jfree) J.e[i] += -wflux - th * (1.0 - th) * wreact;
    }
    return J;
}

// Strong p-Laplacian at a node: conservative differencing of cell fluxes,
// scaled by the control volume. Equals (gradient of the p-term)/cv.
inline double strong_plap(const Field& u, double p, int i) {
    const Grid& g = *u.grid;
    double acc = 0.0;
    if (i > 0) acc += g.cell_rho[i - 1] * phi_p(cell_slope(u, i - 1), p);
    if (i < g.n - 1) acc -= g.cell_rho[i] * phi_p(cell_slope(u, i), p);
    return acc / g.cv[i];
}

// Nodal strong-form residual of (P_{lambda,k}); zero rows at Dirichlet nodes.
inline Field residual_P(const Field& u, const ProblemSpec& spec) {
    spec.validate_constant_mu();
    const Grid& g = *u.grid;
    Field res(u.grid);
    for (int i = 0; i < g.n; ++i) {
        if (g.is_dirichlet(i)) continue;
        const double du = nodal_slope(u, i);
        res.v[i] = strong_plap(u, spec.p, i) - spec.lambda * spec.c.v[i] * phi_p(u.v[i], spec.p) -
                   spec.mu * std::pow(std::abs(du), spec.p) - spec.k * spec.h.v[i];
    }
    return res;
}

// -Delta_p u + H(x, u, grad u) = f with a Bernstein-bounded H (declared by
// the caller, not verified).
struct GeneralQuasilinearProblem {
    std::function<double(double, double, double)> H_term;  // (x, s, xi)
    Field f_rhs;
};

inline Field residual_general(const Field& u, const GeneralQuasilinearProblem& prob,
                              double p) {
    const Grid& g = *u.grid;
    Field res(u.grid);
    for (int i = 0; i < g.n; ++i) {
        if (g.is_dirichlet(i)) continue;
        const double du = nodal_slope(u, i);
        res.v[i] = strong_plap(u, p, i) + prob.H_term(g.nodes[i], u.v[i], du) -
                   prob.f_rhs.v[i];
    }
    return res;
}

// Discrete functional of (Q_lambda) and its derivatives.
struct EnergyModel {
    ProblemSpec spec;
    TruncationData trunc;
    double epsilon_reg = 1e-6;
    QReaction reaction;

    EnergyModel(ProblemSpec s, TruncationData t, double eps = 1e-6)
        : spec(std::move(s)), trunc(std::move(t)), epsilon_reg(eps),
          reaction(spec, trunc) {
        if (!(eps >= 0.0 && eps <= 1e-4))
            throw std::invalid_argument("EnergyModel: epsilon_reg in [0, 1e-4]");
        spec.validate_constant_mu();
    }

    const Grid& grid() const { return *spec.grid; }
};

inline double energy(const Field& v, const EnergyModel& m) {
    return energy_of(m.grid(), m.spec.p, m.reaction, v.v);
}

inline Field energy_gradient(const Field& v, const EnergyModel& m) {
    Field g(v.grid);
    gradient_of(m.grid(), m.spec.p, m.reaction, v.v, g.v);
    return g;
}

inline TriDiag jacobian(const Field& v, const EnergyModel& m) {
    return jacobian_of(m.grid(), m.spec.p, m.reaction, v.v, m.epsilon_reg);
}

// Strong-form residual of (Q_lambda) with the nodal reaction; at converged
// discrete solutions this sits at truncation-error level, which is the yard
// stick the transformed (P_lambda) residual is compared against.
inline Field residual_Q(const Field& v, const EnergyModel& m) {
    const Grid& g = m.grid();
    Field res(v.grid);
    for (int i = 0; i < g.n; ++i) {
        if (g.is_dirichlet(i)) continue;
        res.v[i] = strong_plap(v, m.spec.p, i) - f_lambda(i, v.v[i], m.spec, m.trunc);
    }
    return res;
}

inline double sup_norm_free(const Field& f) {
    const Grid& g = *f.grid;
    double m = 0.0;
    for (int i = g.first_free(); i <= g.last_free(); ++i)
        m = std::max(m, std::abs(f.v[i]));
    return m;
}

}  // namespace plap
