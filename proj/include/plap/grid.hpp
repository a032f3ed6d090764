// Meshes, quadrature and nodal fields for 1D intervals and radially
// symmetric balls reduced to the radius variable with weight r^{N-1}.
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

enum class DomainKind { interval, radial };

// Uniform 1D grid. For radial grids the coordinate is r in [0, R], the
// measure carries the weight r^{N-1} (angular constant omitted throughout,
// consistently for all integrals), r = 0 is a free symmetry node and only
// r = R is a Dirichlet boundary.
struct Grid {
    DomainKind kind = DomainKind::interval;
    int dim = 1;      // N for radial, 1 for interval
    double a = 0.0;   // left endpoint (0 for radial)
    double b = 1.0;   // right endpoint (R for radial)
    int n = 0;        // node count, >= 4
    double dx = 0.0;

    std::vector<double> nodes;      // size n, strictly increasing
    std::vector<double> cell_w;     // size n-1, exact cell measures
    std::vector<double> cell_rho;   // cell_w / dx
    std::vector<double> cell_theta; // left-node share of the cell measure
    std::vector<double> cell_x;     // measure centroid of each cell
    std::vector<double> cv;         // size n, P1 nodal masses (hat x measure)

    bool dirichlet_left = true;  // false for radial grids

    int cells() const { return n - 1; }
    bool is_dirichlet(int i) const {
        return (i == n - 1) || (i == 0 && dirichlet_left);
    }
    int first_free() const { return dirichlet_left ? 1 : 0; }
    int last_free() const { return n - 2; }
    int free_count() const { return last_free() - first_free() + 1; }
    double domain_measure() const {
        double s = 0.0;
        for (double w : cell_w) s += w;
        return s;
    }
};

namespace detail {
// integral of r^{N-1} over [lo, hi]
inline double radial_measure(double lo, double hi, int N) {
    return (std::pow(hi, N) - std::pow(lo, N)) / static_cast<double>(N);
}
}  // namespace detail

inline std::shared_ptr<const Grid> make_interval_grid(double a, double b, int n) {
    if (n < 4) throw std::invalid_argument("make_grid: need n >= 4");
    if (!(a < b)) throw std::invalid_argument("make_grid: need a < b");
    auto g = std::make_shared<Grid>();
    g->kind = DomainKind::interval;
    g->dim = 1;
    g->a = a;
    g->b = b;
    g->n = n;
    g->dx = (b - a) / (n - 1);
    g->nodes.resize(n);
    for (int i = 0; i < n; ++i) g->nodes[i] = a + i * g->dx;
    g->nodes.back() = b;
    g->cell_w.assign(n - 1, g->dx);
    g->cell_rho.assign(n - 1, 1.0);
    g->cell_theta.assign(n - 1, 0.5);
    g->cell_x.resize(n - 1);
    for (int c = 0; c < n - 1; ++c)
        g->cell_x[c] = 0.5 * (g->nodes[c] + g->nodes[c + 1]);
    g->cv.assign(n, g->dx);
    g->cv.front() = g->cv.back() = 0.5 * g->dx;
    g->dirichlet_left = true;
    return g;
}

inline std::shared_ptr<const Grid> make_radial_grid(double R, int N, int n) {
    if (n < 4) throw std::invalid_argument("make_grid: need n >= 4");
    if (!(R > 0.0)) throw std::invalid_argument("make_grid: need R > 0");
    if (N < 2) throw std::invalid_argument("make_grid: radial needs N >= 2");
    auto g = std::make_shared<Grid>();
    g->kind = DomainKind::radial;
    g->dim = N;
    g->a = 0.0;
    g->b = R;
    g->n = n;
    g->dx = R / (n - 1);
    g->nodes.resize(n);
    for (int i = 0; i < n; ++i) g->nodes[i] = i * g->dx;
    g->nodes.back() = R;
    g->cell_w.resize(n - 1);
    g->cell_rho.resize(n - 1);
    g->cell_theta.resize(n - 1);
    g->cell_x.resize(n - 1);
    for (int c = 0; c < n - 1; ++c) {
        const double lo = g->nodes[c], hi = g->nodes[c + 1];
        g->cell_w[c] = detail::radial_measure(lo, hi, N);
        g->cell_rho[c] = g->cell_w[c] / g->dx;
        // first moment of the measure gives the centroid and the exact P1
        // split of the cell mass between its nodes
        const double m1 = (std::pow(hi, N + 1) - std::pow(lo, N + 1)) /
                          static_cast<double>(N + 1);
        g->cell_x[c] = m1 / g->cell_w[c];
        g->cell_theta[c] = (hi - g->cell_x[c]) / g->dx;
    }
    g->cv.assign(n, 0.0);
    for (int c = 0; c < n - 1; ++c) {
        g->cv[c] += g->cell_theta[c] * g->cell_w[c];
        g->cv[c + 1] += (1.0 - g->cell_theta[c]) * g->cell_w[c];
    }
    g->dirichlet_left = false;  // r = 0 is a symmetry node
    return g;
}

using GridPtr = std::shared_ptr<const Grid>;

// Nodal real-valued function on a Grid.
struct Field {
    GridPtr grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0)
        : grid(std::move(g)), v(grid->n, fill) {}
    Field(GridPtr g, std::vector<double> vals) : grid(std::move(g)), v(std::move(vals)) {
        if (static_cast<int>(v.size()) != grid->n)
            throw std::invalid_argument("Field: size mismatch with grid");
    }

    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
    bool dirichlet_ok(double tol = 0.0) const {
        if (grid->dirichlet_left && std::abs(v.front()) > tol) return false;
        return std::abs(v.back()) <= tol;
    }
    void enforce_dirichlet() {
        if (grid->dirichlet_left) v.front() = 0.0;
        v.back() = 0.0;
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double min_value() const {
        double m = v[0];
        for (double x : v) m = std::min(m, x);
        return m;
    }
    double max_value() const {
        double m = v[0];
        for (double x : v) m = std::max(m, x);
        return m;
    }
};

template <class F>
inline Field make_field(const GridPtr& g, F&& fn) {
    Field f(g);
    for (int i = 0; i < g->n; ++i) f.v[i] = fn(g->nodes[i]);
    return f;
}

// Cell value of the P1 interpolant at the measure centroid (the arithmetic
// midpoint on interval grids).
inline double cell_mid(const Field& f, int c) {
    const double th = f.grid->cell_theta[c];
    return th * f.v[c] + (1.0 - th) * f.v[c + 1];
}

// Midpoint-in-measure integral of the P1 interpolant of f; exact for P1
// integrands against the grid measure.
inline double integrate(const Field& f) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int c = 0; c < g.cells(); ++c) s += g.cell_w[c] * cell_mid(f, c);
    return s;
}

template <class Fn>
inline double integrate_cells(const Grid& g, Fn&& cell_value) {
    double s = 0.0;
    for (int c = 0; c < g.cells(); ++c) s += g.cell_w[c] * cell_value(c);
    return s;
}

inline double cell_slope(const Field& f, int c) {
    return (f.v[c + 1] - f.v[c]) / f.grid->dx;
}

// Nodal gradient: average of adjacent cell slopes, one-sided at endpoints
// (this is the symmetry treatment at r = 0 on radial grids).
inline double nodal_slope(const Field& f, int i) {
    const Grid& g = *f.grid;
    if (i == 0) return cell_slope(f, 0);
    if (i == g.n - 1) return cell_slope(f, g.n - 2);
    return 0.5 * (cell_slope(f, i - 1) + cell_slope(f, i));
}

inline double norm_W1p(const Field& f, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("norm_W1p: need p > 1");
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int c = 0; c < g.cells(); ++c)
        s += g.cell_w[c] * std::pow(std::abs(cell_slope(f, c)), p);
    return std::pow(s, 1.0 / p);
}

inline double norm_Lq(const Field& f, double q) {
    if (std::isinf(q)) return f.max_abs();
    if (!(q >= 1.0)) throw std::invalid_argument("norm_Lq: need q >= 1");
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int c = 0; c < g.cells(); ++c)
        s += g.cell_w[c] * std::pow(std::abs(cell_mid(f, c)), q);
    return std::pow(s, 1.0 / q);
}

inline double sup_distance(const Field& a, const Field& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

inline Field axpy(double alpha, const Field& x, const Field& y) {
    Field r = y;
    for (int i = 0; i < r.size(); ++i) r.v[i] += alpha * x.v[i];
    return r;
}

inline Field scaled(const Field& x, double alpha) {
    Field r = x;
    for (double& t : r.v) t *= alpha;
    return r;
}

}  // namespace plap
