// Symmetric tridiagonal matrices with LDL^T factorization (Thomas solve,
// inertia count for indefiniteness detection).
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace plap {

struct TriDiag {
    std::vector<double> d;  // diagonal, size m
    std::vector<double> e;  // sub/super diagonal, size m-1

    explicit TriDiag(int m = 0) : d(m, 0.0), e(m > 0 ? m - 1 : 0, 0.0) {}
    int size() const { return static_cast<int>(d.size()); }

    std::vector<double> apply(const std::vector<double>& x) const {
        const int m = size();
        std::vector<double> y(m);
        for (int i = 0; i < m; ++i) {
            double s = d[i] * x[i];
            if (i > 0) s += e[i - 1] * x[i - 1];
            if (i + 1 < m) s += e[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

struct LDLT {
    std::vector<double> dfac;  // pivots
    std::vector<double> l;     // subdiagonal multipliers
    int neg_pivots = 0;
    bool singular = false;

    static LDLT factor(const TriDiag& T, double pivot_floor = 0.0) {
        const int m = T.size();
        LDLT f;
        f.dfac.resize(m);
        f.l.resize(m > 0 ? m - 1 : 0);
        const double tiny = std::max(pivot_floor, 1e-300);
        for (int i = 0; i < m; ++i) {
            double piv = T.d[i];
            if (i > 0) piv -= f.l[i - 1] * f.l[i - 1] * f.dfac[i - 1];
            if (std::abs(piv) <= tiny) {
                f.singular = true;
                piv = (piv >= 0 ? tiny : -tiny);
            }
            if (piv < 0) ++f.neg_pivots;
            f.dfac[i] = piv;
            if (i + 1 < m) f.l[i] = T.e[i] / piv;
        }
        return f;
    }

    // Solve (L D L^T) x = b in place.
    void solve(std::vector<double>& b) const {
        const int m = static_cast<int>(dfac.size());
        for (int i = 1; i < m; ++i) b[i] -= l[i - 1] * b[i - 1];
        for (int i = 0; i < m; ++i) b[i] /= dfac[i];
        for (int i = m - 2; i >= 0; --i) b[i] -= l[i] * b[i + 1];
    }

    bool positive_definite() const { return !singular && neg_pivots == 0; }
};

}  // namespace plap
