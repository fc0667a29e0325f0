#pragma once

// Small dense linear algebra used by the estimators: tiny SPD solves,
// a symmetric Jacobi eigensolver for local PCA, Gram-Schmidt frames and
// least-squares fits. Dimensions never exceed ~16, so everything is
// plain row-major std::vector arithmetic.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "germlab/common.hpp"

namespace germlab {

// Solve A x = b for SPD A (n x n row-major), in place Cholesky.
// Returns false if A is not numerically positive definite.
inline bool cholesky_solve(std::vector<double> a, int n, std::span<const double> b,
                           std::span<double> x) {
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
    // forward then backward substitution
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
        x[i] = s / a[i * n + i];
    }
    return true;
}

struct EigenSym {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // row i = eigenvector for values[i]
};

// Cyclic Jacobi for symmetric n x n; plenty for n <= 16.
inline EigenSym eigen_sym(std::vector<double> a, int n) {
    std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[p * n + k], vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a[i * n + i] > a[j * n + j]; });

    EigenSym out;
    out.values.resize(n);
    out.vectors.resize(static_cast<size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        out.values[r] = a[order[r] * n + order[r]];
        for (int k = 0; k < n; ++k) out.vectors[r * n + k] = v[order[r] * n + k];
    }
    return out;
}

// Orthonormalize m row vectors of length n in place (modified Gram-Schmidt);
// returns the numerical rank, rows beyond it are zeroed.
inline int orthonormalize_rows(std::vector<double>& rows, int m, int n, double tol = 1e-12) {
    int rank = 0;
    for (int i = 0; i < m; ++i) {
        double* ri = rows.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < rank; ++j) {
            const double* rj = rows.data() + static_cast<size_t>(j) * n;
            double dot = 0.0;
            for (int k = 0; k < n; ++k) dot += ri[k] * rj[k];
            for (int k = 0; k < n; ++k) ri[k] -= dot * rj[k];
        }
        double nn = 0.0;
        for (int k = 0; k < n; ++k) nn += ri[k] * ri[k];
        nn = std::sqrt(nn);
        if (nn > tol) {
            const double inv = 1.0 / nn;
            for (int k = 0; k < n; ++k) ri[k] *= inv;
            if (rank != i) {
                double* rr = rows.data() + static_cast<size_t>(rank) * n;
                std::copy(ri, ri + n, rr);
            }
            ++rank;
        }
    }
    for (int i = rank; i < m; ++i)
        std::fill_n(rows.begin() + static_cast<size_t>(i) * n, n, 0.0);
    return rank;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;        // coefficient of determination
    double rms_resid = 0.0; // RMS residual of y about the fit
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const int n = static_cast<int>(x.size());
    require(n >= 2 && y.size() == x.size(), ErrorCode::InputError, "fit_line: need >= 2 points");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.rms_resid = std::sqrt(ss_res / n);
    f.r2 = syy > 0 ? std::max(0.0, 1.0 - ss_res / syy) : 0.0;
    return f;
}

// Least squares for y ~ c0 + sum_j c_j * x_j with p predictors stored
// row-major in x (n rows, p columns). Returns p+1 coefficients.
inline std::vector<double> fit_multilinear(const std::vector<double>& x, int n, int p,
                                           std::span<const double> y) {
    const int m = p + 1;
    std::vector<double> ata(static_cast<size_t>(m) * m, 0.0), atb(m, 0.0);
    for (int i = 0; i < n; ++i) {
        double row[16];
        row[0] = 1.0;
        for (int j = 0; j < p; ++j) row[j + 1] = x[static_cast<size_t>(i) * p + j];
        for (int a = 0; a < m; ++a) {
            atb[a] += row[a] * y[i];
            for (int b = 0; b < m; ++b) ata[a * m + b] += row[a] * row[b];
        }
    }
    std::vector<double> c(m, 0.0);
    // tiny ridge keeps degenerate designs solvable
    for (int a = 0; a < m; ++a) ata[a * m + a] += 1e-12;
    if (!cholesky_solve(ata, m, atb, c))
        fail(ErrorCode::InputError, "fit_multilinear: singular normal equations");
    return c;
}

}  // namespace germlab
