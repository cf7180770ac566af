#include "krylov.hpp"

#include <cmath>

namespace semiper::detail {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

GmresResult gmres(const LinearMap& apply, const std::vector<double>& b, double rtol, int restart, int max_iter) {
    const std::size_t n = b.size();
    GmresResult res;
    res.x.assign(n, 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        res.relative_residual = 0.0;
        return res;
    }

    std::vector<double> r = b, w(n);
    while (res.iterations < max_iter) {
        const double beta = std::sqrt(dot(r, r));
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= rtol) return res;

        const int m = restart;
        std::vector<std::vector<double>> v(1, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
        std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
        g[0] = beta;

        int j = 0;
        for (; j < m && res.iterations < max_iter; ++j) {
            apply(v[j], w);
            ++res.iterations;
            // Modified Gram-Schmidt, twice for stability.
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const double hij = dot(w, v[i]);
                    h[i][j] += hij;
                    for (std::size_t q = 0; q < n; ++q) w[q] -= hij * v[i][q];
                }
            }
            const double wn = std::sqrt(dot(w, w));
            h[j + 1][j] = wn;
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            const double denom = std::hypot(h[j][j], h[j + 1][j]);
            cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
            sn[j] = denom == 0.0 ? 0.0 : h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            res.relative_residual = std::abs(g[j + 1]) / bnorm;
            if (wn <= 1e-14 * beta) {
                res.breakdown = res.relative_residual > rtol;
                ++j;
                break;
            }
            if (res.relative_residual <= rtol) {
                ++j;
                break;
            }
            v.emplace_back(n);
            for (std::size_t q = 0; q < n; ++q) v[j + 1][q] = w[q] / wn;
        }

        // Back substitution for the least-squares coefficients.
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= h[i][k] * y[k];
            y[i] = h[i][i] == 0.0 ? 0.0 : s / h[i][i];
        }
        for (int i = 0; i < j; ++i)
            for (std::size_t q = 0; q < n; ++q) res.x[q] += y[i] * v[i][q];

        if (res.breakdown || res.relative_residual <= rtol) return res;
        apply(res.x, w);
        for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - w[q];
    }
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    return res;
}

}  // namespace semiper::detail
