#pragma once

#include <functional>
#include <vector>

namespace semiper::detail {

using LinearMap = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct GmresResult {
    std::vector<double> x;
    double relative_residual = 1.0;
    int iterations = 0;
    bool breakdown = false;
};

/// Restarted GMRES for A x = b from x0 = 0 with the Euclidean inner product.
GmresResult gmres(const LinearMap& apply, const std::vector<double>& b, double rtol, int restart, int max_iter);

}  // namespace semiper::detail
