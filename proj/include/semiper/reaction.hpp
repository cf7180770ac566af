#pragma once

#include <span>

#include "semiper/grid.hpp"

namespace semiper {

/// A pointwise reaction term f(t, x_i, u_i) evaluated on a whole grid at once.
/// Implementations must be safe to call concurrently.
class Reaction {
public:
    virtual ~Reaction() = default;

    virtual const GridPtr& grid() const = 0;

    /// out[i] = f(t, x_i, u[i])
    virtual void evaluate(double t, std::span<const double> u, std::span<double> out) const = 0;

    /// out[i] = df/du (t, x_i, u[i])
    virtual void derivative(double t, std::span<const double> u, std::span<double> out) const = 0;

    /// True when f does not depend on t.
    virtual bool autonomous() const = 0;

    /// Nominal period (the value used for step-count defaults for autonomous terms too).
    virtual double period() const = 0;
};

}  // namespace semiper
