#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiper {

/// Which discrete Laplacian the sine basis diagonalizes.
///
/// Spectral uses the exact Dirichlet eigenvalues of the box, (pi j / 2L)^2 per
/// axis. SecondDifference uses the eigenvalues of the 3-point stencil,
/// (2/h^2)(1 - cos(pi j/(M+1))), so that spectral and stencil application agree
/// to roundoff.
enum class LaplacianKind { Spectral, SecondDifference };

std::string to_string(LaplacianKind kind);
LaplacianKind laplacian_kind_from_string(const std::string& name);

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {
struct SinePlan;
}

/**
 * Truncated box (-L, L)^N with homogeneous Dirichlet boundary, sampled at the
 * M interior points per axis x_i = -L + i h, i = 1..M, h = 2L/(M+1).
 *
 * Grid functions are stored in lexicographic order with the last axis
 * fastest. Spectral coefficients are taken against the L^2-normalized sine
 * modes, so Parseval holds with unit weight: sum c_k^2 = h^N sum u_i^2.
 *
 * Immutable after construction; share it through GridPtr.
 */
class SpatialGrid {
public:
    SpatialGrid(int dimension, double half_width, int points_per_axis,
                LaplacianKind laplacian = LaplacianKind::Spectral);
    ~SpatialGrid();

    SpatialGrid(const SpatialGrid&) = delete;
    SpatialGrid& operator=(const SpatialGrid&) = delete;

    int dimension() const { return dimension_; }
    double half_width() const { return half_width_; }
    int points_per_axis() const { return points_; }
    double spacing() const { return spacing_; }
    LaplacianKind laplacian() const { return laplacian_; }
    std::size_t size() const { return size_; }

    /// h^N, the product-rule quadrature weight.
    double cell_volume() const { return cell_volume_; }

    /// Coordinates of the interior points along one axis.
    std::span<const double> axis() const { return axis_; }
    /// -Laplacian eigenvalues along one axis, mode j = 1..M at index j-1.
    std::span<const double> axis_eigenvalues() const { return axis_eigenvalues_; }
    /// -Laplacian eigenvalue of every tensor mode, lexicographic order.
    std::span<const double> laplacian_eigenvalues() const { return eigenvalues_; }
    /// |x| at every grid point.
    std::span<const double> radius() const { return radius_; }

    double min_eigenvalue() const { return eigenvalues_.front(); }

    /// Multi-index (0-based, per axis) of a flat index.
    std::vector<int> unflatten(std::size_t index) const;
    std::size_t flatten(std::span<const int> multi_index) const;

    /// Coordinate of axis `axis_index` at flat grid index.
    double coordinate(std::size_t index, int axis_index) const;

    /// Value of the L^2-normalized sine mode with 1-based mode indices at grid index.
    double mode_value(std::span<const int> modes, std::size_t index) const;

    /// Raw DST-I over all axes (FFTW RODFT00 convention, unnormalized).
    void raw_sine_transform(std::span<const double> in, std::span<double> out) const;

    /// Scale factors turning raw transforms into the normalized forward/inverse maps.
    double forward_scale() const { return forward_scale_; }
    double inverse_scale() const { return inverse_scale_; }

    bool same_as(const SpatialGrid& other) const;

private:
    int dimension_;
    double half_width_;
    int points_;
    double spacing_;
    LaplacianKind laplacian_;
    std::size_t size_;
    double cell_volume_;
    double forward_scale_;
    double inverse_scale_;
    std::vector<double> axis_;
    std::vector<double> axis_eigenvalues_;
    std::vector<double> eigenvalues_;
    std::vector<double> radius_;
    std::unique_ptr<detail::SinePlan> plan_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

/// Validating factory: N in 1..3, M >= 8, L > 0.
GridPtr make_grid(int dimension, double half_width, int points_per_axis,
                  LaplacianKind laplacian = LaplacianKind::Spectral);

}  // namespace semiper
