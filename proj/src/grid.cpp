#include "semiper/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace semiper {

namespace {
// The FFTW planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

namespace detail {
struct SinePlan {
    fftw_plan plan = nullptr;
    ~SinePlan() {
        if (plan != nullptr) {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};
}  // namespace detail

std::string to_string(LaplacianKind kind) {
    switch (kind) {
        case LaplacianKind::Spectral: return "spectral";
        case LaplacianKind::SecondDifference: return "second_difference";
    }
    return "unknown";
}

LaplacianKind laplacian_kind_from_string(const std::string& name) {
    if (name == "spectral") return LaplacianKind::Spectral;
    if (name == "second_difference") return LaplacianKind::SecondDifference;
    throw GridError("unknown laplacian kind '" + name + "' (expected spectral or second_difference)");
}

SpatialGrid::SpatialGrid(int dimension, double half_width, int points_per_axis, LaplacianKind laplacian)
    : dimension_(dimension),
      half_width_(half_width),
      points_(points_per_axis),
      laplacian_(laplacian),
      plan_(std::make_unique<detail::SinePlan>()) {
    if (dimension < 1 || dimension > 3) {
        throw GridError("grid dimension must be 1, 2 or 3 (got " + std::to_string(dimension) + ")");
    }
    if (points_per_axis < 8) {
        throw GridError("points_per_axis must be at least 8 (got " + std::to_string(points_per_axis) + ")");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw GridError("half_width must be positive and finite");
    }

    const int m = points_;
    spacing_ = 2.0 * half_width_ / (m + 1);
    size_ = 1;
    for (int d = 0; d < dimension_; ++d) size_ *= static_cast<std::size_t>(m);
    cell_volume_ = std::pow(spacing_, dimension_);

    // Forward: c = (h / (2 sqrt L))^N DST(u); inverse: u = (1 / (2 sqrt L))^N DST(c).
    forward_scale_ = std::pow(spacing_ / (2.0 * std::sqrt(half_width_)), dimension_);
    inverse_scale_ = std::pow(1.0 / (2.0 * std::sqrt(half_width_)), dimension_);

    axis_.resize(m);
    axis_eigenvalues_.resize(m);
    for (int i = 0; i < m; ++i) {
        axis_[i] = -half_width_ + (i + 1) * spacing_;
        const int j = i + 1;
        if (laplacian_ == LaplacianKind::Spectral) {
            const double k = std::numbers::pi * j / (2.0 * half_width_);
            axis_eigenvalues_[i] = k * k;
        } else {
            axis_eigenvalues_[i] = (2.0 / (spacing_ * spacing_)) * (1.0 - std::cos(std::numbers::pi * j / (m + 1)));
        }
    }

    eigenvalues_.assign(size_, 0.0);
    radius_.assign(size_, 0.0);
    for (std::size_t idx = 0; idx < size_; ++idx) {
        std::size_t rest = idx;
        double mu = 0.0;
        double r2 = 0.0;
        for (int d = dimension_ - 1; d >= 0; --d) {
            const std::size_t i = rest % m;
            rest /= m;
            mu += axis_eigenvalues_[i];
            r2 += axis_[i] * axis_[i];
        }
        eigenvalues_[idx] = mu;
        radius_[idx] = std::sqrt(r2);
    }

    std::vector<int> dims(dimension_, m);
    std::vector<fftw_r2r_kind> kinds(dimension_, FFTW_RODFT00);
    std::vector<double> a(size_), b(size_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_->plan = fftw_plan_r2r(dimension_, dims.data(), a.data(), b.data(), kinds.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    if (plan_->plan == nullptr) throw GridError("FFTW failed to create a sine transform plan");
}

SpatialGrid::~SpatialGrid() = default;

std::vector<int> SpatialGrid::unflatten(std::size_t index) const {
    std::vector<int> out(dimension_);
    for (int d = dimension_ - 1; d >= 0; --d) {
        out[d] = static_cast<int>(index % points_);
        index /= points_;
    }
    return out;
}

std::size_t SpatialGrid::flatten(std::span<const int> multi_index) const {
    std::size_t idx = 0;
    for (int d = 0; d < dimension_; ++d) idx = idx * points_ + static_cast<std::size_t>(multi_index[d]);
    return idx;
}

double SpatialGrid::coordinate(std::size_t index, int axis_index) const {
    for (int d = dimension_ - 1; d > axis_index; --d) index /= points_;
    return axis_[index % points_];
}

double SpatialGrid::mode_value(std::span<const int> modes, std::size_t index) const {
    const auto multi = unflatten(index);
    double v = 1.0;
    for (int d = 0; d < dimension_; ++d) {
        v *= std::sin(std::numbers::pi * modes[d] * (multi[d] + 1) / (points_ + 1)) / std::sqrt(half_width_);
    }
    return v;
}

void SpatialGrid::raw_sine_transform(std::span<const double> in, std::span<double> out) const {
    if (in.size() != size_ || out.size() != size_) {
        throw GridError("sine transform size mismatch");
    }
    // Planned with FFTW_PRESERVE_INPUT, so the input is never written.
    fftw_execute_r2r(plan_->plan, const_cast<double*>(in.data()), out.data());
}

bool SpatialGrid::same_as(const SpatialGrid& other) const {
    return this == &other || (dimension_ == other.dimension_ && half_width_ == other.half_width_ &&
                              points_ == other.points_ && laplacian_ == other.laplacian_);
}

GridPtr make_grid(int dimension, double half_width, int points_per_axis, LaplacianKind laplacian) {
    return std::make_shared<const SpatialGrid>(dimension, half_width, points_per_axis, laplacian);
}

}  // namespace semiper
