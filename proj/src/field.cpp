#include "semiper/field.hpp"

#include <cmath>
#include <numeric>

namespace semiper {

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw FieldError("field requires a grid");
    values_.assign(grid_->size(), 0.0);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw FieldError("field requires a grid");
    if (values_.size() != grid_->size()) {
        throw FieldError("field has " + std::to_string(values_.size()) + " values but grid has " +
                         std::to_string(grid_->size()) + " points");
    }
}

Field Field::from_function(GridPtr grid, const std::function<double(std::span<const double>)>& fn) {
    Field out(grid);
    std::vector<double> x(grid->dimension());
    for (std::size_t i = 0; i < grid->size(); ++i) {
        for (int d = 0; d < grid->dimension(); ++d) x[d] = grid->coordinate(i, d);
        out.values_[i] = fn(x);
    }
    return out;
}

bool Field::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Field::check_compatible(const Field& other) const {
    if (!grid_ || !other.grid_ || !grid_->same_as(*other.grid_)) {
        throw FieldError("fields live on different grids");
    }
}

Field& Field::operator+=(const Field& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Field& Field::axpy(double s, const Field& other) {
    check_compatible(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    return *this;
}

Spectrum sine_transform(const Field& u) {
    const auto& grid = u.grid();
    Spectrum out{grid, std::vector<double>(grid->size())};
    grid->raw_sine_transform(u.values(), out.coefficients);
    const double scale = grid->forward_scale();
    for (double& c : out.coefficients) c *= scale;
    return out;
}

Field inverse_sine_transform(const GridPtr& grid, std::span<const double> coefficients) {
    if (coefficients.size() != grid->size()) {
        throw FieldError("coefficient array has " + std::to_string(coefficients.size()) +
                         " entries but grid has " + std::to_string(grid->size()) + " modes");
    }
    Field out(grid);
    grid->raw_sine_transform(coefficients, out.values());
    out *= grid->inverse_scale();
    return out;
}

Field inverse_sine_transform(const Spectrum& spectrum) {
    return inverse_sine_transform(spectrum.grid, spectrum.coefficients);
}

Field sine_mode(const GridPtr& grid, std::span<const int> modes, double amplitude) {
    if (static_cast<int>(modes.size()) != grid->dimension()) throw FieldError("mode index rank mismatch");
    for (int m : modes)
        if (m < 1 || m > grid->points_per_axis()) throw FieldError("mode index out of range");
    Field out(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) out[i] = amplitude * grid->mode_value(modes, i);
    return out;
}

namespace {
void require_finite(const Field& u) {
    if (!u.all_finite()) throw FieldError("field contains non-finite values");
}
}  // namespace

double norm_l2(const Field& u) {
    require_finite(u);
    double s = 0.0;
    for (double v : u.values()) s += v * v;
    return std::sqrt(s * u.grid()->cell_volume());
}

double grad_norm_squared(const Field& u) {
    require_finite(u);
    const auto spec = sine_transform(u);
    const auto mu = u.grid()->laplacian_eigenvalues();
    double s = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) s += mu[k] * spec.coefficients[k] * spec.coefficients[k];
    return s;
}

double norm_h1(const Field& u) {
    require_finite(u);
    const auto spec = sine_transform(u);
    const auto mu = u.grid()->laplacian_eigenvalues();
    double s = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) s += (1.0 + mu[k]) * spec.coefficients[k] * spec.coefficients[k];
    return std::sqrt(s);
}

double norm_lp(const Field& u, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw FieldError("Lp norm requires p in [1, inf)");
    require_finite(u);
    double s = 0.0;
    for (double v : u.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * u.grid()->cell_volume(), 1.0 / p);
}

double norm(const Field& u, NormSpec spec) {
    switch (spec.kind) {
        case NormKind::L2: return norm_l2(u);
        case NormKind::H1: return norm_h1(u);
        case NormKind::Lp: return norm_lp(u, spec.p);
    }
    return 0.0;
}

double inner_product(const Field& u, const Field& v) {
    if (!u.grid()->same_as(*v.grid())) throw FieldError("fields live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s * u.grid()->cell_volume();
}

double tail_mass(const Field& u, double n) {
    const auto r = u.grid()->radius();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (r[i] > n) s += u[i] * u[i];
    return s * u.grid()->cell_volume();
}

Field laplacian(const Field& u) {
    auto spec = sine_transform(u);
    const auto mu = u.grid()->laplacian_eigenvalues();
    for (std::size_t k = 0; k < mu.size(); ++k) spec.coefficients[k] *= -mu[k];
    return inverse_sine_transform(spec);
}

Field stencil_laplacian(const Field& u) {
    const auto& grid = u.grid();
    const int m = grid->points_per_axis();
    const int n = grid->dimension();
    const double inv_h2 = 1.0 / (grid->spacing() * grid->spacing());
    Field out(grid);
    std::size_t stride = 1;
    for (int d = n - 1; d >= 0; --d) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const std::size_t pos = (i / stride) % m;
            const double left = pos > 0 ? u[i - stride] : 0.0;
            const double right = pos + 1 < static_cast<std::size_t>(m) ? u[i + stride] : 0.0;
            out[i] += (left - 2.0 * u[i] + right) * inv_h2;
        }
        stride *= m;
    }
    return out;
}

}  // namespace semiper
