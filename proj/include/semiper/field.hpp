#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "semiper/grid.hpp"

namespace semiper {

class FieldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point samples of a grid function u(x), one value per interior grid point.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid);
    Field(GridPtr grid, std::vector<double> values);

    /// Samples `fn(x)` at every grid point; x has grid->dimension() entries.
    static Field from_function(GridPtr grid, const std::function<double(std::span<const double>)>& fn);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool all_finite() const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);
    /// this += s * other
    Field& axpy(double s, const Field& other);

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }

private:
    void check_compatible(const Field& other) const;

    GridPtr grid_;
    std::vector<double> values_;
};

/// Coefficients against the L^2-normalized tensor sine modes, lexicographic mode order.
struct Spectrum {
    GridPtr grid;
    std::vector<double> coefficients;
};

Spectrum sine_transform(const Field& u);
Field inverse_sine_transform(const GridPtr& grid, std::span<const double> coefficients);
Field inverse_sine_transform(const Spectrum& spectrum);

/// Field with a single unit-L^2 sine mode; `modes` are 1-based per axis.
Field sine_mode(const GridPtr& grid, std::span<const int> modes, double amplitude = 1.0);

enum class NormKind { L2, H1, Lp };

struct NormSpec {
    NormKind kind = NormKind::L2;
    double p = 2.0;

    static NormSpec l2() { return {NormKind::L2, 2.0}; }
    static NormSpec h1() { return {NormKind::H1, 2.0}; }
    static NormSpec lp(double p) { return {NormKind::Lp, p}; }
};

/// Product-rule norms; H1 uses the spectral gradient sum mu_k c_k^2.
double norm(const Field& u, NormSpec spec);
double norm_l2(const Field& u);
double norm_h1(const Field& u);
double norm_lp(const Field& u, double p);
double grad_norm_squared(const Field& u);
double inner_product(const Field& u, const Field& v);

/// Quadrature of |u|^2 over grid points with |x| > n.
double tail_mass(const Field& u, double n);

/// Laplacian by spectral multiplication (returns +Delta u).
Field laplacian(const Field& u);

/// 3-point second-difference Laplacian in physical space with zero Dirichlet data.
Field stencil_laplacian(const Field& u);

}  // namespace semiper
