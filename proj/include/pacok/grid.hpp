#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pacok/errors.hpp"

namespace pacok {

/// Periodic rectangle [-X, X) x [-Y, Y) sampled by an Nx x Ny collocation mesh.
///
/// Node (i, j) sits at x_i = -X + i*hx, y_j = -Y + j*hy for 0 <= i < Nx,
/// 0 <= j < Ny. Index 0 is the periodic image of index Nx, so this is the
/// same node set as the 1-based labelling 1..Nx.
struct GridSpec {
    double X = 1.0;
    double Y = 1.0;
    int Nx = 0;
    int Ny = 0;

    static GridSpec square(int n, double half_width = 1.0) { return {half_width, half_width, n, n}; }

    double hx() const { return 2.0 * X / Nx; }
    double hy() const { return 2.0 * Y / Ny; }
    double cell_area() const { return hx() * hy(); }
    double area() const { return 4.0 * X * Y; }
    std::size_t size() const { return static_cast<std::size_t>(Nx) * static_cast<std::size_t>(Ny); }

    double x(int i) const { return -X + i * hx(); }
    double y(int j) const { return -Y + j * hy(); }

    void validate() const {
        if (Nx < 4 || Ny < 4 || Nx % 2 != 0 || Ny % 2 != 0)
            throw InvalidParameter("grid sizes must be even and >= 4, got " + std::to_string(Nx) + "x" +
                                   std::to_string(Ny));
        if (!(X > 0.0) || !(Y > 0.0) || !std::isfinite(X) || !std::isfinite(Y))
            throw InvalidParameter("domain half-widths must be positive and finite");
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw GridMismatch("fields live on different grids");
}

/// Real periodic grid function. Storage is row-major with j (y) outer.
class Field {
public:
    Field() = default;

    explicit Field(const GridSpec& grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {
        grid_.validate();
    }

    Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        grid_.validate();
        if (values_.size() != grid_.size()) throw GridMismatch("value count does not match grid");
    }

    /// Samples fn(x, y) at every node.
    template <class Fn>
    static Field sample(const GridSpec& grid, Fn&& fn) {
        Field f(grid);
        for (int j = 0; j < grid.Ny; ++j)
            for (int i = 0; i < grid.Nx; ++i) f.at(i, j) = fn(grid.x(i), grid.y(j));
        return f;
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    // Periodic access; any integer index is wrapped.
    double operator()(int i, int j) const { return values_[index(i, j)]; }
    double& operator()(int i, int j) { return values_[index(i, j)]; }

    // Unchecked access for 0 <= i < Nx, 0 <= j < Ny.
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * grid_.Nx + i]; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * grid_.Nx + i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    /// Pointwise image under fn.
    template <class Fn>
    Field map(Fn&& fn) const {
        Field out(grid_);
        for (std::size_t n = 0; n < values_.size(); ++n) out.values_[n] = fn(values_[n]);
        return out;
    }

    Field& operator+=(const Field& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    Field& operator+=(double s) {
        for (double& v : values_) v += s;
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }

    /// Pointwise product.
    friend Field hadamard(const Field& a, const Field& b) {
        require_same_grid(a.grid_, b.grid_);
        Field out(a.grid_);
        for (std::size_t n = 0; n < a.values_.size(); ++n) out.values_[n] = a.values_[n] * b.values_[n];
        return out;
    }

private:
    std::size_t index(int i, int j) const {
        const int ii = ((i % grid_.Nx) + grid_.Nx) % grid_.Nx;
        const int jj = ((j % grid_.Ny) + grid_.Ny) % grid_.Ny;
        return static_cast<std::size_t>(jj) * grid_.Nx + ii;
    }

    GridSpec grid_{};
    std::vector<double> values_;
};

}  // namespace pacok
