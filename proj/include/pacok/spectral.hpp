#pragma once

// Fourier collocation on the periodic grid: transforms, differential operators,
// the mean-free inverse Laplacian and the discrete norms built on them.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"

namespace pacok::spectral {

using Complex = std::complex<double>;

/// Signed wavenumber of FFT storage slot `idx` on an n-point axis, in (-n/2, n/2].
constexpr int wavenumber(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

/// Storage slot of signed wavenumber k in (-n/2, n/2].
constexpr int mode_index(int k, int n) { return k >= 0 ? k : k + n; }

/// Fourier coefficients of a grid function, normalised so that
///   c_kl = 1/(Nx Ny) sum_ij f_ij exp(-i k pi x_i / X) exp(-i l pi y_j / Y).
/// Stored in FFT-natural order; use at(k, l) with signed wavenumbers.
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(const GridSpec& grid) : grid_(grid), coeffs_(grid.size(), Complex{}) {}

    const GridSpec& grid() const { return grid_; }

    Complex at(int k, int l) const { return coeffs_[slot(k, l)]; }
    Complex& at(int k, int l) { return coeffs_[slot(k, l)]; }

    std::span<Complex> coeffs() { return coeffs_; }
    std::span<const Complex> coeffs() const { return coeffs_; }

    /// Largest |c_kl - conj(c_-k,-l)| relative to the largest coefficient.
    double symmetry_defect() const {
        double worst = 0.0, scale = 0.0;
        for (int li = 0; li < grid_.Ny; ++li)
            for (int ki = 0; ki < grid_.Nx; ++ki) {
                const Complex c = coeffs_[static_cast<std::size_t>(li) * grid_.Nx + ki];
                const int kr = (grid_.Nx - ki) % grid_.Nx;
                const int lr = (grid_.Ny - li) % grid_.Ny;
                const Complex m = coeffs_[static_cast<std::size_t>(lr) * grid_.Nx + kr];
                worst = std::max(worst, std::abs(c - std::conj(m)));
                scale = std::max(scale, std::abs(c));
            }
        return scale > 0.0 ? worst / scale : 0.0;
    }

private:
    std::size_t slot(int k, int l) const {
        if (k <= -grid_.Nx / 2 || k > grid_.Nx / 2 || l <= -grid_.Ny / 2 || l > grid_.Ny / 2)
            throw InvalidParameter("wavenumber outside the resolved range");
        return static_cast<std::size_t>(mode_index(l, grid_.Ny)) * grid_.Nx + mode_index(k, grid_.Nx);
    }

    GridSpec grid_{};
    std::vector<Complex> coeffs_;
};

namespace detail {

// FFTW planning and plan destruction are not thread safe; execution is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// Unnormalised real-to-half-complex transform pair on an Ny x Nx array
/// (j outer). Output has Ny rows of Nx/2 + 1 columns.
class RealTransform {
public:
    RealTransform(int nx, int ny) : nx_(nx), ny_(ny), nh_(nx / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        half_ = fftw_alloc_complex(static_cast<std::size_t>(nh_) * ny);
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_r2c_2d(ny, nx, real_, half_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_2d(ny, nx, half_, real_, FFTW_ESTIMATE);
    }
    RealTransform(const RealTransform&) = delete;
    RealTransform& operator=(const RealTransform&) = delete;
    ~RealTransform() {
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(real_);
        fftw_free(half_);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int half_nx() const { return nh_; }
    std::size_t real_size() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t half_size() const { return static_cast<std::size_t>(nh_) * ny_; }

    std::span<double> real() { return {real_, real_size()}; }
    std::span<Complex> half() { return {reinterpret_cast<Complex*>(half_), half_size()}; }

    void forward() { fftw_execute(forward_); }
    /// Overwrites half() as a side effect (FFTW c2r semantics).
    void backward() { fftw_execute(backward_); }

private:
    int nx_, ny_, nh_;
    double* real_ = nullptr;
    fftw_complex* half_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

/// In-place unnormalised complex transform pair.
class ComplexTransform {
public:
    ComplexTransform(int nx, int ny) : size_(static_cast<std::size_t>(nx) * ny) {
        data_ = fftw_alloc_complex(size_);
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_2d(ny, nx, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(ny, nx, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ComplexTransform(const ComplexTransform&) = delete;
    ComplexTransform& operator=(const ComplexTransform&) = delete;
    ~ComplexTransform() {
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(data_);
    }

    std::span<Complex> data() { return {reinterpret_cast<Complex*>(data_), size_}; }
    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    std::size_t size_;
    fftw_complex* data_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

// One cached plan per thread and grid size, so concurrent callers never share buffers.
template <class T>
T& cached_transform(int nx, int ny) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<T>> cache;
    auto& slot = cache[{nx, ny}];
    if (!slot) slot = std::make_unique<T>(nx, ny);
    return *slot;
}

inline RealTransform& real_transform(const GridSpec& g) { return cached_transform<RealTransform>(g.Nx, g.Ny); }
inline ComplexTransform& complex_transform(const GridSpec& g) {
    return cached_transform<ComplexTransform>(g.Nx, g.Ny);
}

/// Parseval weight of column k of a half spectrum: interior columns stand for two modes.
inline double half_weight(int k, int nx) { return (k == 0 || k == nx / 2) ? 1.0 : 2.0; }

/// Applies a diagonal Fourier multiplier to a real field. `symbol(k, l)` gets
/// signed wavenumbers (0 <= k <= Nx/2, -Ny/2 < l <= Ny/2).
template <class Symbol>
Field apply_symbol(const Field& f, Symbol&& symbol) {
    const GridSpec& g = f.grid();
    RealTransform& t = real_transform(g);
    std::copy(f.values().begin(), f.values().end(), t.real().begin());
    t.forward();
    auto half = t.half();
    const int nh = t.half_nx();
    const double norm = 1.0 / static_cast<double>(g.size());
    for (int li = 0; li < g.Ny; ++li) {
        const int l = wavenumber(li, g.Ny);
        for (int k = 0; k < nh; ++k) half[static_cast<std::size_t>(li) * nh + k] *= symbol(k, l) * norm;
    }
    t.backward();
    Field out(g);
    std::copy(t.real().begin(), t.real().end(), out.values().begin());
    return out;
}

/// Visits every (k, l, |c_kl|^2 times multiplicity) of f, coefficients normalised as in Spectrum.
template <class Visitor>
void visit_power(const Field& f, Visitor&& visit) {
    const GridSpec& g = f.grid();
    RealTransform& t = real_transform(g);
    std::copy(f.values().begin(), f.values().end(), t.real().begin());
    t.forward();
    auto half = t.half();
    const int nh = t.half_nx();
    const double norm = 1.0 / static_cast<double>(g.size());
    for (int li = 0; li < g.Ny; ++li) {
        const int l = wavenumber(li, g.Ny);
        for (int k = 0; k < nh; ++k)
            visit(k, l, half_weight(k, g.Nx) * std::norm(half[static_cast<std::size_t>(li) * nh + k] * norm));
    }
}

inline double sign_of_parity(int k, int l) { return ((k + l) & 1) ? -1.0 : 1.0; }

}  // namespace detail

// Wavenumber scalings: the mode k on [-X, X) has angular frequency k*pi/X.
inline double angular_x(const GridSpec& g, int k) { return k * std::numbers::pi / g.X; }
inline double angular_y(const GridSpec& g, int l) { return l * std::numbers::pi / g.Y; }
inline double wave_norm_sq(const GridSpec& g, int k, int l) {
    const double a = angular_x(g, k), b = angular_y(g, l);
    return a * a + b * b;
}

inline Spectrum dft(const Field& f) {
    const GridSpec& g = f.grid();
    auto& t = detail::complex_transform(g);
    auto data = t.data();
    for (std::size_t n = 0; n < g.size(); ++n) data[n] = Complex(f.values()[n], 0.0);
    t.forward();
    Spectrum s(g);
    auto c = s.coeffs();
    const double norm = 1.0 / static_cast<double>(g.size());
    // x_0 = -X contributes the factor (-1)^(k+l) relative to a plain FFT.
    for (int li = 0; li < g.Ny; ++li)
        for (int ki = 0; ki < g.Nx; ++ki) {
            const std::size_t n = static_cast<std::size_t>(li) * g.Nx + ki;
            c[n] = data[n] * (norm * detail::sign_of_parity(ki, li));
        }
    return s;
}

/// Inverse of dft. Throws SymmetryViolation when the synthesised values carry an
/// imaginary part above 1e-10 (scaled by max(1, max|f|)).
inline Field idft(const Spectrum& s) {
    const GridSpec& g = s.grid();
    auto& t = detail::complex_transform(g);
    auto data = t.data();
    auto c = s.coeffs();
    for (int li = 0; li < g.Ny; ++li)
        for (int ki = 0; ki < g.Nx; ++ki) {
            const std::size_t n = static_cast<std::size_t>(li) * g.Nx + ki;
            data[n] = c[n] * detail::sign_of_parity(ki, li);
        }
    t.backward();
    Field f(g);
    double imag = 0.0, scale = 1.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        f.values()[n] = data[n].real();
        imag = std::max(imag, std::abs(data[n].imag()));
        scale = std::max(scale, std::abs(data[n].real()));
    }
    if (imag > 1e-10 * scale)
        throw SymmetryViolation("inverse transform left an imaginary residue of " + std::to_string(imag));
    return f;
}

/// First-derivative multipliers i*k*pi/X; the Nyquist column/row is zeroed so the
/// result stays real.
inline Field derivative_x(const Field& f) {
    const GridSpec& g = f.grid();
    return detail::apply_symbol(
        f, [&](int k, int) { return k == g.Nx / 2 ? Complex{} : Complex(0.0, angular_x(g, k)); });
}

inline Field derivative_y(const Field& f) {
    const GridSpec& g = f.grid();
    return detail::apply_symbol(
        f, [&](int, int l) { return l == g.Ny / 2 ? Complex{} : Complex(0.0, angular_y(g, l)); });
}

inline std::pair<Field, Field> gradient(const Field& f) { return {derivative_x(f), derivative_y(f)}; }

inline Field divergence(const Field& gx, const Field& gy) {
    require_same_grid(gx.grid(), gy.grid());
    return derivative_x(gx) + derivative_y(gy);
}

inline Field laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    return detail::apply_symbol(f, [&](int k, int l) { return -wave_norm_sq(g, k, l); });
}

/// (-Delta_h)^{-1} with the (0,0) mode removed; the result has zero mean.
inline Field inv_laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    return detail::apply_symbol(f, [&](int k, int l) {
        return (k == 0 && l == 0) ? 0.0 : 1.0 / wave_norm_sq(g, k, l);
    });
}

inline double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_area();
}

inline double mean(const Field& f) { return integral(f) / f.grid().area(); }

/// Discrete L2 inner product h_x h_y sum f g.
inline double inner(const Field& f, const Field& g) {
    require_same_grid(f.grid(), g.grid());
    double s = 0.0;
    auto a = f.values(), b = g.values();
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s * f.grid().cell_area();
}

inline double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

inline double norm_linf(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

/// ||f||_{h,H^s} with the integer-wavenumber weights 1 + (k^2 + l^2)^s.
inline double hs_norm(const Field& f, double s) {
    double acc = 0.0;
    detail::visit_power(f, [&](int k, int l, double p) {
        acc += (1.0 + std::pow(static_cast<double>(k * k + l * l), s)) * p;
    });
    return std::sqrt(acc);
}

/// ||(-Delta_h)^{-1/2} f||^2 = <(-Delta_h)^{-1} f, f>_h, evaluated in Fourier space.
inline double inv_sqrt_laplacian_norm_sq(const Field& f) {
    const GridSpec& g = f.grid();
    double acc = 0.0;
    detail::visit_power(f, [&](int k, int l, double p) {
        if (k != 0 || l != 0) acc += p / wave_norm_sq(g, k, l);
    });
    return acc * g.area();
}

/// <-Delta_h f, f>_h evaluated in Fourier space; equals ||grad_h f||^2 when f has
/// no Nyquist content.
inline double dirichlet_form(const Field& f) {
    const GridSpec& g = f.grid();
    double acc = 0.0;
    detail::visit_power(f, [&](int k, int l, double p) { acc += p * wave_norm_sq(g, k, l); });
    return acc * g.area();
}

}  // namespace pacok::spectral
