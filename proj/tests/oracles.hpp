#pragma once

// Independent reference implementations used by the tests. Everything here is
// direct summation in physical or Fourier space, no FFT.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "pacok/grid.hpp"

namespace oracle {

using pacok::Field;
using pacok::GridSpec;
using Complex = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline Field random_field(const GridSpec& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Field f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

/// Random trigonometric polynomial with |k| < Nx/2, |l| < Ny/2 (no Nyquist content).
inline Field band_limited_field(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Field f(g);
    for (int l = 0; l < g.Ny / 2; ++l)
        for (int k = -g.Nx / 2 + 1; k < g.Nx / 2; ++k) {
            if (l == 0 && k < 0) continue;
            const double a = n01(rng) / (1.0 + k * k + l * l), b = n01(rng) / (1.0 + k * k + l * l);
            for (int j = 0; j < g.Ny; ++j)
                for (int i = 0; i < g.Nx; ++i) {
                    const double t = k * pi * g.x(i) / g.X + l * pi * g.y(j) / g.Y;
                    f.at(i, j) += a * std::cos(t) + b * std::sin(t);
                }
        }
    return f;
}

/// c_kl = 1/(Nx Ny) sum_ij f_ij exp(-i k pi x_i/X) exp(-i l pi y_j/Y), signed k, l.
inline Complex dft_coeff(const Field& f, int k, int l) {
    const GridSpec& g = f.grid();
    Complex s{};
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i)
            s += f.at(i, j) * std::polar(1.0, -(k * pi * g.x(i) / g.X + l * pi * g.y(j) / g.Y));
    return s / static_cast<double>(g.size());
}

/// All coefficients, indexed [(l + Ny/2 - 1) * Nx + (k + Nx/2 - 1)].
inline std::vector<Complex> dft_all(const Field& f) {
    const GridSpec& g = f.grid();
    std::vector<Complex> c;
    for (int l = -g.Ny / 2 + 1; l <= g.Ny / 2; ++l)
        for (int k = -g.Nx / 2 + 1; k <= g.Nx / 2; ++k) c.push_back(dft_coeff(f, k, l));
    return c;
}

/// Synthesises sum c_kl m(k, l) exp(i(...)) and returns the real part.
template <class Multiplier>
Field synthesise(const GridSpec& g, const std::vector<Complex>& c, Multiplier&& m) {
    Field out(g);
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) {
            Complex s{};
            std::size_t n = 0;
            for (int l = -g.Ny / 2 + 1; l <= g.Ny / 2; ++l)
                for (int k = -g.Nx / 2 + 1; k <= g.Nx / 2; ++k, ++n)
                    s += c[n] * m(k, l) * std::polar(1.0, k * pi * g.x(i) / g.X + l * pi * g.y(j) / g.Y);
            out.at(i, j) = s.real();
        }
    return out;
}

inline double k2(const GridSpec& g, int k, int l) {
    const double a = k * pi / g.X, b = l * pi / g.Y;
    return a * a + b * b;
}

inline Field inv_laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    return synthesise(g, dft_all(f), [&](int k, int l) { return (k == 0 && l == 0) ? 0.0 : 1.0 / k2(g, k, l); });
}

inline Field laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    return synthesise(g, dft_all(f), [&](int k, int l) { return -k2(g, k, l); });
}

/// Second-derivative Fourier differentiation matrix on an n-point periodic axis
/// of half-length L, applied along one direction (closed-form entries, n even).
inline double d2_entry(int n, double L, int a, int b) {
    const double scale = (pi / L) * (pi / L);
    const double h = 2.0 * pi / n;
    if (a == b) return -scale * (pi * pi / (3.0 * h * h) + 1.0 / 6.0);
    const int d = a - b;
    const double sn = std::sin(d * h / 2.0);
    return -scale * ((d % 2 == 0) ? 1.0 : -1.0) / (2.0 * sn * sn);
}

/// Physical-space Laplacian by dense differentiation matrices.
inline Field matrix_laplacian(const Field& f) {
    const GridSpec& g = f.grid();
    Field out(g);
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) {
            double s = 0.0;
            for (int m = 0; m < g.Nx; ++m) s += d2_entry(g.Nx, g.X, i, m) * f.at(m, j);
            for (int m = 0; m < g.Ny; ++m) s += d2_entry(g.Ny, g.Y, j, m) * f.at(i, m);
            out.at(i, j) = s;
        }
    return out;
}

inline double sum_product(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.values().size(); ++n) s += a.values()[n] * b.values()[n];
    return s * a.grid().cell_area();
}

}  // namespace oracle
