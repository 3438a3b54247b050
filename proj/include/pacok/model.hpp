#pragma once

// Penalised Ohta-Kawasaki free energy: potentials, discrete energy and the
// three forces of the L2 gradient flow.

#include <cmath>
#include <numbers>
#include <string>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"
#include "pacok/spectral.hpp"

namespace pacok {

/// Which indicator enters the nonlocal and volume terms.
enum class Indicator {
    quintic,  ///< 6s^5 - 15s^4 + 10s^3, flat outside [0, 1]
    linear,   ///< f(s) = s (the classical model)
};

struct ModelParams {
    double eps = 0.0;    ///< interface width
    double gamma = 0.0;  ///< long-range interaction strength
    double omega = 0.15; ///< target volume fraction
    double M = 1000.0;   ///< volume penalty
    Indicator indicator = Indicator::quintic;
    /// Test hook: drops W from the energy and its force when false.
    bool double_well = true;

    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidParameter("eps must be positive");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidParameter("gamma must be >= 0");
        if (!(omega > 0.0 && omega < 1.0)) throw InvalidParameter("omega must lie in (0, 1)");
        if (!(M >= 0.0) || !std::isfinite(M)) throw InvalidParameter("M must be >= 0");
    }
};

// Double well 18 (s^2 - s)^2 on [0, 1], continued by 18 s^2 below 0 and
// 18 (s - 1)^2 above 1. Value, slope and curvature (36) all match at the joins.
inline double w_val(double s) {
    if (s < 0.0) return 18.0 * s * s;
    if (s > 1.0) return 18.0 * (s - 1.0) * (s - 1.0);
    const double q = s * s - s;
    return 18.0 * q * q;
}

inline double w_prime(double s) {
    if (s < 0.0) return 36.0 * s;
    if (s > 1.0) return 36.0 * (s - 1.0);
    return 36.0 * (s * s - s) * (2.0 * s - 1.0);
}

inline double w_second(double s) {
    if (s < 0.0 || s > 1.0) return 36.0;
    return 216.0 * s * s - 216.0 * s + 36.0;
}

inline double f_val(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

inline double f_prime(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double q = s * (1.0 - s);
    return 30.0 * q * q;
}

inline double f_second(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (2.0 * s - 1.0) * (s - 1.0);
}

inline double f_val(double s, Indicator ind) { return ind == Indicator::linear ? s : f_val(s); }
inline double f_prime(double s, Indicator ind) { return ind == Indicator::linear ? 1.0 : f_prime(s); }

struct PotentialBounds {
    double L_W;  ///< sup |W''|
    double L_f;  ///< sup |f''|
    double L_p;  ///< Lipschitz constant of f
};

/// Closed-form maxima for the quintic indicator and the quadratic well extension.
///   L_p = f'(1/2) = 15/8, L_f = |f''((3 +- sqrt 3)/6)| = 10/sqrt 3, L_W = W''(0) = 36.
inline PotentialBounds potential_bounds() {
    return {36.0, 10.0 / std::numbers::sqrt3, 15.0 / 8.0};
}

/// The linear indicator has f'' = 0 and Lipschitz constant 1.
inline PotentialBounds potential_bounds(Indicator ind) {
    return ind == Indicator::linear ? PotentialBounds{36.0, 0.0, 1.0} : potential_bounds();
}

struct EnergyBreakdown {
    double interface = 0.0;
    double doublewell = 0.0;
    double nonlocal = 0.0;
    double penalty = 0.0;
    double total = 0.0;
    /// <f(phi), 1>_h - omega |Omega|
    double volume_residual = 0.0;
};

inline EnergyBreakdown make_breakdown(double interface, double doublewell, double nonlocal, double penalty,
                                      double volume_residual) {
    EnergyBreakdown e;
    e.interface = interface;
    e.doublewell = doublewell;
    e.nonlocal = nonlocal;
    e.penalty = penalty;
    e.total = interface + doublewell + nonlocal + penalty;
    e.volume_residual = volume_residual;
    return e;
}

/// Discrete energy. The gradient term is taken as <-Delta_h phi, phi>_h so that it
/// is exactly the quadratic form the implicit step inverts (Nyquist included).
inline EnergyBreakdown energy(const Field& phi, const ModelParams& p) {
    const GridSpec& g = phi.grid();
    const Field f = phi.map([&](double s) { return f_val(s, p.indicator); });

    double wsum = 0.0;
    if (p.double_well)
        for (double v : phi.values()) wsum += w_val(v);

    const double residual = spectral::integral(f) - p.omega * g.area();
    return make_breakdown(0.5 * p.eps * spectral::dirichlet_form(phi), wsum * g.cell_area() / p.eps,
                          // the mean of f - omega is discarded by the inverse Laplacian
                          0.5 * p.gamma * spectral::inv_sqrt_laplacian_norm_sq(f), 0.5 * p.M * residual * residual,
                          residual);
}

struct Forces {
    Field tension;   ///< eps Lap phi - W'(phi)/eps
    Field nonlocal;  ///< -gamma (-Lap)^{-1}(f(phi) - omega) f'(phi)
    Field volume;    ///< -M (<f(phi),1> - omega|Omega|) f'(phi)

    Field sum() const { return tension + nonlocal + volume; }
};

inline Forces forces(const Field& phi, const ModelParams& p) {
    const GridSpec& g = phi.grid();
    const Field f = phi.map([&](double s) { return f_val(s, p.indicator); });
    const Field fp = phi.map([&](double s) { return f_prime(s, p.indicator); });
    const Field potential = spectral::inv_laplacian(f);
    const double residual = spectral::integral(f) - p.omega * g.area();

    Forces out{p.eps * spectral::laplacian(phi), Field(g), Field(g)};
    if (p.double_well) out.tension -= phi.map([&](double s) { return w_prime(s) / p.eps; });
    for (std::size_t n = 0; n < g.size(); ++n) {
        out.nonlocal.values()[n] = -p.gamma * potential.values()[n] * fp.values()[n];
        out.volume.values()[n] = -p.M * residual * fp.values()[n];
    }
    return out;
}

}  // namespace pacok
