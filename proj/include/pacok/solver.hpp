#pragma once

// First-order stabilised linear semi-implicit scheme. Per step:
//
//   ((1/tau + kappa/eps) I - eps Lap + gamma beta (-Lap)^{-1}) phi^{n+1} = F^n
//
// with every nonlinear and nonlocal term of F^n taken at phi^n, so the left
// side is diagonal in Fourier space.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"
#include "pacok/model.hpp"
#include "pacok/spectral.hpp"

namespace pacok {

struct SolverParams {
    double tau = 0.0;
    double kappa_h = 2000.0;
    double beta_h = 2.0;
    double tol = 1e-3;
    long max_steps = 100000;
    /// Raise kappa_h / beta_h to the guaranteed-stable minimum when below it.
    bool enforce_stability = true;
    /// Emit a StepReport every report_stride steps (and always for the last step).
    long report_stride = 1;

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidParameter("tau must be positive");
        if (!(kappa_h >= 0.0) || !(beta_h >= 0.0)) throw InvalidParameter("stabilizers must be >= 0");
        if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
        if (max_steps < 0) throw InvalidParameter("max_steps must be >= 0");
        if (report_stride < 1) throw InvalidParameter("report_stride must be >= 1");
    }
};

/// Sup over the torus of sum 1/(1 + (k^2 + l^2)^2), bounded by 1 + 4 pi^2/6 + pi^2/2.
inline double sobolev_constant_c2() {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    return std::sqrt(1.0 + 4.0 * pi2 / 6.0 + pi2 / 2.0);
}

/// Upper bound on ||(-Lap_h)^{-1}||_{L^inf}: C2 sqrt((1 + Cp^4)|Omega|), Cp = max(X, Y)/pi.
inline double inv_laplacian_linf_bound(const GridSpec& g) {
    const double cp = std::max(g.X, g.Y) / std::numbers::pi;
    return sobolev_constant_c2() * std::sqrt((1.0 + std::pow(cp, 4)) * g.area());
}

struct StabilityConstants {
    double kappa_min = 0.0;
    double beta_min = 0.0;
    double inv_laplacian_bound = 0.0;
};

/// Smallest (kappa_h, beta_h) for which the energy decay estimate holds.
inline StabilityConstants stability_constants(const ModelParams& p, const GridSpec& g) {
    const PotentialBounds b = potential_bounds(p.indicator);
    const double wmax = std::max(p.omega, 1.0 - p.omega);
    const double inv_bound = inv_laplacian_linf_bound(g);
    StabilityConstants c;
    c.inv_laplacian_bound = inv_bound;
    c.beta_min = 0.5 * b.L_p * b.L_p;
    c.kappa_min = 0.5 * b.L_W + p.eps * (0.5 * p.gamma * b.L_f * inv_bound * wmax +
                                         0.5 * p.M * g.area() * (b.L_p * b.L_p + b.L_f * wmax));
    return c;
}

/// Returns s with kappa_h / beta_h raised to the stable minimum when
/// s.enforce_stability is set. Each adjustment is described in *notes.
inline SolverParams resolve_stabilizers(const ModelParams& p, SolverParams s, const GridSpec& g,
                                        std::vector<std::string>* notes = nullptr) {
    if (!s.enforce_stability) return s;
    const StabilityConstants c = stability_constants(p, g);
    auto note = [&](const char* name, double from, double to) {
        if (!notes) return;
        std::ostringstream os;
        os.precision(10);
        os << name << " raised from " << from << " to stability minimum " << to;
        notes->push_back(os.str());
    };
    if (s.kappa_h < c.kappa_min) {
        note("kappa_h", s.kappa_h, c.kappa_min);
        s.kappa_h = c.kappa_min;
    }
    if (s.beta_h < c.beta_min) {
        note("beta_h", s.beta_h, c.beta_min);
        s.beta_h = c.beta_min;
    }
    return s;
}

/// Eigenvalues of the implicit operator, one per Fourier mode (FFT-natural order,
/// l outer).
struct ImplicitSymbol {
    GridSpec grid;
    std::vector<double> values;

    double at(int k, int l) const {
        return values[static_cast<std::size_t>(spectral::mode_index(l, grid.Ny)) * grid.Nx +
                      spectral::mode_index(k, grid.Nx)];
    }
};

inline double implicit_eigenvalue(const ModelParams& p, const SolverParams& s, const GridSpec& g, int k, int l) {
    const double base = 1.0 / s.tau + s.kappa_h / p.eps;
    if (k == 0 && l == 0) return base;
    const double k2 = spectral::wave_norm_sq(g, k, l);
    return base + p.eps * k2 + p.gamma * s.beta_h / k2;
}

inline ImplicitSymbol precompute_symbol(const ModelParams& p, const SolverParams& s, const GridSpec& g) {
    ImplicitSymbol sym{g, std::vector<double>(g.size())};
    for (int li = 0; li < g.Ny; ++li)
        for (int ki = 0; ki < g.Nx; ++ki)
            sym.values[static_cast<std::size_t>(li) * g.Nx + ki] = implicit_eigenvalue(
                p, s, g, spectral::wavenumber(ki, g.Nx), spectral::wavenumber(li, g.Ny));
    return sym;
}

/// F^n, assembled term by term from the spectral operators.
inline Field explicit_rhs(const Field& phi, const ModelParams& p, const SolverParams& s) {
    const GridSpec& g = phi.grid();
    const Field f = phi.map([&](double v) { return f_val(v, p.indicator); });
    const Field fp = phi.map([&](double v) { return f_prime(v, p.indicator); });
    Field shifted = phi;
    shifted += -p.omega;
    Field f_shifted = f;
    f_shifted += -p.omega;
    const Field stab_potential = spectral::inv_laplacian(shifted);
    const Field potential = spectral::inv_laplacian(f_shifted);
    const double residual = spectral::integral(f) - p.omega * g.area();

    Field out(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double v = phi.values()[n];
        const double wp = p.double_well ? w_prime(v) : 0.0;
        out.values()[n] = v / s.tau + (s.kappa_h * v - wp) / p.eps +
                          p.gamma * (s.beta_h * stab_potential.values()[n] - potential.values()[n] * fp.values()[n]) -
                          p.M * residual * fp.values()[n];
    }
    return out;
}

/// One step through the public transforms: phi^{n+1} = idft(dft(F^n) / lambda).
inline Field step(const Field& phi, const ModelParams& p, const SolverParams& s, const ImplicitSymbol& symbol) {
    require_same_grid(phi.grid(), symbol.grid);
    spectral::Spectrum rhs = spectral::dft(explicit_rhs(phi, p, s));
    auto c = rhs.coeffs();
    for (std::size_t n = 0; n < c.size(); ++n) c[n] /= symbol.values[n];
    return spectral::idft(rhs);
}

/// Left-hand operator of the implicit step applied to u.
inline Field apply_implicit_operator(const Field& u, const ModelParams& p, const SolverParams& s) {
    Field out = u * (1.0 / s.tau + s.kappa_h / p.eps);
    out -= p.eps * spectral::laplacian(u);
    out += (p.gamma * s.beta_h) * spectral::inv_laplacian(u);
    return out;
}

struct StepReport {
    long step = 0;
    double time = 0.0;
    EnergyBreakdown energy;
    /// ||phi^{n+1} - phi^n||_inf / tau
    double step_change = 0.0;
    bool converged = false;
};

struct RunResult {
    Field phi;
    EnergyBreakdown initial_energy;
    std::vector<StepReport> reports;
    long steps = 0;
    bool converged = false;
    /// Steps where E_h rose by more than 1e-10 relative.
    long energy_increases = 0;
    std::vector<std::string> warnings;
};

using StepCallback = std::function<void(const StepReport&, const Field&)>;

/// Time integrator with cached transforms and symbols. Each Solver owns its own
/// FFT buffers; distinct Solvers may run on distinct threads.
class Solver {
public:
    Solver(const GridSpec& grid, const ModelParams& model, const SolverParams& params)
        : grid_(checked(grid)), model_(model), transform_(grid.Nx, grid.Ny) {
        model_.validate();
        params.validate();
        params_ = resolve_stabilizers(model_, params, grid_, &notes_);
        stability_ = stability_constants(model_, grid_);

        const int nh = transform_.half_nx();
        lambda_.resize(transform_.half_size());
        inv_k2_.resize(transform_.half_size());
        weight_.resize(transform_.half_size());
        k2_.resize(transform_.half_size());
        for (int li = 0; li < grid_.Ny; ++li) {
            const int l = spectral::wavenumber(li, grid_.Ny);
            for (int k = 0; k < nh; ++k) {
                const std::size_t n = static_cast<std::size_t>(li) * nh + k;
                const double k2 = spectral::wave_norm_sq(grid_, k, l);
                k2_[n] = k2;
                inv_k2_[n] = (k == 0 && l == 0) ? 0.0 : 1.0 / k2;
                lambda_[n] = implicit_eigenvalue(model_, params_, grid_, k, l);
                weight_[n] = spectral::detail::half_weight(k, grid_.Nx);
            }
        }
        phi_hat_.resize(transform_.half_size());
        local_.resize(grid_.size());
        fprime_.resize(grid_.size());
    }

    const GridSpec& grid() const { return grid_; }
    const ModelParams& model() const { return model_; }
    /// Parameters after any stabilizer adjustment.
    const SolverParams& params() const { return params_; }
    const StabilityConstants& stability() const { return stability_; }
    const std::vector<std::string>& notes() const { return notes_; }

    EnergyBreakdown energy(const Field& phi) {
        require_same_grid(phi.grid(), grid_);
        transform_phi(phi);
        return load(phi);
    }

    Field step(const Field& phi) {
        require_same_grid(phi.grid(), grid_);
        transform_phi(phi);
        load(phi);
        Field next(grid_);
        advance(next);
        return next;
    }

    /// Steps until ||phi^{n+1} - phi^n||_inf / tau <= tol or max_steps.
    RunResult run(const Field& phi0, const StepCallback& on_report = {}) {
        require_same_grid(phi0.grid(), grid_);
        if (!phi0.all_finite()) throw InvalidParameter("initial field has non-finite values");

        RunResult result;
        result.phi = phi0;
        transform_phi(result.phi);
        EnergyBreakdown current = load(result.phi);
        result.initial_energy = current;

        Field next(grid_);
        for (long n = 1; n <= params_.max_steps; ++n) {
            advance(next);
            double change = 0.0;
            for (std::size_t i = 0; i < grid_.size(); ++i)
                change = std::max(change, std::abs(next.values()[i] - result.phi.values()[i]));
            change /= params_.tau;
            std::swap(result.phi, next);
            if (!std::isfinite(change)) throw Error("solution diverged at step " + std::to_string(n));

            const EnergyBreakdown e = load(result.phi);
            if (e.total > current.total + 1e-10 * std::abs(current.total)) {
                ++result.energy_increases;
                if (params_.enforce_stability) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "NonMonotoneEnergy: step " << n << " energy rose from " << current.total << " to "
                       << e.total;
                    result.warnings.push_back(os.str());
                }
            }
            current = e;

            const bool converged = change <= params_.tol;
            result.steps = n;
            result.converged = converged;
            if (converged || n == params_.max_steps || n % params_.report_stride == 0) {
                StepReport r{n, n * params_.tau, e, change, converged};
                result.reports.push_back(r);
                if (on_report) on_report(r, result.phi);
            }
            if (converged) break;
        }
        return result;
    }

private:
    static const GridSpec& checked(const GridSpec& g) {
        g.validate();
        return g;
    }

    void transform_phi(const Field& phi) {
        std::copy(phi.values().begin(), phi.values().end(), transform_.real().begin());
        transform_.forward();
        std::copy(transform_.half().begin(), transform_.half().end(), phi_hat_.begin());
    }

    // Evaluates every explicit term at phi (whose transform is in phi_hat_),
    // leaves the physical-space part of F^n in local_ and returns E_h[phi].
    EnergyBreakdown load(const Field& phi) {
        const std::size_t size = grid_.size();
        const double inv_n = 1.0 / static_cast<double>(size);
        const double dA = grid_.cell_area();
        auto real = transform_.real();
        auto half = transform_.half();

        double fsum = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            const double v = phi.values()[i];
            const double f = f_val(v, model_.indicator);
            real[i] = f;
            fsum += f;
            fprime_[i] = f_prime(v, model_.indicator);
            if (model_.double_well) wsum += w_val(v);
        }
        transform_.forward();

        // Parseval: <u, v>_h = |Omega| / N^2 sum S_u conj(S_v) for unnormalised S.
        const double parseval = grid_.area() * inv_n * inv_n;
        double nonlocal = 0.0, dirichlet = 0.0;
        for (std::size_t n = 0; n < half.size(); ++n) {
            nonlocal += weight_[n] * std::norm(half[n]) * inv_k2_[n];
            dirichlet += weight_[n] * std::norm(phi_hat_[n]) * k2_[n];
            half[n] *= inv_k2_[n] * inv_n;
        }
        transform_.backward();  // real <- (-Lap)^{-1}(f - omega)

        const double residual = fsum * dA - model_.omega * grid_.area();
        const double a = 1.0 / params_.tau + params_.kappa_h / model_.eps;
        for (std::size_t i = 0; i < size; ++i) {
            const double v = phi.values()[i];
            const double wp = model_.double_well ? w_prime(v) : 0.0;
            local_[i] = a * v - wp / model_.eps - (model_.gamma * real[i] + model_.M * residual) * fprime_[i];
        }

        return make_breakdown(0.5 * model_.eps * dirichlet * parseval, wsum * dA / model_.eps,
                              0.5 * model_.gamma * nonlocal * parseval, 0.5 * model_.M * residual * residual,
                              residual);
    }

    // phi^{n+1} from local_ and phi_hat_; leaves phi_hat_ holding the new transform.
    void advance(Field& next) {
        auto real = transform_.real();
        auto half = transform_.half();
        std::copy(local_.begin(), local_.end(), real.begin());
        transform_.forward();
        // The stabilising gamma beta (-Lap)^{-1}(phi^n - omega) term acts on the
        // mean-free part only, so it is added directly in Fourier space.
        const double gb = model_.gamma * params_.beta_h;
        for (std::size_t n = 0; n < half.size(); ++n) {
            const std::complex<double> rhs = half[n] + gb * inv_k2_[n] * phi_hat_[n];
            phi_hat_[n] = rhs / lambda_[n];
            half[n] = phi_hat_[n] / static_cast<double>(grid_.size());
        }
        transform_.backward();
        std::copy(real.begin(), real.end(), next.values().begin());
    }

    GridSpec grid_;
    ModelParams model_;
    SolverParams params_;
    StabilityConstants stability_;
    std::vector<std::string> notes_;
    spectral::detail::RealTransform transform_;
    std::vector<double> lambda_, inv_k2_, weight_, k2_;
    std::vector<std::complex<double>> phi_hat_;
    std::vector<double> local_, fprime_;
};

}  // namespace pacok
