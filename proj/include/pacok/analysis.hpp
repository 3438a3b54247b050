#pragma once

// Experiment harnesses: initial states, profile diagnostics, bubble counting,
// power-law fitting and the temporal convergence study.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"
#include "pacok/model.hpp"
#include "pacok/solver.hpp"
#include "pacok/spectral.hpp"

namespace pacok {

// ---------------------------------------------------------------------------
// Initial conditions

/// Radius of the disc holding volume fraction omega of the domain.
inline double disc_radius(const GridSpec& g, double omega) { return std::sqrt(omega * g.area() / std::numbers::pi); }

/// 1 inside the disc x^2 + y^2 <= r0^2 with r0 = sqrt(omega |Omega| / pi), 0 outside.
inline Field ic_disc_indicator(const GridSpec& g, double omega) {
    g.validate();
    const double r0 = disc_radius(g, omega);
    const double half = std::min(g.X, g.Y);
    if (!(omega * g.area() < std::numbers::pi * half * half))
        throw DiscTooLarge("disc of radius " + std::to_string(r0) + " does not fit the domain");
    return Field::sample(g, [&](double x, double y) { return x * x + y * y <= r0 * r0 ? 1.0 : 0.0; });
}

/// 0.5 + 0.5 tanh((r0 - r) / (eps/3)) with r0 = sqrt(omega |Omega| / pi) + r_shift.
inline Field ic_tanh_disc(const GridSpec& g, double omega, double eps, double r_shift = 0.1) {
    if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
    const double r0 = disc_radius(g, omega) + r_shift;
    return Field::sample(g, [&](double x, double y) {
        return 0.5 + 0.5 * std::tanh((r0 - std::hypot(x, y)) / (eps / 3.0));
    });
}

/// Uniform [0, 1) values on a coarse mesh, each repeated over a ratio x ratio block.
inline Field ic_block_random(const GridSpec& g, int ratio, std::uint64_t seed) {
    g.validate();
    if (ratio < 1 || g.Nx % ratio != 0 || g.Ny % ratio != 0)
        throw RatioMismatch("ratio " + std::to_string(ratio) + " must divide both grid sizes");
    const int cx = g.Nx / ratio, cy = g.Ny / ratio;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> coarse(static_cast<std::size_t>(cx) * cy);
    for (double& v : coarse) v = uniform(rng);
    Field f(g);
    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) f.at(i, j) = coarse[static_cast<std::size_t>(j / ratio) * cx + i / ratio];
    return f;
}

// ---------------------------------------------------------------------------
// Profiles

struct ProfilePoint {
    double coordinate;
    double value;
};

/// Row of phi at the grid line nearest to y = axis_value.
inline std::vector<ProfilePoint> cross_section(const Field& phi, double axis_value) {
    const GridSpec& g = phi.grid();
    const long j = std::lround((axis_value + g.Y) / g.hy());
    std::vector<ProfilePoint> row;
    row.reserve(g.Nx);
    for (int i = 0; i < g.Nx; ++i) row.push_back({g.x(i), phi(i, static_cast<int>(j))});
    return row;
}

struct TanhDeviation {
    double far_field_dev = 0.0;  ///< max distance to {0, 1} further than 3 eps from the interface
    double fit_err = 0.0;        ///< L^inf misfit of the y = 0 profile against the best tanh
    double interface_radius = 0.0;
    double angular_dev = 0.0;  ///< max |phi(x, y) - profile(r)| over the grid
    bool not_radial = false;
};

namespace detail {

inline double tanh_profile(double r_star, double r, double eps) {
    return 0.5 + 0.5 * std::tanh((r_star - r) / (eps / 3.0));
}

inline double profile_misfit(const std::vector<ProfilePoint>& row, double r_star, double eps) {
    double worst = 0.0;
    for (const auto& p : row) worst = std::max(worst, std::abs(p.value - tanh_profile(r_star, std::abs(p.coordinate), eps)));
    return worst;
}

}  // namespace detail

/// Compares a radially symmetric bump against 0.5 + 0.5 tanh((r* - r)/(eps/3)).
/// r* is located by a coarse scan followed by golden-section refinement.
inline TanhDeviation tanh_profile_deviation(const Field& phi, double eps, double not_radial_threshold = 0.05) {
    const GridSpec& g = phi.grid();
    const auto row = cross_section(phi, 0.0);
    TanhDeviation out;

    const double r_max = std::max(g.X, g.Y);
    constexpr int scan = 400;
    double best_r = 0.0, best = detail::profile_misfit(row, 0.0, eps);
    for (int s = 1; s <= scan; ++s) {
        const double r = r_max * s / scan;
        const double m = detail::profile_misfit(row, r, eps);
        if (m < best) best = m, best_r = r;
    }
    double lo = std::max(0.0, best_r - r_max / scan), hi = std::min(r_max, best_r + r_max / scan);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
    double fa = detail::profile_misfit(row, a, eps), fb = detail::profile_misfit(row, b, eps);
    while (hi - lo > 1e-14 * std::max(1.0, hi)) {
        if (fa < fb) {
            hi = b, b = a, fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = detail::profile_misfit(row, a, eps);
        } else {
            lo = a, a = b, fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = detail::profile_misfit(row, b, eps);
        }
    }
    out.interface_radius = 0.5 * (lo + hi);
    out.fit_err = std::min({fa, fb, detail::profile_misfit(row, out.interface_radius, eps)});

    // Radial profile along +x for interpolation.
    std::vector<ProfilePoint> ray;
    for (const auto& p : row)
        if (p.coordinate >= 0.0) ray.push_back(p);
    auto radial = [&](double r) {
        if (r >= ray.back().coordinate) return ray.back().value;
        const double h = g.hx();
        const auto k = static_cast<std::size_t>(r / h);
        const double t = (r - ray[k].coordinate) / h;
        return (1.0 - t) * ray[k].value + t * ray[k + 1].value;
    };

    for (int j = 0; j < g.Ny; ++j)
        for (int i = 0; i < g.Nx; ++i) {
            const double r = std::hypot(g.x(i), g.y(j));
            const double v = phi.at(i, j);
            if (std::abs(r - out.interface_radius) > 3.0 * eps)
                out.far_field_dev = std::max(out.far_field_dev, std::min(std::abs(v), std::abs(v - 1.0)));
            if (r <= ray.back().coordinate) out.angular_dev = std::max(out.angular_dev, std::abs(v - radial(r)));
        }
    out.not_radial = out.angular_dev > not_radial_threshold;
    return out;
}

// ---------------------------------------------------------------------------
// Bubbles

/// Connected components of {phi > threshold}, 4-neighbour, periodic.
inline int count_bubbles(const Field& phi, double threshold = 0.5) {
    const GridSpec& g = phi.grid();
    const int nx = g.Nx, ny = g.Ny;
    std::vector<int> label(g.size(), -1);
    std::vector<int> stack;
    int count = 0;
    for (int start = 0; start < static_cast<int>(g.size()); ++start) {
        if (label[start] >= 0 || !(phi.values()[start] > threshold)) continue;
        label[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const int n = stack.back();
            stack.pop_back();
            const int i = n % nx, j = n / nx;
            const int nbrs[4] = {j * nx + (i + 1) % nx, j * nx + (i + nx - 1) % nx, ((j + 1) % ny) * nx + i,
                                 ((j + ny - 1) % ny) * nx + i};
            for (int m : nbrs)
                if (label[m] < 0 && phi.values()[m] > threshold) {
                    label[m] = count;
                    stack.push_back(m);
                }
        }
        ++count;
    }
    return count;
}

struct PowerLawFit {
    double exponent;
    double prefactor;
};

/// Least-squares line through (log gamma, log count).
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw DegenerateFit("need at least two points");
    double sx = 0, sy = 0;
    for (auto [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw InvalidParameter("power-law data must be positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (auto [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx <= 0.0) throw DegenerateFit("all abscissae are equal");
    const double slope = sxy / sxx;
    return {slope, std::exp(my - slope * mx)};
}

struct BubbleCount {
    double gamma = 0.0;
    int count = 0;                ///< modal count over replicates
    int runs = 0;
    std::vector<int> replicates;  ///< per-seed counts, seed order
    bool disagreement = false;    ///< replicates not all equal
};

/// Most frequent value; ties go to the smaller count.
inline int mode_of(const std::vector<int>& values) {
    std::map<int, int> freq;
    for (int v : values) ++freq[v];
    int best = 0, best_n = -1;
    for (auto [v, n] : freq)
        if (n > best_n) best = v, best_n = n;
    return best;
}

/// Worker count: PACOK_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("PACOK_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(0..n-1) on up to `workers` threads. The first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned t = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (t == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
}

struct SweepSettings {
    GridSpec grid = GridSpec::square(512);
    ModelParams model;           ///< gamma is overwritten per sweep entry
    SolverParams solver;
    int ratio = 16;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double threshold = 0.5;
    unsigned workers = 1;
};

struct SweepRun {
    double gamma;
    std::uint64_t seed;
    int count;
    long steps;
    bool converged;
    long energy_increases;
};

/// One run per (gamma, seed) from a block-random start; the counts are
/// reduced to a modal BubbleCount per gamma.
inline std::pair<std::vector<BubbleCount>, std::vector<SweepRun>> bubble_sweep(const std::vector<double>& gammas,
                                                                               const SweepSettings& s) {
    std::vector<SweepRun> runs(gammas.size() * s.seeds.size());
    parallel_for(runs.size(), s.workers, [&](std::size_t n) {
        const double gamma = gammas[n / s.seeds.size()];
        const std::uint64_t seed = s.seeds[n % s.seeds.size()];
        ModelParams p = s.model;
        p.gamma = gamma;
        Solver solver(s.grid, p, s.solver);
        const RunResult r = solver.run(ic_block_random(s.grid, s.ratio, seed));
        runs[n] = {gamma, seed, count_bubbles(r.phi, s.threshold), r.steps, r.converged, r.energy_increases};
    });

    std::vector<BubbleCount> counts;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        BubbleCount b;
        b.gamma = gammas[gi];
        for (std::size_t si = 0; si < s.seeds.size(); ++si) b.replicates.push_back(runs[gi * s.seeds.size() + si].count);
        b.runs = static_cast<int>(b.replicates.size());
        b.count = mode_of(b.replicates);
        b.disagreement = std::any_of(b.replicates.begin(), b.replicates.end(), [&](int c) { return c != b.count; });
        counts.push_back(b);
    }
    return {counts, runs};
}

// ---------------------------------------------------------------------------
// Temporal convergence

struct ConvergenceRow {
    double tau = 0.0;
    double error = 0.0;               ///< ||phi_tau(T) - phi_bench(T)||_{h,L2}
    double relative_error = 0.0;      ///< error / ||phi_bench(T)||_{h,L2}
    std::optional<double> rate;       ///< log2(previous error / error)
};

/// Fixed-step integration to time T (no stopping rule).
inline Field integrate_to(const Field& phi0, const ModelParams& p, SolverParams s, double T) {
    const long steps = std::lround(T / s.tau);
    if (std::abs(steps * s.tau - T) > 1e-9 * T) throw InvalidParameter("T is not a multiple of tau");
    s.max_steps = steps;
    s.tol = std::numeric_limits<double>::min();  // run the full horizon
    s.report_stride = std::max(1L, steps);
    Solver solver(phi0.grid(), p, s);
    return solver.run(phi0).phi;
}

/// Errors at time T against a small-step benchmark, with successive log2 rates.
inline std::vector<ConvergenceRow> convergence_rows(const std::vector<double>& taus, const std::vector<Field>& solutions,
                                                    const Field& benchmark) {
    std::vector<ConvergenceRow> rows;
    const double bench_norm = spectral::norm_l2(benchmark);
    for (std::size_t n = 0; n < taus.size(); ++n) {
        ConvergenceRow row;
        row.tau = taus[n];
        row.error = spectral::norm_l2(solutions[n] - benchmark);
        row.relative_error = bench_norm > 0.0 ? row.error / bench_norm : 0.0;
        if (n > 0) row.rate = std::log2(rows.back().error / row.error);
        rows.push_back(row);
    }
    return rows;
}

/// Runs initial -> T for every tau and for tau_bench; compares at T.
inline std::vector<ConvergenceRow> convergence_study(const Field& initial, const ModelParams& p,
                                                     const SolverParams& base, const std::vector<double>& taus,
                                                     double tau_bench, double T) {
    if (taus.empty()) return {};
    if (!(tau_bench < *std::min_element(taus.begin(), taus.end())))
        throw InvalidParameter("benchmark step must be smaller than every tested step");
    auto with_tau = [&](double tau) {
        SolverParams s = base;
        s.tau = tau;
        return s;
    };
    const Field bench = integrate_to(initial, p, with_tau(tau_bench), T);
    std::vector<Field> solutions;
    for (double tau : taus) solutions.push_back(integrate_to(initial, p, with_tau(tau), T));
    return convergence_rows(taus, solutions, bench);
}

/// Table protocol: tanh disc start, tau halved from 0.1 down to 1.5625e-3.
inline std::vector<double> halving_taus(double first = 0.1, int count = 7) {
    std::vector<double> taus;
    for (int n = 0; n < count; ++n) taus.push_back(first / std::pow(2.0, n));
    return taus;
}

}  // namespace pacok
