#pragma once

// Flat `key = value` run configuration.
//
//   # comment
//   eps_over_h = 20
//   gamma = 100
//   tau = 1e-3
//
// Omitted keys take the experiment defaults: N = 512, X = Y = 1, omega = 0.15,
// M = 1000, kappa_h = 2000, beta_h = 2, tol = 1e-3. eps (or eps_over_h),
// gamma and tau are required.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"
#include "pacok/model.hpp"
#include "pacok/solver.hpp"

namespace pacok {

enum class InitialCondition { disc, tanh_disc, block_random, file };

struct RunConfig {
    GridSpec grid = GridSpec::square(512);
    ModelParams model;
    SolverParams solver;
    InitialCondition ic = InitialCondition::disc;
    int ic_ratio = 16;
    std::string ic_file;
    double r_shift = 0.1;  ///< radius offset of the tanh_disc start
    std::uint64_t seed = 1;
    /// Steps between snapshots; 0 writes only the final field.
    long snapshot_stride = 0;
    std::string output_dir = "out";
    /// Non-fatal parser remarks (duplicate keys).
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawValue {
    std::string text;
    int line;
};

class ConfigReader {
public:
    explicit ConfigReader(std::map<std::string, RawValue> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double real(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& t = it->second.text;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) fail(key, "a real number");
        return v;
    }

    long integer(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& t = it->second.text;
        long v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size()) fail(key, "an integer");
        return v;
    }

    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& t = it->second.text;
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size()) fail(key, "an unsigned 64-bit integer");
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& t = it->second.text;
        if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
        if (t == "false" || t == "0" || t == "no" || t == "off") return false;
        fail(key, "a boolean");
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second.text;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
        const auto& v = values_.at(key);
        throw TypeError("line " + std::to_string(v.line) + ": " + key + " = '" + v.text + "' is not " + expected);
    }

private:
    std::map<std::string, RawValue> values_;
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "N",        "Nx",      "Ny",        "X",           "Y",          "eps",         "eps_over_h",
        "gamma",    "omega",   "M",         "indicator",   "tau",        "kappa_h",     "beta_h",
        "tol",      "max_steps", "enforce_stability", "report_stride", "ic", "ic_ratio", "ic_file",
        "r_shift",  "seed",    "snapshot_stride", "output_dir"};
    return keys;
}

}  // namespace detail

/// Default snapshot spacing: at most 200 snapshots over max_steps.
inline long auto_snapshot_stride(long max_steps) { return std::max(1L, (max_steps + 199) / 200); }

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::map<std::string, detail::RawValue> values;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw TypeError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        const auto& keys = detail::known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw UnknownKey("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (auto it = values.find(key); it != values.end())
            cfg.warnings.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                                   "' overrides line " + std::to_string(it->second.line));
        values[key] = {value, line_no};
    }
    const detail::ConfigReader r(std::move(values));

    const long n = r.integer("N", 512);
    const long nx = r.integer("Nx", n), ny = r.integer("Ny", n);
    if (nx < 4 || ny < 4 || nx % 2 || ny % 2) throw TypeError("grid sizes must be even integers >= 4");
    cfg.grid = {r.real("X", 1.0), r.real("Y", 1.0), static_cast<int>(nx), static_cast<int>(ny)};
    if (!(cfg.grid.X > 0.0) || !(cfg.grid.Y > 0.0)) throw TypeError("X and Y must be positive");

    if (r.has("eps") && r.has("eps_over_h")) throw TypeError("eps and eps_over_h are mutually exclusive");
    if (r.has("eps")) {
        cfg.model.eps = r.real("eps", 0.0);
    } else if (r.has("eps_over_h")) {
        cfg.model.eps = r.real("eps_over_h", 0.0) * std::min(cfg.grid.hx(), cfg.grid.hy());
    } else {
        throw MissingRequired("eps (or eps_over_h) is required");
    }
    if (!(cfg.model.eps > 0.0)) throw TypeError("eps must be positive");
    if (!r.has("gamma")) throw MissingRequired("gamma is required");
    if (!r.has("tau")) throw MissingRequired("tau is required");

    cfg.model.gamma = r.real("gamma", 0.0);
    cfg.model.omega = r.real("omega", 0.15);
    cfg.model.M = r.real("M", 1000.0);
    if (!(cfg.model.gamma >= 0.0)) throw TypeError("gamma must be >= 0");
    if (!(cfg.model.omega > 0.0 && cfg.model.omega < 1.0)) throw TypeError("omega must lie in (0, 1)");
    if (!(cfg.model.M > 0.0)) throw TypeError("M must be positive");
    const std::string indicator = r.text("indicator", "quintic");
    if (indicator == "quintic") {
        cfg.model.indicator = Indicator::quintic;
    } else if (indicator == "linear") {
        cfg.model.indicator = Indicator::linear;
    } else {
        r.fail("indicator", "one of quintic, linear");
    }

    cfg.solver.tau = r.real("tau", 0.0);
    cfg.solver.kappa_h = r.real("kappa_h", 2000.0);
    cfg.solver.beta_h = r.real("beta_h", 2.0);
    cfg.solver.tol = r.real("tol", 1e-3);
    cfg.solver.max_steps = r.integer("max_steps", 200000);
    cfg.solver.enforce_stability = r.boolean("enforce_stability", true);
    cfg.solver.report_stride = r.integer("report_stride", 1);
    if (!(cfg.solver.tau > 0.0)) throw TypeError("tau must be positive");
    if (!(cfg.solver.kappa_h >= 0.0) || !(cfg.solver.beta_h >= 0.0)) throw TypeError("stabilizers must be >= 0");
    if (!(cfg.solver.tol > 0.0)) throw TypeError("tol must be positive");
    if (cfg.solver.max_steps < 0) throw TypeError("max_steps must be >= 0");
    if (cfg.solver.report_stride < 1) throw TypeError("report_stride must be >= 1");

    const std::string ic = r.text("ic", "disc");
    if (ic == "disc") {
        cfg.ic = InitialCondition::disc;
    } else if (ic == "tanh_disc") {
        cfg.ic = InitialCondition::tanh_disc;
    } else if (ic == "block_random") {
        cfg.ic = InitialCondition::block_random;
    } else if (ic == "file") {
        cfg.ic = InitialCondition::file;
    } else {
        r.fail("ic", "one of disc, tanh_disc, block_random, file");
    }
    cfg.ic_ratio = static_cast<int>(r.integer("ic_ratio", 16));
    if (cfg.ic == InitialCondition::block_random &&
        (cfg.ic_ratio < 1 || cfg.grid.Nx % cfg.ic_ratio || cfg.grid.Ny % cfg.ic_ratio))
        throw TypeError("ic_ratio must divide Nx and Ny");
    cfg.ic_file = r.text("ic_file", "");
    if (cfg.ic == InitialCondition::file && cfg.ic_file.empty()) throw MissingRequired("ic = file needs ic_file");
    cfg.r_shift = r.real("r_shift", 0.1);
    cfg.seed = r.unsigned64("seed", 1);
    cfg.snapshot_stride = r.integer("snapshot_stride", auto_snapshot_stride(cfg.solver.max_steps));
    if (cfg.snapshot_stride < 0) throw TypeError("snapshot_stride must be >= 0");
    cfg.output_dir = r.text("output_dir", "out");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace pacok
