#pragma once

// CSV sinks for energy histories and experiment tables, plus a reader for
// reading them back.

#include <charconv>
#include <limits>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/solver.hpp"

namespace pacok {

/// %.17g: enough digits for any double to round-trip.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr std::string_view energy_log_header =
    "step,time,E_total,E_interface,E_doublewell,E_nonlocal,E_penalty,volume_residual,step_change";

/// Appends one row per StepReport; the header goes out with the first row.
class EnergyLog {
public:
    explicit EnergyLog(std::ostream& out) : out_(out) {}

    void append(const StepReport& r) {
        if (!header_written_) {
            out_ << energy_log_header << '\n';
            header_written_ = true;
        }
        const EnergyBreakdown& e = r.energy;
        out_ << r.step << ',' << format_real(r.time) << ',' << format_real(e.total) << ','
             << format_real(e.interface) << ',' << format_real(e.doublewell) << ',' << format_real(e.nonlocal)
             << ',' << format_real(e.penalty) << ',' << format_real(e.volume_residual) << ','
             << format_real(r.step_change) << '\n';
        if (!out_) throw IoError("energy log write failed");
    }

private:
    std::ostream& out_;
    bool header_written_ = false;
};

/// Numeric CSV table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw IoError("missing CSV column " + std::string(name));
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    t.header = split_csv_line(line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw IoError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(t.header.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            if (c.empty()) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else {
                auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
                if (ec != std::errc{} || ptr != c.data() + c.size())
                    throw IoError("CSV line " + std::to_string(line_no) + ": cannot parse '" + c + "'");
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace pacok
