#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pacok/config.hpp"
#include "pacok/csv.hpp"
#include "pacok/snapshot.hpp"

using namespace pacok;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("pacok_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

const char* required = "eps_over_h = 20\ngamma = 100\ntau = 1e-3\n";

}  // namespace

TEST(Config, RequiredTrioGivesExperimentDefaults) {
    const RunConfig c = parse_config(required);
    EXPECT_EQ(c.grid, GridSpec::square(512));
    EXPECT_DOUBLE_EQ(c.model.eps, 20.0 * 2.0 / 512.0);
    EXPECT_EQ(c.model.gamma, 100.0);
    EXPECT_EQ(c.model.omega, 0.15);
    EXPECT_EQ(c.model.M, 1000.0);
    EXPECT_EQ(c.model.indicator, Indicator::quintic);
    EXPECT_EQ(c.solver.tau, 1e-3);
    EXPECT_EQ(c.solver.kappa_h, 2000.0);
    EXPECT_EQ(c.solver.beta_h, 2.0);
    EXPECT_EQ(c.solver.tol, 1e-3);
    EXPECT_TRUE(c.solver.enforce_stability);
    EXPECT_EQ(c.ic, InitialCondition::disc);
    EXPECT_EQ(c.snapshot_stride, auto_snapshot_stride(c.solver.max_steps));
    EXPECT_LE(c.solver.max_steps / c.snapshot_stride, 200);
    EXPECT_TRUE(c.warnings.empty());
}

TEST(Config, ParsesEveryKey) {
    const RunConfig c = parse_config(R"(# full example
Nx = 64
Ny = 32
X = 2
Y = 1
eps = 0.05   # absolute width
gamma = 2000
omega = 0.3
M = 500
indicator = linear
tau = 5e-3
kappa_h = 100
beta_h = 1
tol = 1e-4
max_steps = 1000
enforce_stability = false
report_stride = 10
ic = block_random
ic_ratio = 8
r_shift = 0.2
seed = 18446744073709551615
snapshot_stride = 50
output_dir = results/a
)");
    EXPECT_EQ(c.grid, (GridSpec{2, 1, 64, 32}));
    EXPECT_EQ(c.model.eps, 0.05);
    EXPECT_EQ(c.model.omega, 0.3);
    EXPECT_EQ(c.model.M, 500.0);
    EXPECT_EQ(c.model.indicator, Indicator::linear);
    EXPECT_EQ(c.solver.kappa_h, 100.0);
    EXPECT_EQ(c.solver.beta_h, 1.0);
    EXPECT_EQ(c.solver.tol, 1e-4);
    EXPECT_EQ(c.solver.max_steps, 1000);
    EXPECT_FALSE(c.solver.enforce_stability);
    EXPECT_EQ(c.solver.report_stride, 10);
    EXPECT_EQ(c.ic, InitialCondition::block_random);
    EXPECT_EQ(c.ic_ratio, 8);
    EXPECT_EQ(c.r_shift, 0.2);
    EXPECT_EQ(c.seed, 18446744073709551615ull);
    EXPECT_EQ(c.snapshot_stride, 50);
    EXPECT_EQ(c.output_dir, "results/a");
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config(std::string(required) + "omega = 1.5\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "colour = red\n"), UnknownKey);
    EXPECT_THROW(parse_config("gamma = 100\ntau = 1e-3\n"), MissingRequired);
    EXPECT_THROW(parse_config("eps = 0.1\ntau = 1e-3\n"), MissingRequired);
    EXPECT_THROW(parse_config("eps = 0.1\ngamma = 1\n"), MissingRequired);
    EXPECT_THROW(parse_config(std::string(required) + "eps = 0.1\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "N = 63\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "tau = fast\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "enforce_stability = maybe\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "M = 0\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "ic = block_random\nic_ratio = 7\n"), TypeError);
    EXPECT_THROW(parse_config(std::string(required) + "ic = file\n"), MissingRequired);
    EXPECT_THROW(parse_config(std::string(required) + "just words\n"), TypeError);
    EXPECT_THROW(load_config("/nonexistent/pacok.cfg"), IoError);
}

TEST(Config, ErrorsAreConfigErrors) {
    try {
        parse_config("gamma = 1\n");
        FAIL();
    } catch (const ConfigError&) {
    }
}

TEST(Config, DuplicateKeyLastWinsWithWarning) {
    const RunConfig c = parse_config(std::string(required) + "gamma = 300\n");
    EXPECT_EQ(c.model.gamma, 300.0);
    ASSERT_EQ(c.warnings.size(), 1u);
    EXPECT_NE(c.warnings[0].find("gamma"), std::string::npos);
}

TEST(Snapshot, FileSizeOfFourByFour) {
    TempDir dir;
    write_snapshot(Field(GridSpec::square(4), 1.0), dir.path() / "s.bin");
    EXPECT_EQ(fs::file_size(dir.path() / "s.bin"), 160u);
}

TEST(Snapshot, ByteLayout) {
    const GridSpec g{1.5, 0.5, 4, 6};
    Field f(g);
    f.at(1, 0) = 2.0;
    f.at(0, 1) = -1.0;
    const auto bytes = encode_snapshot(f);
    ASSERT_EQ(bytes.size(), 32u + 8u * 24u);
    EXPECT_EQ(std::memcmp(bytes.data(), "PACOKF1\0", 8), 0);
    EXPECT_EQ(bytes[8], 4);
    EXPECT_EQ(bytes[9] | bytes[10] | bytes[11], 0);
    EXPECT_EQ(bytes[12], 6);
    // 1.5 = 0x3FF8000000000000, little-endian
    EXPECT_EQ(bytes[23], 0x3F);
    EXPECT_EQ(bytes[22], 0xF8);
    EXPECT_EQ(bytes[16], 0x00);
    // value (i = 1, j = 0) is second; (i = 0, j = 1) is Nx-th
    EXPECT_EQ(bytes[32 + 8 + 7], 0x40);
    EXPECT_EQ(bytes[32 + 8 * 4 + 7], 0xBF);
}

TEST(Snapshot, RoundTripIsBitwise) {
    std::mt19937_64 rng(5);
    for (int n = 0; n < 1000; ++n) {
        const GridSpec g{1.0 + (n % 3), 0.5 + (n % 5), 4 + 2 * (n % 4), 4 + 2 * (n % 3)};
        Field f(g);
        for (double& v : f.values()) v = std::bit_cast<double>(rng() & 0x7FEFFFFFFFFFFFFFull);
        const Field back = decode_snapshot(encode_snapshot(f));
        ASSERT_EQ(back.grid(), g);
        ASSERT_EQ(std::memcmp(back.values().data(), f.values().data(), 8 * g.size()), 0);
    }
}

TEST(Snapshot, FileRoundTripAndGridCheck) {
    TempDir dir;
    const Field f = oracle::random_field(GridSpec::square(16), 4);
    write_snapshot(f, dir.path() / "a.bin");
    const Field back = read_snapshot(dir.path() / "a.bin", GridSpec::square(16));
    EXPECT_EQ(std::memcmp(back.values().data(), f.values().data(), 8 * 256), 0);
    EXPECT_THROW(read_snapshot(dir.path() / "a.bin", GridSpec::square(8)), GridMismatch);
    EXPECT_THROW(read_snapshot(dir.path() / "missing.bin"), IoError);
}

TEST(Snapshot, CorruptFiles) {
    auto bytes = encode_snapshot(Field(GridSpec::square(4), 0.5));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_snapshot(bad), BadMagic);
    EXPECT_THROW(decode_snapshot({bytes.begin(), bytes.begin() + 20}), TruncatedFile);
    EXPECT_THROW(decode_snapshot({bytes.begin(), bytes.end() - 1}), TruncatedFile);
    EXPECT_THROW(decode_snapshot({bytes.begin(), bytes.begin() + 3}), TruncatedFile);
}

TEST(EnergyLog, HeaderThenRows) {
    std::ostringstream os;
    EnergyLog log(os);
    StepReport r;
    r.step = 3;
    r.time = 0.1 + 0.2;
    r.energy = make_breakdown(1.0 / 3.0, 2.0, 1e-300, 5.5, -0.25);
    r.step_change = 7e-4;
    log.append(r);
    log.append(r);
    std::istringstream in(os.str());
    const CsvTable t = read_csv(in);
    EXPECT_EQ(t.header.size(), 9u);
    EXPECT_EQ(os.str().substr(0, energy_log_header.size()), energy_log_header);
    ASSERT_EQ(t.rows.size(), 2u);
    const auto& row = t.rows[0];
    EXPECT_EQ(row[t.column("step")], 3.0);
    EXPECT_EQ(row[t.column("time")], 0.1 + 0.2);
    EXPECT_EQ(row[t.column("E_interface")], 1.0 / 3.0);
    EXPECT_EQ(row[t.column("E_nonlocal")], 1e-300);
    EXPECT_EQ(row[t.column("volume_residual")], -0.25);
    EXPECT_EQ(row[t.column("E_total")], row[t.column("E_interface")] + row[t.column("E_doublewell")] +
                                            row[t.column("E_nonlocal")] + row[t.column("E_penalty")]);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
    std::mt19937_64 rng(9);
    for (int n = 0; n < 100000; ++n) {
        const double v = std::bit_cast<double>(rng() & 0x7FEFFFFFFFFFFFFFull) * ((n & 1) ? -1.0 : 1.0);
        const std::string s = format_real(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        ASSERT_EQ(back, v) << s;
    }
}

TEST(Csv, ReaderRejectsMalformedRows) {
    std::istringstream ragged("a,b\n1,2\n3\n");
    EXPECT_THROW(read_csv(ragged), IoError);
    std::istringstream junk("a\nxyz\n");
    EXPECT_THROW(read_csv(junk), IoError);
    std::istringstream empty_cell("a,b\n1,\n");
    const CsvTable t = read_csv(empty_cell);
    EXPECT_TRUE(std::isnan(t.rows[0][1]));
    EXPECT_THROW(t.column("c"), IoError);
}
