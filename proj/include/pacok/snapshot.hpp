#pragma once

// Binary field snapshots. Layout, all little-endian:
//
//   offset  size  content
//   0       8     magic "PACOKF1\0"
//   8       4     u32 Nx
//   12      4     u32 Ny
//   16      8     f64 X
//   24      8     f64 Y
//   32      8*N   f64 values, j (y index) outer, i inner

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pacok/errors.hpp"
#include "pacok/grid.hpp"

namespace pacok {

inline constexpr std::array<char, 8> snapshot_magic{'P', 'A', 'C', 'O', 'K', 'F', '1', '\0'};
inline constexpr std::size_t snapshot_header_size = 32;

namespace detail {

inline unsigned char* put_le(unsigned char* p, std::uint64_t bits, int bytes) {
    for (int b = 0; b < bytes; ++b) *p++ = static_cast<unsigned char>(bits >> (8 * b));
    return p;
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const Field& phi) {
    const GridSpec& g = phi.grid();
    std::vector<unsigned char> out(snapshot_header_size + 8 * g.size());
    unsigned char* p = std::copy(snapshot_magic.begin(), snapshot_magic.end(), out.data());
    p = detail::put_le(p, static_cast<std::uint32_t>(g.Nx), 4);
    p = detail::put_le(p, static_cast<std::uint32_t>(g.Ny), 4);
    p = detail::put_le(p, std::bit_cast<std::uint64_t>(g.X), 8);
    p = detail::put_le(p, std::bit_cast<std::uint64_t>(g.Y), 8);
    for (double v : phi.values()) p = detail::put_le(p, std::bit_cast<std::uint64_t>(v), 8);
    return out;
}

inline Field decode_snapshot(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < snapshot_magic.size()) throw TruncatedFile("snapshot shorter than its magic");
    if (std::memcmp(bytes.data(), snapshot_magic.data(), snapshot_magic.size()) != 0)
        throw BadMagic("not a field snapshot");
    if (bytes.size() < snapshot_header_size) throw TruncatedFile("snapshot header is incomplete");
    const auto* p = bytes.data();
    GridSpec g;
    g.Nx = static_cast<int>(detail::get_le(p + 8, 4));
    g.Ny = static_cast<int>(detail::get_le(p + 12, 4));
    g.X = std::bit_cast<double>(detail::get_le(p + 16, 8));
    g.Y = std::bit_cast<double>(detail::get_le(p + 24, 8));
    g.validate();
    if (bytes.size() < snapshot_header_size + 8 * g.size())
        throw TruncatedFile("snapshot holds fewer values than its header announces");
    std::vector<double> values(g.size());
    for (std::size_t n = 0; n < values.size(); ++n)
        values[n] = std::bit_cast<double>(detail::get_le(p + snapshot_header_size + 8 * n, 8));
    return Field(g, std::move(values));
}

inline void write_snapshot(const Field& phi, const std::filesystem::path& path) {
    const auto bytes = encode_snapshot(phi);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline Field read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

/// Reads a snapshot and checks it lives on `expected`.
inline Field read_snapshot(const std::filesystem::path& path, const GridSpec& expected) {
    Field f = read_snapshot(path);
    if (!(f.grid() == expected)) throw GridMismatch(path.string() + " was written on a different grid");
    return f;
}

}  // namespace pacok
