#pragma once

// BFLD checkpoint files:
//   "BFLD" | version u8 = 1 | dim u8 | n u32 LE | L f64 LE |
//   for each component (x, y[, z]): n^dim complex coefficients as (re, im)
//   f64 LE pairs in row-major lattice order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "bf/spectral.hpp"

namespace bf::checkpoint {

inline constexpr std::uint8_t kVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(bytes, 8);
}
inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw ContractViolation("BFLD: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

inline void write(std::ostream& os, const spectral::SpectralField& u) {
  const Grid& g = *u.grid;
  if (u.components() != g.dim()) throw ContractViolation("BFLD: expects a velocity field");
  os.write("BFLD", 4);
  os.put(static_cast<char>(kVersion));
  os.put(static_cast<char>(g.dim()));
  const auto n = static_cast<std::uint32_t>(g.n());
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((n >> (8 * i)) & 0xffu));
  detail::put_f64(os, g.length());
  for (const auto& comp : u.comps)
    for (const auto& c : comp) {
      detail::put_f64(os, c.real());
      detail::put_f64(os, c.imag());
    }
}

inline spectral::SpectralField read(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "BFLD", 4) != 0)
    throw ContractViolation("BFLD: bad magic");
  const int version = is.get();
  if (version != kVersion) throw ContractViolation("BFLD: unsupported version");
  const int dim = is.get();
  unsigned char nb[4];
  if (!is.read(reinterpret_cast<char*>(nb), 4)) throw ContractViolation("BFLD: truncated header");
  const std::uint32_t n = nb[0] | (nb[1] << 8) | (nb[2] << 16) | (static_cast<std::uint32_t>(nb[3]) << 24);
  const double length = detail::get_f64(is);
  auto grid = make_grid(dim, static_cast<int>(n), length);
  spectral::SpectralField u(grid, dim);
  for (auto& comp : u.comps)
    for (auto& c : comp) {
      const double re = detail::get_f64(is);
      const double im = detail::get_f64(is);
      c = cplx(re, im);
    }
  u.mean_zero = spectral::has_zero_mean(u);
  return u;
}

inline void save(const std::string& path, const spectral::SpectralField& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractViolation("BFLD: cannot open " + path + " for writing");
  write(os, u);
}

inline spectral::SpectralField load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContractViolation("BFLD: cannot open " + path);
  return read(is);
}

}  // namespace bf::checkpoint
