// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "rtune/forecaster.hpp"

namespace rtune {
namespace {

constexpr std::array<char, 8> kMagic = {'R', 'T', 'U', 'N', 'E', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("checkpoint truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void save_checkpoint(const Forecaster& m, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.input_width()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.horizon()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.hidden_width()));
  put_le<std::uint64_t>(out, m.theta().size());
  for (double v : m.theta()) {
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

void save_checkpoint(const Forecaster& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  save_checkpoint(m, out);
}

Forecaster load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not an rtune checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  const auto w = get_le<std::uint32_t>(in);
  const auto h = get_le<std::uint32_t>(in);
  const auto hidden = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (w == 0 || h == 0 || hidden == 0 ||
      count != Forecaster::parameter_count(w, h, hidden)) {
    throw FormatError("checkpoint header is inconsistent");
  }
  Vector theta(count);
  for (auto& v : theta) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return Forecaster(w, h, hidden, std::move(theta));
}

Forecaster load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace rtune
