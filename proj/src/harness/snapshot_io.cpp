#include "snapshot_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace nlslab {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'S', 'S', 'N', 'A', 'P', '1'};

template <class T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("snapshot container is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_snapshots(const std::string& path, const SnapshotHeader& h, const std::vector<Snapshot>& snapshots) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.n));
  put<double>(out, h.box_length);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.model.symbol));
  put<double>(out, h.model.alpha);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.model.power));
  put<std::int32_t>(out, h.model.sign);
  put<double>(out, h.dt);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.snapshot_stride));
  put<std::uint64_t>(out, h.seed);
  put<std::uint64_t>(out, snapshots.size());
  for (const auto& s : snapshots) {
    put<double>(out, s.time);
    for (const auto& v : s.field.values()) {
      put<double>(out, v.real());
      put<double>(out, v.imag());
    }
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_snapshots(const std::string& path, const Trajectory& t, std::uint64_t seed) {
  SnapshotHeader h;
  h.dim = t.grid().dim();
  h.n = t.grid().points_per_axis();
  h.box_length = t.grid().box_length();
  h.model = t.model;
  h.dt = t.config.dt;
  h.snapshot_stride = t.config.snapshot_stride;
  h.seed = seed;
  write_snapshots(path, h, t.snapshots);
}

SnapshotFile read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot container '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("'" + path + "' is not a snapshot container");
  SnapshotFile f;
  auto& h = f.header;
  h.dim = static_cast<int>(get<std::uint32_t>(in));
  h.n = static_cast<int>(get<std::uint32_t>(in));
  h.box_length = get<double>(in);
  const auto symbol = get<std::uint32_t>(in);
  if (symbol > 2) throw IoError("snapshot container has an unknown symbol");
  h.model.symbol = static_cast<SymbolKind>(symbol);
  h.model.alpha = get<double>(in);
  h.model.power = static_cast<int>(get<std::uint32_t>(in));
  h.model.sign = get<std::int32_t>(in);
  h.dt = get<double>(in);
  h.snapshot_stride = static_cast<int>(get<std::uint32_t>(in));
  h.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  Grid grid;
  try {
    grid = make_grid(h.dim, h.n, h.box_length);
  } catch (const Error& e) {
    throw IoError(std::string("snapshot container has an invalid grid: ") + e.what());
  }
  for (std::uint64_t k = 0; k < count; ++k) {
    Snapshot s;
    s.time = get<double>(in);
    s.field = ComplexField(grid);
    for (auto& v : s.field.values()) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      v = Complex(re, im);
    }
    f.snapshots.push_back(std::move(s));
  }
  return f;
}

}  // namespace nlslab
