#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "solver.hpp"

namespace nlslab {

// Binary snapshot container, all fields little-endian:
//   char[8]  magic "NLSSNAP1"
//   u32      dim, u32 n, f64 box_length
//   u32      symbol (0 schrodinger, 1 biharmonic, 2 fractional), f64 alpha,
//   u32      power, i32 sign
//   f64      dt, u32 snapshot_stride, u64 seed
//   u64      snapshot count
// then per snapshot: f64 time followed by n^dim pairs (f64 re, f64 im) in
// storage order (last axis fastest).
struct SnapshotHeader {
  int dim = 3;
  int n = 0;
  double box_length = 0.0;
  ModelSpec model;
  double dt = 0.0;
  int snapshot_stride = 1;
  std::uint64_t seed = 0;
};

struct SnapshotFile {
  SnapshotHeader header;
  std::vector<Snapshot> snapshots;
};

void write_snapshots(const std::string& path, const SnapshotHeader& header, const std::vector<Snapshot>& snapshots);
void write_snapshots(const std::string& path, const Trajectory& trajectory, std::uint64_t seed);

// Throws IoError on a missing file, bad magic, or truncated payload.
SnapshotFile read_snapshots(const std::string& path);

}  // namespace nlslab
