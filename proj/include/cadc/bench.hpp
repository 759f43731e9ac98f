#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadc/alloc.hpp"
#include "cadc/core.hpp"

namespace cadc {

/// Cell workload for the latency bench: footprints packed into a central
/// disk the way hippocampal recordings fill the field of view.
struct WorkloadParams {
  int cells = 760;
  FrameDims dims{};
  double fov_radius = 200.0;
  double min_distance = 4.0;
  double radius = 6.0;
  int window = kDefaultWindow;
  std::uint64_t seed = 1;
};

std::vector<Contour> cell_workload(const WorkloadParams& params);

struct BenchParams {
  WorkloadParams workload{};
  int tes = 32;
  /// Candidate K values; the bench picks the one whose baseline is
  /// closest to `target_baseline_us`. A single entry fixes K.
  std::vector<int> slot_options{4, 8, 16};
  double target_baseline_us = 3500.0;
  double clock_mhz = 300.0;
};

struct BenchRow {
  bool region = false, fastforward = false, doublebuffer = false;
  int rounds = 0;
  std::int64_t cycles = 0;
  double wall_us = 0.0;
  std::string label() const;
};

struct BenchResult {
  int slots = 0;
  std::vector<std::pair<int, double>> baselines;  // (K, baseline us)
  std::vector<BenchRow> rows;  // all 8 flag subsets, baseline first

  const BenchRow& baseline() const { return rows.front(); }
  const BenchRow& optimized() const { return rows.back(); }
  double speedup() const {
    return static_cast<double>(baseline().cycles) /
           static_cast<double>(optimized().cycles);
  }
};

/// Cycle accounting over every optimization subset. Region segmentation
/// re-allocates by row band; the other configurations use one unsegmented
/// allocation with the minimum number of rounds.
BenchResult run_latency_bench(const BenchParams& params);

}  // namespace cadc
