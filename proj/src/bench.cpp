#include "cadc/bench.hpp"

#include <cmath>
#include <random>

#include "cadc/error.hpp"
#include "cadc/synth.hpp"
#include "cadc/systolic.hpp"

namespace cadc {

std::vector<Contour> cell_workload(const WorkloadParams& p) {
  std::mt19937_64 rng(p.seed);
  const auto centers =
      place_cells(p.cells, p.dims, p.fov_radius, p.min_distance, rng);
  std::vector<Contour> out;
  out.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i)
    out.push_back(
        footprint_contour(static_cast<int>(i), centers[i], p.radius, p.window));
  return out;
}

std::string BenchRow::label() const {
  std::string s;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(region, "region");
  add(fastforward, "ff");
  add(doublebuffer, "db");
  return s.empty() ? "none" : s;
}

namespace {

AcceleratorShape minimal_shape(std::size_t contours, int tes, int slots) {
  AcceleratorShape s{tes, slots, 1};
  s.rounds = static_cast<int>(
      (static_cast<std::int64_t>(contours) + s.per_round() - 1) / s.per_round());
  s.rounds = std::max(s.rounds, 1);
  return s;
}

}  // namespace

BenchResult run_latency_bench(const BenchParams& params) {
  if (params.slot_options.empty())
    throw Error(Errc::invalid_argument, "no K candidates");
  const auto contours = cell_workload(params.workload);
  const FrameDims dims = params.workload.dims;
  const std::uint64_t seed = params.workload.seed;

  BenchResult result;
  Allocation plain;
  double best = 0.0;
  for (int k : params.slot_options) {
    Allocation a =
        allocate_cells(contours, minimal_shape(contours.size(), params.tes, k), seed);
    attach_scan_plans(a, contours, dims);
    SimConfig cfg;
    cfg.shape = a.shape;
    cfg.clock_mhz = params.clock_mhz;
    const double us = account_cycles(dims, a, cfg).wall_us;
    result.baselines.emplace_back(k, us);
    const double gap = std::abs(us - params.target_baseline_us);
    if (result.slots == 0 || gap < best) {
      best = gap;
      result.slots = k;
      plain = std::move(a);
    }
  }
  const Allocation banded =
      allocate_segmented(contours, plain.shape, dims, seed);

  for (int mask = 0; mask < 8; ++mask) {
    SimConfig cfg;
    cfg.clock_mhz = params.clock_mhz;
    cfg.opt_region = mask & 1;
    cfg.opt_fastforward = mask & 2;
    cfg.opt_doublebuffer = mask & 4;
    const Allocation& a = cfg.opt_region ? banded : plain;
    cfg.shape = a.shape;
    const SimReport r = account_cycles(dims, a, cfg);
    result.rows.push_back({cfg.opt_region, cfg.opt_fastforward,
                           cfg.opt_doublebuffer, a.shape.rounds,
                           r.total_cycles, r.wall_us});
  }
  return result;
}

}  // namespace cadc
