#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cadc/alloc.hpp"
#include "cadc/core.hpp"

namespace cadc {

struct SimConfig {
  AcceleratorShape shape;
  double clock_mhz = 300.0;
  bool opt_region = false;
  bool opt_fastforward = false;
  bool opt_doublebuffer = false;
  // 625 mask bits in ten 64-bit shift words plus one center word.
  int load_cycles_per_contour = 11;
  int store_cycles_per_contour = 1;

  void check() const;
};

/// Parses "region,ff,db" (any subset, any order; "none" or "" for none).
/// Throws InvalidArgument on an unknown name.
void set_optimizations(SimConfig& config, std::string_view list);

struct RoundCycles {
  std::int64_t load = 0;
  std::int64_t compute = 0;
  std::int64_t store = 0;
  std::int64_t skipped = 0;
  friend bool operator==(const RoundCycles&, const RoundCycles&) = default;
};

struct SimReport {
  std::vector<RoundCycles> rounds;
  std::int64_t skipped = 0;
  std::int64_t total_cycles = 0;
  double wall_us = 0.0;
  std::int64_t conflicts = 0;
  friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Combines per-round phases. Sequential: sum of load+compute+store.
/// Double-buffered: the first load and last store are exposed; every other
/// load/store runs in the idle half-chain while a round computes, so
/// round r costs max(compute_r, store_{r-1} + load_{r+1}).
std::int64_t combine_phases(std::span<const RoundCycles> rounds,
                            bool double_buffer);

/// Cycles to microseconds at `clock_mhz`, rounded to 0.1 us.
double wall_time_us(std::int64_t cycles, double clock_mhz);

/// Cycle accounting without pixel data.
SimReport account_cycles(FrameDims dims, const Allocation& alloc,
                         const SimConfig& config);

/// One stage of the chain: K contour slots behind a single read port.
class TracingElement {
 public:
  explicit TracingElement(int slots) : slots_(static_cast<std::size_t>(slots)) {}

  void clear();
  void load(int slot, const Contour& contour);
  /// Accumulates the pixel into the slot whose window contains it. Throws
  /// ConflictError when a second slot needs the read port in the same
  /// cycle.
  void compute(const PixelEvent& e, std::int64_t scan_index, int round,
               int te_index);
  std::uint64_t accumulator(int slot) const { return slots_[slot].acc; }
  int contour_id(int slot) const { return slots_[slot].contour_id; }
  bool used(int slot) const { return slots_[slot].used; }
  int slot_count() const { return static_cast<int>(slots_.size()); }

 private:
  struct Slot {
    bool used = false;
    int contour_id = -1;
    Center center;
    int window = 0;
    std::vector<std::uint8_t> mask;
    std::uint64_t acc = 0;
  };
  std::vector<Slot> slots_;
};

struct SimResult {
  TraceVector traces;
  SimReport report;
};

/// Cycle-level run of one frame through the chain: load, pixel-by-pixel
/// compute with a one-TE-per-cycle shift, store. Traces come out in the
/// allocation's entry order.
SimResult simulate_frame(const Frame& frame, std::span<const Contour> contours,
                         const Allocation& alloc, const SimConfig& config);

}  // namespace cadc
