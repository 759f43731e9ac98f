#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cadc/core.hpp"

namespace cadc {

/// J tracing elements, K contour slots per TE, reused for `rounds`
/// iterations per frame.
struct AcceleratorShape {
  int tes = 32;
  int slots = 8;
  int rounds = 1;

  std::int64_t per_round() const {
    return static_cast<std::int64_t>(tes) * slots;
  }
  std::int64_t capacity() const { return per_round() * rounds; }
  /// Throws InvalidShape unless all fields are >= 1.
  void check() const;
  friend bool operator==(const AcceleratorShape&,
                         const AcceleratorShape&) = default;
};

struct SlotRef {
  int round = 0;
  int te = 0;
  int slot = 0;
  friend auto operator<=>(const SlotRef&, const SlotRef&) = default;
};

struct Assignment {
  int contour_id = 0;
  SlotRef where;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Half-open scan-index range [from, to) of background pixels.
struct SkipRange {
  std::int64_t from = 0;
  std::int64_t to = 0;
  std::int64_t length() const { return to - from; }
  friend bool operator==(const SkipRange&, const SkipRange&) = default;
};

struct FastForwardTable {
  std::vector<SkipRange> ranges;

  /// Pixels of [lo, hi) covered by some range.
  std::int64_t skipped_within(std::int64_t lo, std::int64_t hi) const;
  std::int64_t total() const;
  friend bool operator==(const FastForwardTable&,
                         const FastForwardTable&) = default;
};

/// Per-round scan plan: inclusive row bounds and background runs.
struct RoundPlan {
  RowSpan bounds;
  FastForwardTable skips;
  friend bool operator==(const RoundPlan& a, const RoundPlan& b) {
    return a.bounds.first == b.bounds.first && a.bounds.last == b.bounds.last &&
           a.skips == b.skips;
  }
};

/// Contour -> (round, TE, slot). `entries` fixes the trace order.
struct Allocation {
  AcceleratorShape shape;
  std::vector<Assignment> entries;
  std::vector<RoundPlan> rounds;  // one per round once plans are attached
  int swaps = 0;                   // accepted repair swaps (diagnostic)

  int round_count() const { return shape.rounds; }
  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.shape == b.shape && a.entries == b.entries && a.rounds == b.rounds;
  }
};

inline constexpr int kDefaultMaxAttempts = 10000;
inline constexpr int kDefaultMinSkip = 8;

/// Randomized swap repair: round-robin default placement, then every
/// conflicting contour is swapped with random slots of other TEs until a
/// swap leaves both TEs overlap-free. Throws AllocationInfeasible when a
/// conflict survives `max_attempts` trials, InvalidShape when the shape
/// cannot hold all contours.
Allocation allocate_cells(std::span<const Contour> contours,
                          const AcceleratorShape& shape, std::uint64_t seed,
                          int max_attempts = kDefaultMaxAttempts);

/// One tile contour per n_t x n_t tile; the ones block covers exactly the
/// tile's own pixels. Ids run row-major over the tile grid.
std::vector<Contour> generate_tile_contours(int width, int height,
                                            int tile = 16,
                                            int window = kDefaultWindow);

/// Tile (tr, tc) goes to TE (tc + 2*tr) mod J, slots in row-major order.
/// Single round. Throws ConflictDetected if validation fails.
Allocation map_tiles(std::span<const Contour> tiles, int tes,
                     FrameDims dims);

struct RegionSegmentation {
  std::vector<std::vector<int>> groups;  // contour indices per round
  std::vector<RowSpan> bounds;           // window hull per round
};

/// Splits contours into row bands of balanced size. Empty rounds are
/// dropped; throws AllocationInfeasible when a band cannot fit J*K.
RegionSegmentation segment_regions(std::span<const Contour> contours,
                                   const AcceleratorShape& shape,
                                   FrameDims dims);

/// Maximal background runs (no contour window pixel) inside `rows`;
/// runs shorter than `min_skip` are dropped.
FastForwardTable build_fast_forward_table(std::span<const Contour> contours,
                                          FrameDims dims, RowSpan rows,
                                          int min_skip = kDefaultMinSkip);
FastForwardTable build_fast_forward_table(std::span<const Contour> contours,
                                          FrameDims dims,
                                          int min_skip = kDefaultMinSkip);

/// Fills `alloc.rounds` with each round's window hull and fast-forward
/// table.
void attach_scan_plans(Allocation& alloc, std::span<const Contour> contours,
                       FrameDims dims, int min_skip = kDefaultMinSkip);

/// Region segmentation followed by per-band cell allocation. The result
/// has as many rounds as non-empty bands.
Allocation allocate_segmented(std::span<const Contour> contours,
                              const AcceleratorShape& shape, FrameDims dims,
                              std::uint64_t seed,
                              int max_attempts = kDefaultMaxAttempts,
                              int min_skip = kDefaultMinSkip);

struct OverlapPair {
  SlotRef te;  // slot field unused
  int first_id = 0;
  int second_id = 0;
};

struct CapacityViolation {
  int contour_id = 0;
  std::string reason;
};

struct ValidationReport {
  std::vector<OverlapPair> overlaps;
  std::vector<CapacityViolation> capacity;
  bool ok() const { return overlaps.empty() && capacity.empty(); }
};

ValidationReport validate_allocation(const Allocation& alloc,
                                     std::span<const Contour> contours,
                                     const AcceleratorShape& shape);

}  // namespace cadc
