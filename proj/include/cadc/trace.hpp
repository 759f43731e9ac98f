#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cadc/core.hpp"

namespace cadc {

/// Masked sum over every pixel of the frame, straight from the window
/// index mapping. Accumulates in 64 bits; throws TraceOverflow when a value
/// leaves the 16-bit range.
TraceVector extract_reference(const Frame& frame,
                              std::span<const Contour> contours);

/// Event-at-a-time accumulation, the functional behaviour the tracing
/// chain must reproduce.
class StreamingExtractor {
 public:
  explicit StreamingExtractor(std::span<const Contour> contours);

  void push(const PixelEvent& e);
  std::int64_t events_seen() const { return seen_; }
  /// Current (possibly partial) sums. Throws TraceOverflow.
  TraceVector result(std::int64_t frame_index = 0) const;

 private:
  std::span<const Contour> contours_;
  std::vector<std::uint64_t> acc_;
  std::int64_t seen_ = 0;
};

TraceVector extract_streaming(std::span<const PixelEvent> events,
                              std::span<const Contour> contours,
                              std::int64_t frame_index = 0);

/// Precompiled pixel lists for bulk extraction over many frames of the same
/// geometry. Results equal extract_reference.
class TraceExtractor {
 public:
  TraceExtractor(std::span<const Contour> contours, FrameDims dims);

  std::size_t size() const { return ids_.size(); }
  const std::vector<int>& ids() const { return ids_; }
  TraceVector extract(const Frame& frame) const;
  void extract_into(const Frame& frame, std::span<std::uint16_t> out) const;

 private:
  FrameDims dims_;
  std::vector<int> ids_;
  std::vector<std::uint32_t> offsets_;  // pixel indices, all contours
  std::vector<std::size_t> starts_;     // size() + 1 entries
};

/// Throws TraceOverflow for a value above 65535.
std::uint16_t checked_trace(std::uint64_t value, int contour_id);

}  // namespace cadc
