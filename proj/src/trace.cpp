#include "cadc/trace.hpp"

#include <string>

#include "cadc/error.hpp"

namespace cadc {

std::uint16_t checked_trace(std::uint64_t value, int contour_id) {
  if (value > 65535)
    throw Error(Errc::trace_overflow,
                "trace of contour " + std::to_string(contour_id) + " is " +
                    std::to_string(value) + ", beyond 16 bits");
  return static_cast<std::uint16_t>(value);
}

TraceVector extract_reference(const Frame& frame,
                              std::span<const Contour> contours) {
  frame.check();
  std::vector<std::uint64_t> acc(contours.size(), 0);
  for (int r = 0; r < frame.height(); ++r) {
    for (int c = 0; c < frame.width(); ++c) {
      const std::uint64_t v = frame.at(r, c);
      for (std::size_t k = 0; k < contours.size(); ++k) {
        const auto& contour = contours[k];
        const auto off = window_indices(r, c, contour.center, contour.window);
        if (off && contour.bit(off->dr, off->dc)) acc[k] += v;
      }
    }
  }
  TraceVector out;
  out.frame = frame.index;
  for (std::size_t k = 0; k < contours.size(); ++k) {
    out.ids.push_back(contours[k].id);
    out.values.push_back(checked_trace(acc[k], contours[k].id));
  }
  return out;
}

StreamingExtractor::StreamingExtractor(std::span<const Contour> contours)
    : contours_(contours), acc_(contours.size(), 0) {}

void StreamingExtractor::push(const PixelEvent& e) {
  for (std::size_t k = 0; k < contours_.size(); ++k) {
    const auto& contour = contours_[k];
    const auto off = window_indices(e.r, e.c, contour.center, contour.window);
    if (off && contour.bit(off->dr, off->dc)) acc_[k] += e.v;
  }
  ++seen_;
}

TraceVector StreamingExtractor::result(std::int64_t frame_index) const {
  TraceVector out;
  out.frame = frame_index;
  for (std::size_t k = 0; k < contours_.size(); ++k) {
    out.ids.push_back(contours_[k].id);
    out.values.push_back(checked_trace(acc_[k], contours_[k].id));
  }
  return out;
}

TraceVector extract_streaming(std::span<const PixelEvent> events,
                              std::span<const Contour> contours,
                              std::int64_t frame_index) {
  StreamingExtractor ex(contours);
  for (const auto& e : events) ex.push(e);
  return ex.result(frame_index);
}

TraceExtractor::TraceExtractor(std::span<const Contour> contours,
                               FrameDims dims)
    : dims_(dims) {
  starts_.push_back(0);
  for (const auto& c : contours) {
    c.check();
    ids_.push_back(c.id);
    const int half = c.window / 2;
    for (int dr = 0; dr < c.window; ++dr) {
      const int r = c.center.row - half + dr;
      if (r < 0 || r >= dims.height) continue;
      for (int dc = 0; dc < c.window; ++dc) {
        const int col = c.center.col - half + dc;
        if (col < 0 || col >= dims.width || !c.bit(dr, dc)) continue;
        offsets_.push_back(static_cast<std::uint32_t>(r) * dims.width + col);
      }
    }
    starts_.push_back(offsets_.size());
  }
}

void TraceExtractor::extract_into(const Frame& frame,
                                  std::span<std::uint16_t> out) const {
  if (frame.dims != dims_)
    throw Error(Errc::invalid_argument, "frame dims differ from extractor");
  const std::uint8_t* px = frame.pixels.data();
  for (std::size_t k = 0; k < ids_.size(); ++k) {
    std::uint32_t sum = 0;
    for (std::size_t i = starts_[k]; i < starts_[k + 1]; ++i)
      sum += px[offsets_[i]];
    out[k] = checked_trace(sum, ids_[k]);
  }
}

TraceVector TraceExtractor::extract(const Frame& frame) const {
  TraceVector out;
  out.frame = frame.index;
  out.ids = ids_;
  out.values.resize(ids_.size());
  extract_into(frame, out.values);
  return out;
}

}  // namespace cadc
