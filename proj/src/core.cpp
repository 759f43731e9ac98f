#include "cadc/core.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cadc/error.hpp"

namespace cadc {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_shape: return "InvalidShape";
    case Errc::invalid_geometry: return "InvalidGeometry";
    case Errc::invalid_params: return "InvalidParams";
    case Errc::allocation_infeasible: return "AllocationInfeasible";
    case Errc::conflict_detected: return "ConflictDetected";
    case Errc::trace_overflow: return "TraceOverflow";
    case Errc::not_enough_cells: return "NotEnoughCells";
    case Errc::diverged_training: return "DivergedTraining";
    case Errc::empty_input: return "EmptyInput";
    case Errc::corrupt_file: return "CorruptFile";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

ConflictError::ConflictError(int round_, int te_, int first, int second,
                             std::int64_t index)
    : Error(Errc::conflict_detected,
            "contours " + std::to_string(first) + " and " +
                std::to_string(second) + " both hit in TE " +
                std::to_string(te_) + " round " + std::to_string(round_) +
                " at scan index " + std::to_string(index)),
      round(round_),
      te(te_),
      first_contour(first),
      second_contour(second),
      scan_index(index) {}

std::string_view to_string(ContourKind kind) {
  return kind == ContourKind::cell ? "cell" : "tile";
}

std::optional<ContourKind> parse_contour_kind(std::string_view s) {
  if (s == "cell") return ContourKind::cell;
  if (s == "tile") return ContourKind::tile;
  return std::nullopt;
}

void Frame::check() const {
  if (dims.width <= 0 || dims.height <= 0 ||
      static_cast<std::int64_t>(pixels.size()) != dims.pixels()) {
    throw Error(Errc::invalid_argument,
                "frame " + std::to_string(index) + ": pixel count " +
                    std::to_string(pixels.size()) + " does not match " +
                    std::to_string(dims.width) + "x" +
                    std::to_string(dims.height));
  }
}

int Contour::popcount() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

void Contour::check() const {
  const auto fail = [this](const std::string& why) {
    throw Error(Errc::invalid_argument,
                "contour " + std::to_string(id) + ": " + why);
  };
  if (window <= 0 || window % 2 == 0) fail("window size must be odd");
  if (mask.size() != static_cast<std::size_t>(window) * window)
    fail("mask size does not match window");
  if (std::any_of(mask.begin(), mask.end(),
                  [](std::uint8_t b) { return b > 1; }))
    fail("mask entries must be 0 or 1");
  const int ones = popcount();
  if (ones < 1) fail("mask is empty");
  if (ones * 255 > 65535) fail("mask too large for a 16-bit trace");
}

void Session::check() const {
  if (positions.size() != frames.size())
    throw Error(Errc::invalid_argument,
                "session has " + std::to_string(frames.size()) +
                    " frames but " + std::to_string(positions.size()) +
                    " positions");
  for (int p : positions)
    if (p < 0 || p >= kPositionBins)
      throw Error(Errc::invalid_argument,
                  "position bin " + std::to_string(p) + " out of range");
  for (const auto& f : frames) {
    f.check();
    if (f.dims != dims)
      throw Error(Errc::invalid_argument, "frame dims differ from session");
  }
}

std::vector<PixelEvent> scan_order(const Frame& frame) {
  frame.check();
  std::vector<PixelEvent> events;
  events.reserve(frame.pixels.size());
  for (int r = 0; r < frame.height(); ++r)
    for (int c = 0; c < frame.width(); ++c)
      events.push_back({frame.at(r, c), static_cast<std::uint16_t>(r),
                        static_cast<std::uint16_t>(c)});
  return events;
}

bool windows_overlap(const Contour& a, const Contour& b, int n_c) {
  return windows_overlap(a.center, b.center, n_c);
}

RowSpan window_rows(const Contour& c, FrameDims dims) {
  const int half = c.window / 2;
  RowSpan span{std::max(0, c.center.row - half),
               std::min(dims.height - 1, c.center.row + half)};
  // A window entirely left or right of the frame covers no pixels either.
  if (c.center.col + half < 0 || c.center.col - half >= dims.width)
    return RowSpan{};
  return span;
}

const Contour* find_contour(std::span<const Contour> contours, int id) {
  for (const auto& c : contours)
    if (c.id == id) return &c;
  return nullptr;
}

}  // namespace cadc
