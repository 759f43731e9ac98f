#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cadc {

inline constexpr int kDefaultWindow = 25;
inline constexpr int kPositionBins = 24;

struct FrameDims {
  int width = 512;
  int height = 512;

  std::int64_t pixels() const {
    return static_cast<std::int64_t>(width) * height;
  }
  friend bool operator==(const FrameDims&, const FrameDims&) = default;
};

/// One 8-bit intensity image, row-major.
struct Frame {
  FrameDims dims;
  std::vector<std::uint8_t> pixels;
  std::int64_t index = 0;

  Frame() = default;
  explicit Frame(FrameDims d, std::int64_t idx = 0)
      : dims(d), pixels(static_cast<std::size_t>(d.pixels()), 0), index(idx) {}

  int width() const { return dims.width; }
  int height() const { return dims.height; }
  std::uint8_t at(int r, int c) const {
    return pixels[static_cast<std::size_t>(r) * dims.width + c];
  }
  std::uint8_t& at(int r, int c) {
    return pixels[static_cast<std::size_t>(r) * dims.width + c];
  }

  /// Throws InvalidArgument when the pixel count does not match the dims.
  void check() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// A scanned pixel as it enters the tracing chain: 8-bit value plus its
/// 9-bit (for 512-row frames) row and column.
struct PixelEvent {
  std::uint8_t v = 0;
  std::uint16_t r = 0;
  std::uint16_t c = 0;

  friend bool operator==(const PixelEvent&, const PixelEvent&) = default;
};

struct Center {
  int row = 0;
  int col = 0;
  friend bool operator==(const Center&, const Center&) = default;
};

struct WindowOffset {
  int dr = 0;
  int dc = 0;
  friend bool operator==(const WindowOffset&, const WindowOffset&) = default;
};

enum class ContourKind : std::uint8_t { cell, tile };

std::string_view to_string(ContourKind kind);
std::optional<ContourKind> parse_contour_kind(std::string_view s);

/// Binary N_C x N_C mask anchored at a center pixel.
struct Contour {
  int id = 0;
  Center center;
  int window = kDefaultWindow;
  std::vector<std::uint8_t> mask;  // window*window entries, 0 or 1, row-major
  ContourKind kind = ContourKind::cell;

  Contour() = default;
  Contour(int id_, Center c, int n_c, ContourKind k = ContourKind::cell)
      : id(id_),
        center(c),
        window(n_c),
        mask(static_cast<std::size_t>(n_c) * n_c, 0),
        kind(k) {}

  bool bit(int dr, int dc) const {
    return mask[static_cast<std::size_t>(dr) * window + dc] != 0;
  }
  void set(int dr, int dc, bool on = true) {
    mask[static_cast<std::size_t>(dr) * window + dc] = on ? 1 : 0;
  }
  int popcount() const;

  /// Enforces odd window, binary entries, at least one set bit and the
  /// 16-bit trace bound. Throws InvalidArgument.
  void check() const;

  friend bool operator==(const Contour&, const Contour&) = default;
};

struct SessionMeta {
  double frame_rate = 30.0;
  std::uint64_t seed = 0;
  int window = kDefaultWindow;
  friend bool operator==(const SessionMeta&, const SessionMeta&) = default;
};

/// Frames with their per-frame position bin and the ground-truth contours.
struct Session {
  FrameDims dims;
  std::vector<Frame> frames;
  std::vector<int> positions;
  std::vector<Contour> contours;
  SessionMeta meta;

  void check() const;
  friend bool operator==(const Session&, const Session&) = default;
};

/// Per-contour 16-bit traces of one frame, in allocation/contour order.
struct TraceVector {
  std::int64_t frame = 0;
  std::vector<int> ids;
  std::vector<std::uint16_t> values;

  friend bool operator==(const TraceVector&, const TraceVector&) = default;
};

/// Row-major pixel stream of a frame; event i has scan index r*width + c.
std::vector<PixelEvent> scan_order(const Frame& frame);

inline std::int64_t scan_index(const PixelEvent& e, int width) {
  return static_cast<std::int64_t>(e.r) * width + e.c;
}

/// Maps a scanned pixel into a contour window:
///   dr = r - R + n_c/2, dc = c - C + n_c/2
/// Returns nothing when the pixel lies outside the window.
inline std::optional<WindowOffset> window_indices(int r, int c, Center center,
                                                  int n_c) {
  const int half = n_c / 2;
  const int dr = r - center.row + half;
  const int dc = c - center.col + half;
  if (dr < 0 || dr >= n_c || dc < 0 || dc >= n_c) return std::nullopt;
  return WindowOffset{dr, dc};
}

/// True when the full n_c x n_c windows around the two centers intersect.
inline bool windows_overlap(Center a, Center b, int n_c) {
  const int drow = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int dcol = a.col > b.col ? a.col - b.col : b.col - a.col;
  return drow < n_c && dcol < n_c;
}

bool windows_overlap(const Contour& a, const Contour& b, int n_c);
inline bool windows_overlap(const Contour& a, const Contour& b) {
  return windows_overlap(a, b, a.window);
}

/// Inclusive row range of a contour window clipped to the frame, or nothing
/// when the window misses the frame entirely.
struct RowSpan {
  int first = 0;
  int last = -1;
  bool empty() const { return last < first; }
};
RowSpan window_rows(const Contour& c, FrameDims dims);

const Contour* find_contour(std::span<const Contour> contours, int id);

}  // namespace cadc
