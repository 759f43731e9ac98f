#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cadc {

/// Traces of many frames: row f holds the values of every contour in
/// `ids` order.
struct TraceTable {
  std::vector<int> ids;
  std::vector<std::uint16_t> values;

  std::int64_t frames() const {
    return ids.empty() ? 0
                       : static_cast<std::int64_t>(values.size() / ids.size());
  }
  std::size_t width() const { return ids.size(); }
  std::uint16_t at(std::int64_t frame, std::size_t col) const {
    return values[static_cast<std::size_t>(frame) * ids.size() + col];
  }
  std::span<const std::uint16_t> row(std::int64_t frame) const {
    return {values.data() + static_cast<std::size_t>(frame) * ids.size(),
            ids.size()};
  }
  /// Column of a contour id; throws InvalidArgument when absent.
  std::size_t column(int id) const;
};

struct FrameRange {
  std::int64_t first = 0;
  std::int64_t last = 0;  // exclusive
};

/// Largest grid side n with n*n <= cells.
int grid_side_for(std::size_t cells);

/// The n_p^2 contours with the highest peak trace in `rows`, sorted by peak
/// descending and then id ascending. Throws NotEnoughCells.
std::vector<int> select_cells(const TraceTable& table, FrameRange rows,
                              int n_p);

/// Central `inner` x `inner` block of a row-major tile grid of `grid_cols`
/// columns, as tile ids in row-major order.
std::vector<int> central_tiles(std::span<const int> tile_ids, int grid_rows,
                               int grid_cols, int inner = 30);

/// Per-contour min and max over the training rows.
struct NormalizationBounds {
  std::vector<float> lo;
  std::vector<float> hi;
};

NormalizationBounds normalization_bounds(const TraceTable& table,
                                         FrameRange rows,
                                         std::span<const std::size_t> columns);

/// Square grid of values in [0, 1], row-major, fed to CNN/ANN/SNN.
struct DecoderInput {
  int side = 0;
  std::vector<float> grid;
  std::vector<int> ids;
};

/// clamp((trace - lo) / (hi - lo), 0, 1); 0 when hi == lo.
float normalize_trace(float trace, float lo, float hi);

DecoderInput build_input(std::span<const std::uint16_t> trace_row,
                         std::span<const std::size_t> columns,
                         const NormalizationBounds& bounds, int side,
                         std::span<const int> ids = {});

}  // namespace cadc
