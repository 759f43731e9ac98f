#include "cadc/decoder_input.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "cadc/error.hpp"

namespace cadc {

std::size_t TraceTable::column(int id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end())
    throw Error(Errc::invalid_argument,
                "contour " + std::to_string(id) + " not in trace table");
  return static_cast<std::size_t>(it - ids.begin());
}

int grid_side_for(std::size_t cells) {
  int n = static_cast<int>(std::sqrt(static_cast<double>(cells)));
  while (static_cast<std::size_t>(n + 1) * (n + 1) <= cells) ++n;
  while (n > 0 && static_cast<std::size_t>(n) * n > cells) --n;
  return n;
}

std::vector<int> select_cells(const TraceTable& table, FrameRange rows,
                              int n_p) {
  const std::size_t need = static_cast<std::size_t>(n_p) * n_p;
  if (n_p < 1 || table.width() < need)
    throw Error(Errc::not_enough_cells,
                "need " + std::to_string(need) + " cells for a " +
                    std::to_string(n_p) + "x" + std::to_string(n_p) +
                    " grid, have " + std::to_string(table.width()));
  std::vector<std::uint16_t> peak(table.width(), 0);
  for (std::int64_t f = rows.first; f < rows.last; ++f) {
    const auto row = table.row(f);
    for (std::size_t k = 0; k < row.size(); ++k)
      peak[k] = std::max(peak[k], row[k]);
  }
  std::vector<std::size_t> order(table.width());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (peak[a] != peak[b]) return peak[a] > peak[b];
    return table.ids[a] < table.ids[b];
  });
  std::vector<int> out;
  out.reserve(need);
  for (std::size_t i = 0; i < need; ++i) out.push_back(table.ids[order[i]]);
  return out;
}

std::vector<int> central_tiles(std::span<const int> tile_ids, int grid_rows,
                               int grid_cols, int inner) {
  if (static_cast<std::size_t>(grid_rows) * grid_cols != tile_ids.size() ||
      inner > grid_rows || inner > grid_cols || inner < 1)
    throw Error(Errc::invalid_geometry, "tile grid does not fit the selection");
  const int r0 = (grid_rows - inner) / 2;
  const int c0 = (grid_cols - inner) / 2;
  std::vector<int> out;
  for (int r = r0; r < r0 + inner; ++r)
    for (int c = c0; c < c0 + inner; ++c)
      out.push_back(tile_ids[static_cast<std::size_t>(r) * grid_cols + c]);
  return out;
}

NormalizationBounds normalization_bounds(const TraceTable& table,
                                         FrameRange rows,
                                         std::span<const std::size_t> columns) {
  NormalizationBounds b;
  b.lo.assign(columns.size(), 65535.f);
  b.hi.assign(columns.size(), 0.f);
  if (rows.last <= rows.first) {
    std::fill(b.lo.begin(), b.lo.end(), 0.f);
    return b;
  }
  for (std::int64_t f = rows.first; f < rows.last; ++f) {
    const auto row = table.row(f);
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const float v = row[columns[k]];
      b.lo[k] = std::min(b.lo[k], v);
      b.hi[k] = std::max(b.hi[k], v);
    }
  }
  return b;
}

float normalize_trace(float trace, float lo, float hi) {
  if (!(hi > lo)) return 0.f;
  return std::clamp((trace - lo) / (hi - lo), 0.f, 1.f);
}

DecoderInput build_input(std::span<const std::uint16_t> trace_row,
                         std::span<const std::size_t> columns,
                         const NormalizationBounds& bounds, int side,
                         std::span<const int> ids) {
  if (static_cast<std::size_t>(side) * side != columns.size())
    throw Error(Errc::invalid_argument, "column count does not fill the grid");
  DecoderInput in;
  in.side = side;
  in.ids.assign(ids.begin(), ids.end());
  in.grid.resize(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k)
    in.grid[k] =
        normalize_trace(trace_row[columns[k]], bounds.lo[k], bounds.hi[k]);
  return in;
}

}  // namespace cadc
