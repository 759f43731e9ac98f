#include "cadc/dataset.hpp"

#include "cadc/alloc.hpp"
#include "cadc/error.hpp"
#include "cadc/trace.hpp"

namespace cadc {

FrameRange first_half(std::int64_t n_frames) { return {0, n_frames / 2}; }

DecodingData collect_traces(const FrameSource& frames, std::int64_t n_frames,
                            std::span<const int> positions,
                            std::span<const Contour> cells, FrameDims dims) {
  if (static_cast<std::int64_t>(positions.size()) != n_frames)
    throw Error(Errc::invalid_argument, "one position per frame is required");
  const auto tiles = generate_tile_contours(dims.width, dims.height);
  const TraceExtractor cell_x(cells, dims);
  const TraceExtractor tile_x(tiles, dims);

  DecodingData d;
  d.tile_rows = dims.height / 16;
  d.tile_cols = dims.width / 16;
  d.cells.ids = cell_x.ids();
  d.tiles.ids = tile_x.ids();
  d.cells.values.resize(static_cast<std::size_t>(n_frames) * cell_x.size());
  d.tiles.values.resize(static_cast<std::size_t>(n_frames) * tile_x.size());
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const Frame f = frames(t);
    const auto i = static_cast<std::size_t>(t);
    cell_x.extract_into(f, std::span(d.cells.values).subspan(
                               i * cell_x.size(), cell_x.size()));
    tile_x.extract_into(f, std::span(d.tiles.values).subspan(
                               i * tile_x.size(), tile_x.size()));
  }
  d.positions.assign(positions.begin(), positions.end());
  d.train = first_half(n_frames);
  d.test = {d.train.last, n_frames};
  return d;
}

namespace {

Dataset build_rows(const TraceTable& table, FrameRange rows,
                   std::span<const std::size_t> columns,
                   const NormalizationBounds& bounds, int side,
                   std::span<const int> positions) {
  Dataset d;
  d.side = side;
  d.inputs.resize(rows.last - rows.first,
                  static_cast<Eigen::Index>(columns.size()));
  for (std::int64_t f = rows.first; f < rows.last; ++f) {
    const auto in = build_input(table.row(f), columns, bounds, side);
    for (std::size_t k = 0; k < in.grid.size(); ++k)
      d.inputs(f - rows.first, static_cast<Eigen::Index>(k)) = in.grid[k];
    d.labels.push_back(positions[static_cast<std::size_t>(f)]);
  }
  return d;
}

}  // namespace

PreparedInputs prepare_inputs(const DecodingData& data, InputKind kind,
                              int n_p) {
  PreparedInputs out;
  const TraceTable& table = kind == InputKind::cell ? data.cells : data.tiles;
  int side = 0;
  if (kind == InputKind::cell) {
    side = n_p > 0 ? n_p : grid_side_for(table.width());
    out.ids = select_cells(table, data.train, side);
  } else {
    side = 30;
    out.ids = central_tiles(table.ids, data.tile_rows, data.tile_cols, side);
  }
  std::vector<std::size_t> columns;
  columns.reserve(out.ids.size());
  for (int id : out.ids) columns.push_back(table.column(id));
  const auto bounds = normalization_bounds(table, data.train, columns);
  out.train = build_rows(table, data.train, columns, bounds, side, data.positions);
  out.test = build_rows(table, data.test, columns, bounds, side, data.positions);
  return out;
}

}  // namespace cadc
