#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cadc/core.hpp"
#include "cadc/decoder_input.hpp"
#include "cadc/nn.hpp"

namespace cadc {

/// Cell and tile traces of a whole session plus the chronological split.
struct DecodingData {
  TraceTable cells;
  TraceTable tiles;
  int tile_rows = 0;
  int tile_cols = 0;
  std::vector<int> positions;
  FrameRange train;
  FrameRange test;
};

using FrameSource = std::function<Frame(std::int64_t)>;

/// Extracts every frame once. The first half of the frames trains, the
/// rest tests.
DecodingData collect_traces(const FrameSource& frames, std::int64_t n_frames,
                            std::span<const int> positions,
                            std::span<const Contour> cells, FrameDims dims);

/// Chronological split point used by collect_traces.
FrameRange first_half(std::int64_t n_frames);

struct PreparedInputs {
  Dataset train;
  Dataset test;
  std::vector<int> ids;  // source contours in grid order
};

/// Normalized decoder inputs. Cell grids take the n_p^2 strongest cells
/// (n_p = 0 picks the largest square that fits); tile grids take the
/// central 30x30 tiles.
PreparedInputs prepare_inputs(const DecodingData& data, InputKind kind,
                              int n_p = 0);

}  // namespace cadc
