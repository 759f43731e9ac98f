#pragma once

#include <cstdint>

#include "cadc/nn.hpp"
#include "cadc/snn.hpp"

namespace cadc {

/// Per-layer symmetric fixed point: scale = max|w|, code =
/// round(w / scale * (2^(bits-1) - 1)). Weights are replaced by their
/// dequantized values; biases stay in float. A zero layer is left as is.
/// Throws InvalidArgument unless 2 <= bits <= 16.
Layer quantize(const Layer& layer, int bits);
CnnModel quantize(const CnnModel& model, int bits);
AnnModel quantize(const AnnModel& model, int bits);
SnnModel quantize(const SnnModel& model, int bits);

/// Largest code magnitude for `bits`.
inline int max_code(int bits) { return (1 << (bits - 1)) - 1; }

inline float dequantize(std::int32_t code, double scale, int bits) {
  return static_cast<float>(code * scale / max_code(bits));
}

}  // namespace cadc
