#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cadc {

inline constexpr int kOrdinalBits = 12;

/// Decoded bin plus the raw output vector it came from.
struct PositionPrediction {
  int bin = 0;
  std::vector<float> scores;
};

/// Index of the largest element; ties go to the lowest index.
template <typename T>
int argmax_lowest(std::span<const T> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

/// Leading-run code over 24 bins. Bins 0..11 are 1^(b+1) 0^(11-b); bins
/// 12..23 are 0^(b-11) 1^(23-b). Element 0 is the leftmost bit.
using OrdinalCode = std::array<std::uint8_t, kOrdinalBits>;

OrdinalCode encode_ordinal(int bin);
std::string to_string(const OrdinalCode& code);

/// Thresholds at 0.5, then counts the leading run: a run of L ones gives
/// bin L-1, a run of Z zeros gives bin 11+Z.
PositionPrediction decode_ordinal(std::span<const float> outputs);
int decode_ordinal_bits(const OrdinalCode& bits);

PositionPrediction infer_categorical(std::span<const float> outputs);

}  // namespace cadc
