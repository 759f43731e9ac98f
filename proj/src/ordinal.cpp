#include "cadc/ordinal.hpp"

#include "cadc/core.hpp"
#include "cadc/error.hpp"

namespace cadc {

OrdinalCode encode_ordinal(int bin) {
  if (bin < 0 || bin >= kPositionBins)
    throw Error(Errc::invalid_argument,
                "position bin " + std::to_string(bin) + " out of range");
  OrdinalCode code{};
  if (bin < kOrdinalBits) {
    for (int i = 0; i <= bin; ++i) code[i] = 1;
  } else {
    for (int i = bin - (kOrdinalBits - 1); i < kOrdinalBits; ++i) code[i] = 1;
  }
  return code;
}

std::string to_string(const OrdinalCode& code) {
  std::string s;
  for (auto b : code) s += b ? '1' : '0';
  return s;
}

int decode_ordinal_bits(const OrdinalCode& bits) {
  const std::uint8_t lead = bits[0];
  int run = 0;
  while (run < kOrdinalBits && bits[run] == lead) ++run;
  return lead ? run - 1 : kOrdinalBits + run - 1;
}

PositionPrediction decode_ordinal(std::span<const float> outputs) {
  if (outputs.size() != kOrdinalBits)
    throw Error(Errc::invalid_argument, "ordinal decoding needs 12 outputs");
  OrdinalCode bits{};
  for (int i = 0; i < kOrdinalBits; ++i) bits[i] = outputs[i] >= 0.5f ? 1 : 0;
  return {decode_ordinal_bits(bits),
          std::vector<float>(outputs.begin(), outputs.end())};
}

PositionPrediction infer_categorical(std::span<const float> outputs) {
  if (outputs.empty())
    throw Error(Errc::invalid_argument, "no outputs to decode");
  return {argmax_lowest(outputs),
          std::vector<float>(outputs.begin(), outputs.end())};
}

}  // namespace cadc
