#include "cadc/quantize.hpp"

#include <cmath>
#include <string>

#include "cadc/error.hpp"

namespace cadc {

Layer quantize(const Layer& layer, int bits) {
  if (bits < 2 || bits > 16)
    throw Error(Errc::invalid_argument,
                "bit width " + std::to_string(bits) + " outside [2, 16]");
  Layer q = layer;
  const double scale = layer.w.size() ? layer.w.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return q;
  const int top = max_code(bits);
  q.bits = bits;
  q.scale = scale;
  q.codes.resize(static_cast<std::size_t>(layer.w.size()));
  for (Eigen::Index i = 0; i < layer.w.size(); ++i) {
    const auto code = static_cast<std::int32_t>(
        std::lround(layer.w.data()[i] / scale * top));
    q.codes[static_cast<std::size_t>(i)] = code;
    q.w.data()[i] = dequantize(code, scale, bits);
  }
  return q;
}

CnnModel quantize(const CnnModel& model, int bits) {
  CnnModel q = model;
  q.conv = quantize(model.conv, bits);
  q.fc = quantize(model.fc, bits);
  return q;
}

AnnModel quantize(const AnnModel& model, int bits) {
  AnnModel q = model;
  q.hidden1 = quantize(model.hidden1, bits);
  q.hidden2 = quantize(model.hidden2, bits);
  q.out = quantize(model.out, bits);
  return q;
}

SnnModel quantize(const SnnModel& model, int bits) {
  SnnModel q = model;
  q.conv = quantize(model.conv, bits);
  q.fc = quantize(model.fc, bits);
  return q;
}

}  // namespace cadc
