#include "cadc/snn.hpp"

#include <algorithm>
#include <cmath>

#include "cadc/error.hpp"
#include "cadc/quantize.hpp"

namespace cadc {

double percentile(std::vector<float> values, double p) {
  if (values.empty()) throw Error(Errc::empty_input, "percentile of nothing");
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double a = values[lo];
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + lo + 1, values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

SnnModel convert_to_snn(const CnnModel& cnn, const RowMatrix& calibration,
                        int time_steps, int bits) {
  if (time_steps < 1)
    throw Error(Errc::invalid_argument, "SNN needs at least one time step");
  if (calibration.rows() == 0)
    throw Error(Errc::empty_input, "no calibration inputs");

  std::vector<float> hidden;
  std::vector<float> output;
  hidden.reserve(static_cast<std::size_t>(calibration.rows() * cnn.features()));
  output.reserve(static_cast<std::size_t>(calibration.rows() * cnn.fc.rows()));
  std::vector<float> row(static_cast<std::size_t>(calibration.cols()));
  for (Eigen::Index i = 0; i < calibration.rows(); ++i) {
    for (Eigen::Index c = 0; c < calibration.cols(); ++c)
      row[static_cast<std::size_t>(c)] = calibration(i, c);
    const Eigen::VectorXf f = cnn.features(row);
    const Eigen::VectorXf z = cnn.fc.w * f + cnn.fc.b;
    hidden.insert(hidden.end(), f.data(), f.data() + f.size());
    for (Eigen::Index k = 0; k < z.size(); ++k)
      output.push_back(std::max(z(k), 0.0f));
  }
  double l1 = percentile(std::move(hidden), kNormalizationPercentile);
  double l2 = percentile(std::move(output), kNormalizationPercentile);
  // A silent layer has nothing to normalize against.
  if (l1 <= 0.0) l1 = 1.0;
  if (l2 <= 0.0) l2 = 1.0;

  SnnModel s;
  s.side = cnn.side;
  s.time_steps = time_steps;
  s.conv = cnn.conv;
  s.fc = cnn.fc;
  s.conv.w /= static_cast<float>(l1);
  s.conv.b /= static_cast<float>(l1);
  s.fc.w *= static_cast<float>(l1 / l2);
  s.fc.b /= static_cast<float>(l2);
  s.thresholds = {1.0, 1.0};
  if (bits > 0) s = quantize(s, bits);
  return s;
}

SpikeCounts run_snn(const SnnModel& model, std::span<const float> input) {
  if (model.time_steps < 1)
    throw Error(Errc::invalid_argument, "SNN needs at least one time step");
  const Eigen::VectorXf drive = [&] {
    // Pre-activation conv output: the constant current of each hidden unit.
    const int out = model.side - 2;
    const int per = out * out;
    Eigen::VectorXf d(kConvFilters * per);
    if (static_cast<int>(input.size()) != model.side * model.side)
      throw Error(Errc::invalid_argument, "SNN input size mismatch");
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < out; ++j)
        for (int k = 0; k < kConvFilters; ++k) {
          float z = model.conv.b(k);
          for (int di = 0; di < 3; ++di)
            for (int dj = 0; dj < 3; ++dj)
              z += model.conv.w(k, di * 3 + dj) *
                   input[(i + di) * model.side + (j + dj)];
          d(k * per + i * out + j) = z;
        }
    return d;
  }();

  const float v1 = static_cast<float>(model.thresholds.at(0));
  const float v2 = static_cast<float>(model.thresholds.at(1));
  Eigen::VectorXf u1 = Eigen::VectorXf::Zero(drive.size());
  Eigen::VectorXf u2 = Eigen::VectorXf::Zero(model.fc.rows());
  Eigen::VectorXf spikes(drive.size());
  SpikeCounts counts{std::vector<int>(static_cast<std::size_t>(drive.size()), 0),
                     std::vector<int>(static_cast<std::size_t>(model.fc.rows()), 0)};
  for (int t = 0; t < model.time_steps; ++t) {
    u1 += drive;
    for (Eigen::Index i = 0; i < u1.size(); ++i) {
      const bool fire = u1(i) >= v1;
      spikes(i) = fire ? 1.0f : 0.0f;
      if (fire) {
        u1(i) -= v1;
        ++counts.hidden[static_cast<std::size_t>(i)];
      }
    }
    u2 += model.fc.w * spikes + model.fc.b;
    for (Eigen::Index k = 0; k < u2.size(); ++k)
      if (u2(k) >= v2) {
        u2(k) -= v2;
        ++counts.output[static_cast<std::size_t>(k)];
      }
  }
  return counts;
}

PositionPrediction infer_snn(const SnnModel& model,
                             std::span<const float> input) {
  const SpikeCounts c = run_snn(model, input);
  PositionPrediction p;
  p.bin = argmax_lowest(std::span<const int>(c.output));
  p.scores.assign(c.output.begin(), c.output.end());
  return p;
}

std::vector<int> predict_all(const SnnModel& model, const Dataset& data) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  std::vector<float> row(static_cast<std::size_t>(data.inputs.cols()));
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c)
      row[static_cast<std::size_t>(c)] = data.inputs(i, c);
    out.push_back(infer_snn(model, row).bin);
  }
  return out;
}

}  // namespace cadc
