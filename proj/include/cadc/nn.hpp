#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cadc/ordinal.hpp"

namespace cadc {

enum class ModelKind : std::uint8_t { cnn = 1, ann = 2, snn = 3 };
enum class Encoding : std::uint8_t { categorical, ordinal };
enum class InputKind : std::uint8_t { cell, tile };

std::string_view to_string(ModelKind k);
std::string_view to_string(Encoding e);
std::string_view to_string(InputKind i);

using RowMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense weights (out x in) plus biases. `bits` > 0 marks a quantized layer
/// whose weights are codes * scale / (2^(bits-1) - 1).
struct Layer {
  RowMatrix w;
  Eigen::VectorXf b;
  int bits = 0;
  double scale = 0.0;
  std::vector<std::int32_t> codes;

  Layer() = default;
  Layer(int out, int in) : w(RowMatrix::Zero(out, in)), b(Eigen::VectorXf::Zero(out)) {}
  int rows() const { return static_cast<int>(w.rows()); }
  int cols() const { return static_cast<int>(w.cols()); }
  friend bool operator==(const Layer& a, const Layer& b) {
    return a.w == b.w && a.b == b.b && a.bits == b.bits && a.scale == b.scale &&
           a.codes == b.codes;
  }
};

inline constexpr int kConvFilters = 6;
inline constexpr int kHiddenWidth = 32;

/// 6 filters of 3x3 (valid, rectified), flattened filter-major into a dense
/// layer to 24 outputs.
struct CnnModel {
  int side = 0;
  Layer conv;  // 6 x 9
  Layer fc;    // 24 x 6*(side-2)^2

  int positions() const { return (side - 2) * (side - 2); }
  int features() const { return kConvFilters * positions(); }
  /// Rectified conv features, filter-major.
  Eigen::VectorXf features(std::span<const float> input) const;
  Eigen::VectorXf forward(std::span<const float> input) const;
  friend bool operator==(const CnnModel&, const CnnModel&) = default;
};

/// Two rectified hidden layers of 32, then 24 logits (categorical) or 12
/// logistic outputs (ordinal).
struct AnnModel {
  Encoding encoding = Encoding::categorical;
  Layer hidden1;
  Layer hidden2;
  Layer out;

  int inputs() const { return hidden1.cols(); }
  Eigen::VectorXf forward(std::span<const float> input) const;
  friend bool operator==(const AnnModel&, const AnnModel&) = default;
};

/// 12 for ordinal, `bins` for categorical.
int output_width(Encoding e, int bins = 24);

/// Samples as rows, labels as position bins.
struct Dataset {
  RowMatrix inputs;
  std::vector<int> labels;
  int side = 0;  // grid side for CNN inputs

  std::int64_t size() const { return inputs.rows(); }
};

struct TrainParams {
  int epochs = 100;
  int batch = 64;
  float learning_rate = 0.01f;
  float momentum = 0.9f;
  int bins = 24;  // categorical output width
};

/// Mini-batch SGD with momentum; softmax cross-entropy for categorical,
/// per-node binary cross-entropy against the ordinal code otherwise.
/// Deterministic in (data, params, seed). Throws DivergedTraining.
AnnModel train_ann(const Dataset& data, Encoding encoding,
                   const TrainParams& params, std::uint64_t seed);
CnnModel train_cnn(const Dataset& data, const TrainParams& params,
                   std::uint64_t seed);

PositionPrediction predict(const AnnModel& model, std::span<const float> input);
PositionPrediction predict(const CnnModel& model, std::span<const float> input);

std::vector<int> predict_all(const AnnModel& model, const Dataset& data);
std::vector<int> predict_all(const CnnModel& model, const Dataset& data);

}  // namespace cadc
