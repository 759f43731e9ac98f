#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "cadc/nn.hpp"

namespace cadc {

/// Integrate-and-fire unit with reset by subtraction.
struct IafNeuron {
  double threshold = 1.0;
  double potential = 0.0;

  /// Adds `drive`; returns true (and subtracts the threshold) on a spike.
  bool step(double drive) {
    potential += drive;
    if (potential >= threshold) {
      potential -= threshold;
      return true;
    }
    return false;
  }
};

/// Rate-coded copy of a CnnModel. The conv layer is driven by the analog
/// input every step; the output layer integrates conv spikes.
struct SnnModel {
  int side = 0;
  Layer conv;
  Layer fc;
  std::vector<double> thresholds{1.0, 1.0};
  int time_steps = 32;

  int bits() const { return conv.bits; }
  friend bool operator==(const SnnModel&, const SnnModel&) = default;
};

inline constexpr double kNormalizationPercentile = 99.9;

/// Value at percentile `p` (0..100) by linear interpolation between order
/// statistics. Takes a copy because it partially sorts.
double percentile(std::vector<float> values, double p);

/// Data-based normalization: each layer is rescaled so the 99.9th percentile
/// of its rectified activations over `calibration` lands on threshold 1.
/// `bits` > 0 then quantizes the rescaled weights.
SnnModel convert_to_snn(const CnnModel& cnn, const RowMatrix& calibration,
                        int time_steps, int bits = 0);

struct SpikeCounts {
  std::vector<int> hidden;
  std::vector<int> output;
};

SpikeCounts run_snn(const SnnModel& model, std::span<const float> input);
/// Argmax of output spike counts; ties to the lowest index.
PositionPrediction infer_snn(const SnnModel& model,
                             std::span<const float> input);
std::vector<int> predict_all(const SnnModel& model, const Dataset& data);

}  // namespace cadc
