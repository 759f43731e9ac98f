#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "cadc/nn.hpp"

namespace cadc {

/// Multiply-accumulates of one inference.
std::int64_t cnn_macs(int n_p);
std::int64_t ann_macs(int inputs, int outputs);
std::int64_t snn_macs(int n_p, int time_steps);

/// Measured decoder cycle counts per input size.
struct CycleRecord {
  int n_p;
  std::int64_t cnn;
  std::int64_t ann_cat;
  std::int64_t ann_ord;
};

inline constexpr std::array<CycleRecord, 5> kMeasuredCycles{{
    {16, 65936, 10196, 9840},
    {17, 77030, 11253, 10897},
    {13, 46553, 7417, 7061},
    {27, 240089, 25337, 24981},
    {25, 203225, 22009, 21653},
}};

/// SNN at n_p = 16 with 8 time steps.
inline constexpr std::int64_t kMeasuredSnnCycles = 278900;
inline constexpr int kMeasuredSnnSide = 16;
inline constexpr int kMeasuredSnnSteps = 8;

struct CyclePoint {
  double macs;
  double cycles;
};

/// estimate = overhead + per_mac * MACs.
struct CycleCalibration {
  double per_mac = 1.0;
  double overhead = 0.0;

  double estimate(double macs) const { return overhead + per_mac * macs; }
};

/// Least squares on relative residuals (a, b minimise
/// sum ((a + b*x - y) / y)^2). Needs two distinct x values.
CycleCalibration fit_relative(std::span<const CyclePoint> points);
/// Ordinary least squares on absolute residuals.
CycleCalibration fit_ordinary(std::span<const CyclePoint> points);

struct DecoderCalibration {
  CycleCalibration cnn;
  CycleCalibration ann;
  CycleCalibration snn;  // through the origin
};

/// Fits all three kinds against the measured records above.
DecoderCalibration calibrate_decoders();

/// Estimated cycles of one inference. `inputs` is n_p^2 unless given.
double estimate_cycles(const DecoderCalibration& cal, ModelKind kind, int n_p,
                       Encoding encoding = Encoding::categorical,
                       int time_steps = kMeasuredSnnSteps, int inputs = 0);

inline double cycles_to_us(double cycles, double clock_mhz) {
  return cycles / clock_mhz;
}

}  // namespace cadc
