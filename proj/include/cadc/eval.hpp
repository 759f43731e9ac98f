#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cadc/dataset.hpp"
#include "cadc/nn.hpp"

namespace cadc {

/// Percentage of predictions within (n-1)/2 bins of the truth. Only odd n
/// is defined (InvalidArgument otherwise); EmptyInput on no samples.
double hit_n(std::span<const int> predictions, std::span<const int> truths,
             int n);
/// Mean absolute bin distance. EmptyInput on no samples.
double mean_error(std::span<const int> predictions,
                  std::span<const int> truths);

struct ExperimentCell {
  InputKind input = InputKind::tile;
  Encoding encoding = Encoding::ordinal;
  ModelKind model = ModelKind::ann;
};

struct ExperimentOptions {
  int trials = 5;
  std::uint64_t seed = 0;
  TrainParams train{};
  int n_p = 0;         // cell grid side, 0 = automatic
  int time_steps = 32; // SNN cells only
  int bits = 8;        // SNN cells only, 0 = float
  int threads = 1;
};

struct ExperimentRow {
  ExperimentCell cell;
  double hit1_mean = 0, hit3_mean = 0, hit3_std = 0;
  double sigma_mean = 0, sigma_std = 0;
  int trials = 0;
};

/// Seed of one (cell, trial) pair: a function of the master seed and the
/// cell's identity, so adding grid cells never changes existing rows.
std::uint64_t trial_seed(std::uint64_t master, const ExperimentCell& cell,
                         int trial);

/// Trains and scores every grid cell `trials` times on the chronological
/// split. The output does not depend on the thread count.
std::vector<ExperimentRow> run_experiment(
    const DecodingData& data, std::span<const ExperimentCell> grid,
    const ExperimentOptions& options);

/// All six input x encoding x model combinations.
std::vector<ExperimentCell> table_grid();

/// `input,encoding,model,hit3_mean,hit3_std,sigma_mean,sigma_std,trials`.
void write_report_csv(std::ostream& out, std::span<const ExperimentRow> rows);

/// SNN accuracy over weight bit widths (at a fixed step count) and step
/// counts (at a fixed bit width), averaged over independently trained CNNs.
struct SweepOptions {
  std::vector<int> bits{16, 8, 6, 4};
  std::vector<int> time_steps{4, 8, 16, 32};
  int steps_for_bits = 32;
  int bits_for_steps = 6;
  int seeds = 5;
  std::uint64_t seed = 0;
  TrainParams train{};
};

struct SweepRow {
  ModelKind model = ModelKind::snn;  // cnn for the float reference
  int bits = 0;
  int time_steps = 0;
  double hit1_mean = 0, hit3_mean = 0;
  int seeds = 0;
};

/// First row is the float CNN, then the bit sweep, then the step sweep.
std::vector<SweepRow> run_sweep(const PreparedInputs& inputs,
                                const SweepOptions& options);

/// `model,bits,time_steps,hit1_mean,hit3_mean,seeds`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace cadc
