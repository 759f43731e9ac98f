#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "cadc/core.hpp"
#include "cadc/formats.hpp"

namespace cadc {

/// Simulated animal running back and forth over 24 bins, with place cells
/// rendered into 8-bit frames.
struct GeneratorParams {
  int n_cells = 300;
  std::int64_t n_frames = 8000;
  FrameDims dims{};
  double field_width = 1.5;  // bins, Gaussian sigma of the tuning curve
  double decay = 0.95;       // calcium retention per frame
  double gain = 10.0;        // calcium added per spike
  double peak_rate = 0.3;    // spikes per frame at the preferred position
  double radius = 6.0;       // footprint radius, px; intensity halves here
  double noise_std = 2.0;
  double speed = 0.05;       // bins per frame
  double speed_jitter = 0.2; // relative, uniform
  double baseline = 40.0;
  // Firing in the non-preferred travel direction is scaled by 1 - this.
  double direction_selectivity = 0.5;
  double brightness_spread = 0.3;  // per-cell gain in 1 +- spread
  double fov_radius = 200.0;       // cells lie in a central disk
  double min_distance = 4.0;
  // Dim cells that contribute light but get no contour, per detected cell.
  double undetected_ratio = 1.0;
  double undetected_brightness = 0.5;
  /// Poisson spike counts; when false the expected rate is used directly.
  bool stochastic_spikes = true;
  double frame_rate = 30.0;
  int window = kDefaultWindow;
  std::uint64_t seed = 0;

  /// Throws InvalidParams.
  void check() const;
  int undetected_cells() const {
    return static_cast<int>(std::lround(undetected_ratio * n_cells));
  }
};

struct SyntheticCell {
  Center center;
  double preferred = 0.0;  // continuous track position
  double brightness = 1.0;
  int direction = 1;  // preferred travel direction, +1 or -1
  bool detected = true;
};

/// Random centres in the disk of `fov_radius` around the frame centre with
/// pairwise distance >= `min_distance`. Throws InvalidParams when the disk
/// is too crowded.
std::vector<Center> place_cells(int n, FrameDims dims, double fov_radius,
                                double min_distance, std::mt19937_64& rng);

/// Thresholded footprint (distance <= radius) as a contour mask.
Contour footprint_contour(int id, Center center, double radius, int window);

/// Builds the trajectory, cells and calcium state up front; frames are then
/// rendered on demand, in any order, each from its own noise stream.
class SessionGenerator {
 public:
  explicit SessionGenerator(const GeneratorParams& params);

  const GeneratorParams& params() const { return params_; }
  const std::vector<double>& trajectory() const { return track_; }
  const std::vector<int>& positions() const { return positions_; }
  /// +1 while moving up the track, -1 on the way back.
  const std::vector<int>& directions() const { return directions_; }
  const std::vector<SyntheticCell>& cells() const { return cells_; }
  /// Ground-truth contours of the detected cells, ids 0..n_cells-1.
  const std::vector<Contour>& contours() const { return contours_; }
  float calcium(std::int64_t t, std::size_t cell) const {
    return calcium_[static_cast<std::size_t>(t) * cells_.size() + cell];
  }

  Frame render(std::int64_t t) const;
  SessionHeader header() const;

 private:
  GeneratorParams params_;
  std::vector<double> track_;
  std::vector<int> positions_;
  std::vector<int> directions_;
  std::vector<SyntheticCell> cells_;
  std::vector<Contour> contours_;
  std::vector<float> calcium_;
  std::vector<float> footprint_;  // (2*extent+1)^2 profile
  int extent_ = 0;
};

/// Whole session in memory. Use write_session for full-size runs.
Session generate_session(const GeneratorParams& params);
/// Streams the session to disk frame by frame and returns the contours.
std::vector<Contour> write_session(const GeneratorParams& params,
                                   const std::filesystem::path& path);

}  // namespace cadc
