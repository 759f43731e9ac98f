#include "cadc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadc/error.hpp"

namespace cadc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_params, what);
}

}  // namespace

void GeneratorParams::check() const {
  require(n_cells >= 0 && undetected_ratio >= 0, "cell counts must be >= 0");
  require(n_frames >= 1, "need at least one frame");
  require(dims.width > 0 && dims.height > 0, "frame dims must be positive");
  require(field_width > 0, "place field width must be positive");
  // 0 is allowed: calcium then follows the spikes of the current frame.
  require(decay >= 0 && decay < 1, "decay must lie in [0, 1)");
  require(gain >= 0 && peak_rate >= 0, "gain and rate must be >= 0");
  require(radius > 0, "footprint radius must be positive");
  require(noise_std >= 0, "noise std must be >= 0");
  require(speed > 0 && speed < kPositionBins, "speed must be in (0, 24)");
  require(speed_jitter >= 0 && speed_jitter < 1, "speed jitter must be in [0, 1)");
  require(direction_selectivity >= 0 && direction_selectivity <= 1,
          "direction selectivity must be in [0, 1]");
  require(brightness_spread >= 0 && brightness_spread < 1,
          "brightness spread must be in [0, 1)");
  require(fov_radius > 0 && min_distance >= 0, "bad field of view");
  require(frame_rate > 0, "frame rate must be positive");
  require(window >= 3 && window % 2 == 1, "window must be odd and >= 3");
  require(2 * radius < window, "footprint does not fit the contour window");
}

std::vector<Center> place_cells(int n, FrameDims dims, double fov_radius,
                                double min_distance, std::mt19937_64& rng) {
  const double cr = dims.height / 2.0;
  const double cc = dims.width / 2.0;
  std::uniform_real_distribution<double> u(-fov_radius, fov_radius);
  std::vector<Center> out;
  out.reserve(static_cast<std::size_t>(n));
  const double d2 = min_distance * min_distance;
  const long budget = 1000L * std::max(n, 1);
  long tries = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++tries > budget)
      throw Error(Errc::invalid_params,
                  "cannot place " + std::to_string(n) + " cells " +
                      std::to_string(min_distance) + " px apart");
    const double dr = u(rng), dc = u(rng);
    if (dr * dr + dc * dc > fov_radius * fov_radius) continue;
    const Center c{static_cast<int>(std::lround(cr + dr)),
                   static_cast<int>(std::lround(cc + dc))};
    if (c.row < 0 || c.col < 0 || c.row >= dims.height || c.col >= dims.width)
      continue;
    const bool clear = std::none_of(out.begin(), out.end(), [&](Center o) {
      const double a = o.row - c.row, b = o.col - c.col;
      return a * a + b * b < d2;
    });
    if (clear) out.push_back(c);
  }
  return out;
}

Contour footprint_contour(int id, Center center, double radius, int window) {
  Contour c(id, center, window, ContourKind::cell);
  const int h = window / 2;
  for (int dr = 0; dr < window; ++dr)
    for (int dc = 0; dc < window; ++dc) {
      const double y = dr - h, x = dc - h;
      if (y * y + x * x <= radius * radius) c.set(dr, dc);
    }
  return c;
}

SessionGenerator::SessionGenerator(const GeneratorParams& params)
    : params_(params) {
  params_.check();
  const auto& p = params_;
  std::mt19937_64 rng(p.seed);

  // Triangle wave with per-frame speed jitter, reflected at both ends.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  track_.resize(static_cast<std::size_t>(p.n_frames));
  positions_.resize(track_.size());
  directions_.resize(track_.size());
  double x = 0.0, dir = 1.0;
  const double top = kPositionBins;
  for (std::size_t t = 0; t < track_.size(); ++t) {
    track_[t] = x;
    directions_[t] = dir > 0 ? 1 : -1;
    positions_[t] = std::clamp(static_cast<int>(std::floor(x)), 0,
                               kPositionBins - 1);
    x += dir * p.speed * (1.0 + p.speed_jitter * unit(rng));
    if (x >= top) {
      x = std::max(0.0, 2 * top - x - 1e-9);
      dir = -1.0;
    } else if (x < 0.0) {
      x = std::min(top - 1e-9, -x);
      dir = 1.0;
    }
  }

  const int total = p.n_cells + p.undetected_cells();
  const auto centers =
      place_cells(total, p.dims, p.fov_radius, p.min_distance, rng);
  std::uniform_real_distribution<double> pref(0.0, top);
  std::uniform_real_distribution<double> bright(1.0 - p.brightness_spread,
                                                1.0 + p.brightness_spread);
  cells_.resize(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    auto& c = cells_[static_cast<std::size_t>(i)];
    c.center = centers[static_cast<std::size_t>(i)];
    c.preferred = pref(rng);
    c.brightness = bright(rng);
    c.direction = rng() % 2 ? 1 : -1;
    c.detected = i < p.n_cells;
    if (!c.detected) c.brightness *= p.undetected_brightness;
  }
  for (int i = 0; i < p.n_cells; ++i)
    contours_.push_back(
        footprint_contour(i, cells_[static_cast<std::size_t>(i)].center,
                          p.radius, p.window));

  // Calcium: c <- decay * c + gain * spikes, spikes ~ Poisson(tuning rate).
  calcium_.assign(track_.size() * cells_.size(), 0.0f);
  std::vector<double> state(cells_.size(), 0.0);
  const double inv = 1.0 / (2.0 * p.field_width * p.field_width);
  for (std::size_t t = 0; t < track_.size(); ++t) {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const double d = track_[t] - cells_[i].preferred;
      double rate = p.peak_rate * std::exp(-d * d * inv);
      if (directions_[t] != cells_[i].direction)
        rate *= 1.0 - p.direction_selectivity;
      double act = rate;
      if (p.stochastic_spikes) {
        std::poisson_distribution<int> spikes(rate);
        act = rate > 0 ? spikes(rng) : 0;
      }
      state[i] = p.decay * state[i] + p.gain * act;
      calcium_[t * cells_.size() + i] = static_cast<float>(state[i]);
    }
  }

  extent_ = static_cast<int>(std::ceil(2.0 * p.radius));
  const int span = 2 * extent_ + 1;
  footprint_.resize(static_cast<std::size_t>(span) * span);
  for (int a = -extent_; a <= extent_; ++a)
    for (int b = -extent_; b <= extent_; ++b) {
      const double q = (a * a + b * b) / (p.radius * p.radius);
      footprint_[static_cast<std::size_t>(a + extent_) * span + (b + extent_)] =
          static_cast<float>(std::exp2(-q));
    }
}

Frame SessionGenerator::render(std::int64_t t) const {
  if (t < 0 || t >= params_.n_frames)
    throw Error(Errc::invalid_argument,
                "frame " + std::to_string(t) + " out of range");
  const auto& p = params_;
  const int w = p.dims.width, h = p.dims.height;
  std::vector<float> acc(static_cast<std::size_t>(p.dims.pixels()),
                         static_cast<float>(p.baseline));
  const int span = 2 * extent_ + 1;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const float level = calcium(t, i) * static_cast<float>(cells_[i].brightness);
    if (level == 0.0f) continue;
    const Center c = cells_[i].center;
    for (int a = -extent_; a <= extent_; ++a) {
      const int r = c.row + a;
      if (r < 0 || r >= h) continue;
      const float* fp = &footprint_[static_cast<std::size_t>(a + extent_) * span];
      float* row = &acc[static_cast<std::size_t>(r) * w];
      for (int b = -extent_; b <= extent_; ++b) {
        const int col = c.col + b;
        if (col >= 0 && col < w) row[col] += level * fp[b + extent_];
      }
    }
  }

  Frame f(p.dims, t);
  std::seed_seq seq{static_cast<std::uint32_t>(p.seed),
                    static_cast<std::uint32_t>(p.seed >> 32),
                    static_cast<std::uint32_t>(t), 0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<float> noise(0.0f, static_cast<float>(p.noise_std));
  const bool noisy = p.noise_std > 0;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const float v = acc[k] + (noisy ? noise(rng) : 0.0f);
    f.pixels[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return f;
}

SessionHeader SessionGenerator::header() const {
  SessionHeader hd;
  hd.dims = params_.dims;
  hd.n_frames = params_.n_frames;
  hd.meta.frame_rate = params_.frame_rate;
  hd.meta.seed = params_.seed;
  hd.meta.window = params_.window;
  return hd;
}

Session generate_session(const GeneratorParams& params) {
  const SessionGenerator gen(params);
  Session s;
  s.dims = params.dims;
  s.positions = gen.positions();
  s.contours = gen.contours();
  s.meta = gen.header().meta;
  s.frames.reserve(static_cast<std::size_t>(params.n_frames));
  for (std::int64_t t = 0; t < params.n_frames; ++t)
    s.frames.push_back(gen.render(t));
  return s;
}

std::vector<Contour> write_session(const GeneratorParams& params,
                                   const std::filesystem::path& path) {
  const SessionGenerator gen(params);
  SessionWriter out(path, gen.header(), gen.positions());
  for (std::int64_t t = 0; t < params.n_frames; ++t) out.write(gen.render(t));
  out.close();
  return gen.contours();
}

}  // namespace cadc
