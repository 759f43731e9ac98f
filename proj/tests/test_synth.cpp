#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>

#include "cadc/formats.hpp"
#include "cadc/synth.hpp"
#include "cadc/trace.hpp"
#include "helpers.hpp"

using namespace cadc;
using namespace cadc::testing;

TEST_CASE("default trajectory covers every bin in both directions") {
  GeneratorParams p;
  p.n_cells = 0;
  p.undetected_ratio = 0;
  p.dims = {512, 512};
  const SessionGenerator gen(p);
  REQUIRE(gen.positions().size() == 8000);
  std::array<int, 24> visits{};
  int reversals = 0;
  for (std::size_t t = 0; t < gen.positions().size(); ++t) {
    ++visits[gen.positions()[t]];
    if (t > 0) {
      CHECK(std::abs(gen.positions()[t] - gen.positions()[t - 1]) <= 1);
      reversals += gen.directions()[t] != gen.directions()[t - 1];
    }
  }
  for (int v : visits) CHECK(v >= 100);
  CHECK(reversals >= 10);
  CHECK(gen.positions().front() == 0);
}

TEST_CASE("closed-form render of a single cell") {
  GeneratorParams p;
  p.n_cells = 1;
  p.undetected_ratio = 0;
  p.n_frames = 1500;
  p.dims = {64, 64};
  p.fov_radius = 10;
  p.noise_std = 0;
  p.decay = 0;
  p.stochastic_spikes = false;
  p.direction_selectivity = 0;
  p.seed = 8;
  const SessionGenerator gen(p);
  const auto& cell = gen.cells().at(0);
  const auto contour = gen.contours().at(0);
  std::array<double, 24> sums{}, counts{};
  for (std::int64_t t = 0; t < p.n_frames; ++t) {
    const Frame f = gen.render(t);
    const double d = gen.trajectory()[t] - cell.preferred;
    const double rate = p.peak_rate * std::exp(-d * d / (2 * p.field_width * p.field_width));
    const double expect = p.baseline + p.gain * rate * cell.brightness;
    CHECK(f.at(cell.center.row, cell.center.col) == std::lround(expect));
    // Far corner only sees the baseline.
    CHECK(f.at(0, 0) == std::lround(p.baseline));
    const std::vector<Contour> one{contour};
    sums[gen.positions()[t]] += window_sums(f, one)[0];
    counts[gen.positions()[t]] += 1;
  }
  int best = 0;
  for (int b = 1; b < 24; ++b)
    if (sums[b] / counts[b] > sums[best] / counts[best]) best = b;
  CHECK(std::abs(best + 0.5 - cell.preferred) <= 1.0);
}

TEST_CASE("generation is deterministic") {
  GeneratorParams p;
  p.n_cells = 20;
  p.n_frames = 30;
  p.dims = {96, 96};
  p.fov_radius = 40;
  p.seed = 12;
  const Session a = generate_session(p);
  const Session b = generate_session(p);
  CHECK(a.frames == b.frames);
  CHECK(a.positions == b.positions);
  CHECK(a.contours == b.contours);
  REQUIRE(a.contours.size() == 20);
  const SessionGenerator gen(p);
  CHECK(gen.render(17) == a.frames[17]);
  p.seed = 13;
  CHECK_FALSE(generate_session(p).frames == a.frames);

  // Contours are thresholded footprints inside the n_c window.
  const auto& c = a.contours[0];
  CHECK(c.window == p.window);
  CHECK(c.bit(12, 12));
  CHECK(c.bit(12, 18));
  CHECK_FALSE(c.bit(12, 19));
  CHECK_FALSE(c.bit(0, 0));
}

TEST_CASE("invalid parameters") {
  const auto bad = [](auto edit) {
    GeneratorParams p;
    p.dims = {64, 64};
    p.fov_radius = 20;
    p.n_cells = 3;
    edit(p);
    return code_of([&] { SessionGenerator g(p); });
  };
  CHECK(bad([](GeneratorParams&) {}) == std::nullopt);
  CHECK(bad([](GeneratorParams& p) { p.n_frames = 0; }) == Errc::invalid_params);
  CHECK(bad([](GeneratorParams& p) { p.decay = 1.0; }) == Errc::invalid_params);
  CHECK(bad([](GeneratorParams& p) { p.n_cells = -1; }) == Errc::invalid_params);
  CHECK(bad([](GeneratorParams& p) { p.noise_std = -1; }) == Errc::invalid_params);
  CHECK(bad([](GeneratorParams& p) { p.radius = 13; }) == Errc::invalid_params);
  CHECK(bad([](GeneratorParams& p) { p.dims = {0, 64}; }) == Errc::invalid_params);
  // 500 cells 4 px apart do not fit a disk of radius 20.
  CHECK(bad([](GeneratorParams& p) { p.n_cells = 500; }) == Errc::invalid_params);
}

TEST_CASE("cell placement keeps its spacing") {
  std::mt19937_64 rng(1);
  const auto cs = place_cells(760, {512, 512}, 200, 4, rng);
  REQUIRE(cs.size() == 760);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double dr = cs[i].row - 256.0, dc = cs[i].col - 256.0;
    CHECK(dr * dr + dc * dc <= 201.0 * 201.0);
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      const double a = cs[i].row - cs[j].row, b = cs[i].col - cs[j].col;
      if (a * a + b * b < 16) FAIL("cells too close");
    }
  }
}

TEST_CASE("small session file round trip") {
  GeneratorParams p;
  p.n_cells = 10;
  p.n_frames = 25;
  p.dims = {64, 64};
  p.fov_radius = 20;
  const auto dir = std::filesystem::temp_directory_path() / "cadc_synth_tests";
  std::filesystem::create_directories(dir);
  const auto contours = write_session(p, dir / "s.bin");
  const Session back = load_session(dir / "s.bin");
  const Session mem = generate_session(p);
  CHECK(back.frames == mem.frames);
  CHECK(back.positions == mem.positions);
  CHECK(contours == mem.contours);
  for (const auto& f : back.frames) CHECK(f.pixels.size() == 64u * 64u);
}
