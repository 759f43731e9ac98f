#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "cadc/eval.hpp"
#include "helpers.hpp"

using namespace cadc;
using namespace cadc::testing;

namespace {

/// Traces that encode position with noise: each contour fires near one bin.
DecodingData fake_data(std::int64_t frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DecodingData d;
  d.tile_rows = d.tile_cols = 32;
  for (std::int64_t t = 0; t < frames; ++t) d.positions.push_back(static_cast<int>((t / 3) % 24));
  const auto fill = [&](TraceTable& table, int n) {
    std::normal_distribution<double> noise(0, 20);
    for (int i = 0; i < n; ++i) table.ids.push_back(i);
    for (std::int64_t t = 0; t < frames; ++t)
      for (int i = 0; i < n; ++i) {
        const double v = 100 + (d.positions[t] == i % 24 ? 200 : 0) + noise(rng);
        table.values.push_back(static_cast<std::uint16_t>(std::clamp(v, 0.0, 1000.0)));
      }
  };
  fill(d.cells, 30);
  fill(d.tiles, 32 * 32);
  d.train = first_half(frames);
  d.test = {d.train.last, frames};
  return d;
}

}  // namespace

TEST_CASE("hit and error examples") {
  const std::vector<int> p{5, 7, 9}, t{5, 8, 3};
  CHECK(hit_n(p, t, 1) == doctest::Approx(100.0 / 3));
  CHECK(hit_n(p, t, 3) == doctest::Approx(200.0 / 3));
  CHECK(hit_n(t, t, 1) == 100.0);
  CHECK(hit_n(t, t, 5) == 100.0);
  CHECK(mean_error(p, t) == doctest::Approx(7.0 / 3));
  CHECK(mean_error(t, t) == 0.0);
  const std::vector<int> off{7, 10, 5};
  CHECK(mean_error(off, t) == 2.0);

  CHECK(code_of([&] { hit_n(p, t, 2); }) == Errc::invalid_argument);
  CHECK(code_of([&] { hit_n({}, {}, 1); }) == Errc::empty_input);
  CHECK(code_of([&] { mean_error({}, {}); }) == Errc::empty_input);
}

TEST_CASE("metric properties") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> bin(0, 23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p, t;
    for (int i = 0; i < 40; ++i) {
      p.push_back(bin(rng));
      t.push_back(trial % 5 == 0 ? p.back() : bin(rng));
    }
    double last = 0;
    for (int n = 1; n <= 47; n += 2) {
      const double h = hit_n(p, t, n);
      CHECK(h >= last);
      last = h;
    }
    CHECK((mean_error(p, t) == 0) == (hit_n(p, t, 1) == 100));
    std::vector<std::size_t> idx(p.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<int> ps, ts;
    for (auto i : idx) {
      ps.push_back(p[i]);
      ts.push_back(t[i]);
    }
    CHECK(hit_n(ps, ts, 3) == hit_n(p, t, 3));
    CHECK(mean_error(ps, ts) == doctest::Approx(mean_error(p, t)));
  }
}

TEST_CASE("experiments are deterministic and thread independent") {
  const auto data = fake_data(600, 1);
  const std::vector<ExperimentCell> grid{
      {InputKind::tile, Encoding::ordinal, ModelKind::ann},
      {InputKind::cell, Encoding::categorical, ModelKind::ann},
      {InputKind::cell, Encoding::categorical, ModelKind::cnn}};
  ExperimentOptions o;
  o.trials = 2;
  o.seed = 3;
  o.train.epochs = 100;
  const auto a = run_experiment(data, grid, o);
  o.threads = 3;
  const auto b = run_experiment(data, grid, o);
  REQUIRE(a.size() == 3);
  std::ostringstream sa, sb;
  write_report_csv(sa, a);
  write_report_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("input,encoding,model,hit3_mean,hit3_std,sigma_mean,sigma_std,trials\n", 0) == 0);
  for (const auto& r : a) {
    CHECK(r.trials == 2);
    INFO(to_string(r.cell.model), to_string(r.cell.input));
    CHECK(r.hit3_mean > 50);
  }

  // A grid cell's seed depends only on that cell.
  const std::vector<ExperimentCell> one{grid[2]};
  o.threads = 1;
  const auto c = run_experiment(data, one, o);
  CHECK(c[0].hit3_mean == a[2].hit3_mean);
  CHECK(c[0].sigma_mean == a[2].sigma_mean);
  CHECK(trial_seed(3, grid[0], 0) != trial_seed(3, grid[0], 1));
  CHECK(trial_seed(3, grid[0], 0) != trial_seed(3, grid[1], 0));
  CHECK(table_grid().size() == 6);
}

TEST_CASE("prepared inputs use training bounds only") {
  const auto data = fake_data(300, 2);
  const auto tile = prepare_inputs(data, InputKind::tile);
  CHECK(tile.train.inputs.cols() == 900);
  CHECK(tile.train.side == 30);
  CHECK(tile.train.size() == 150);
  CHECK(tile.test.size() == 150);
  CHECK(tile.train.inputs.minCoeff() >= 0);
  CHECK(tile.train.inputs.maxCoeff() <= 1);
  const auto cell = prepare_inputs(data, InputKind::cell);
  CHECK(cell.train.side == 5);
  CHECK(cell.ids.size() == 25);
  CHECK(code_of([&] { prepare_inputs(data, InputKind::cell, 6); }) == Errc::not_enough_cells);
}
