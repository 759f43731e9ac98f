#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cadc/decoder_input.hpp"
#include "cadc/error.hpp"
#include "cadc/nn.hpp"
#include "cadc/ordinal.hpp"
#include "cadc/quantize.hpp"
#include "cadc/snn.hpp"
#include "helpers.hpp"

using namespace cadc;
using namespace cadc::testing;

namespace {

std::vector<float> bits_to_outputs(const std::string& bits) {
  std::vector<float> out;
  for (char ch : bits) out.push_back(ch == '1' ? 0.9f : 0.1f);
  return out;
}

TraceTable peak_table(const std::vector<std::uint16_t>& peaks) {
  TraceTable t;
  for (std::size_t i = 0; i < peaks.size(); ++i) t.ids.push_back(static_cast<int>(i) + 100);
  // Two frames: zeros, then the peaks.
  t.values.assign(peaks.size(), 0);
  t.values.insert(t.values.end(), peaks.begin(), peaks.end());
  return t;
}

Layer random_layer(int rows, int cols, std::mt19937_64& rng, float range = 1) {
  Layer l(rows, cols);
  std::uniform_real_distribution<float> u(-range, range);
  for (Eigen::Index i = 0; i < l.w.size(); ++i) l.w.data()[i] = u(rng);
  for (int i = 0; i < rows; ++i) l.b(i) = u(rng);
  return l;
}

std::vector<float> random_input(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<float> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("ordinal code examples") {
  CHECK(to_string(encode_ordinal(0)) == "100000000000");
  CHECK(to_string(encode_ordinal(11)) == "111111111111");
  CHECK(to_string(encode_ordinal(12)) == "011111111111");
  CHECK(to_string(encode_ordinal(23)) == "000000000000");
  CHECK(decode_ordinal(bits_to_outputs("111000000000")).bin == 2);
  CHECK(decode_ordinal(bits_to_outputs("011111111111")).bin == 12);
  // Threshold is inclusive at 0.5.
  std::vector<float> half(12, 0.0f);
  half[0] = 0.5f;
  CHECK(decode_ordinal(half).bin == 0);
}

TEST_CASE("ordinal round trip over every bin") {
  for (int b = 0; b < 24; ++b) {
    const auto code = encode_ordinal(b);
    CHECK(decode_ordinal_bits(code) == b);
    std::vector<float> out(code.begin(), code.end());
    CHECK(decode_ordinal(out).bin == b);
  }
}

TEST_CASE("ordinal decode stays in range for arbitrary bit patterns") {
  for (int pattern = 0; pattern < 4096; ++pattern) {
    OrdinalCode code{};
    for (int i = 0; i < 12; ++i) code[i] = (pattern >> (11 - i)) & 1;
    const int b = decode_ordinal_bits(code);
    CHECK((b >= 0 && b <= 23));
  }
}

TEST_CASE("categorical inference") {
  std::vector<float> onehot(24, 0.0f);
  onehot[7] = 1.0f;
  CHECK(infer_categorical(onehot).bin == 7);
  CHECK(infer_categorical(std::vector<float>(24, 0.3f)).bin == 0);
  std::vector<float> inc(24);
  for (int i = 0; i < 24; ++i) inc[i] = static_cast<float>(i);
  CHECK(infer_categorical(inc).bin == 23);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto v = random_input(24, rng);
    const int bin = infer_categorical(v).bin;
    std::vector<float> mapped;
    for (float x : v) mapped.push_back(std::exp(3 * x) - 7);
    CHECK(infer_categorical(mapped).bin == bin);
  }
}

TEST_CASE("cell selection") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> peak(1, 60000);
  for (auto [cells, n_p] : {std::pair{296, 16}, std::pair{760, 27}}) {
    std::vector<std::uint16_t> peaks;
    for (int i = 0; i < cells; ++i) peaks.push_back(static_cast<std::uint16_t>(peak(rng)));
    const auto t = peak_table(peaks);
    const auto ids = select_cells(t, {0, 2}, n_p);
    REQUIRE(ids.size() == static_cast<std::size_t>(n_p * n_p));
    // Oracle: sort (peak desc, id asc) directly.
    std::vector<std::pair<int, int>> order;
    for (int i = 0; i < cells; ++i) order.push_back({-peaks[i], i + 100});
    std::sort(order.begin(), order.end());
    for (int i = 0; i < n_p * n_p; ++i) CHECK(ids[i] == order[i].second);
  }
  CHECK(grid_side_for(296) == 17);
  CHECK(grid_side_for(760) == 27);
  CHECK(grid_side_for(3) == 1);

  const auto same = peak_table(std::vector<std::uint16_t>(100, 500));
  const auto ids = select_cells(same, {0, 2}, 10);
  for (int i = 0; i < 100; ++i) CHECK(ids[i] == 100 + i);

  CHECK(code_of([&] { select_cells(same, {0, 2}, 11); }) == Errc::not_enough_cells);
}

TEST_CASE("input normalization and layout") {
  CHECK(normalize_trace(10, 10, 20) == 0.0f);
  CHECK(normalize_trace(20, 10, 20) == 1.0f);
  CHECK(normalize_trace(15, 10, 20) == doctest::Approx(0.5));
  CHECK(normalize_trace(99, 10, 20) == 1.0f);
  CHECK(normalize_trace(3, 10, 20) == 0.0f);
  CHECK(normalize_trace(7, 7, 7) == 0.0f);

  TraceTable t;
  t.ids = {5, 6, 7, 8};
  t.values = {0, 10, 100, 4, 10, 30, 200, 4, 50, 20, 300, 4};
  const std::vector<std::size_t> cols{2, 0, 1, 3};
  const auto b = normalization_bounds(t, {0, 2}, cols);
  CHECK(b.lo == std::vector<float>{100, 0, 10, 4});
  CHECK(b.hi == std::vector<float>{200, 10, 30, 4});
  const auto in = build_input(t.row(2), cols, b, 2);
  CHECK(in.side == 2);
  CHECK(in.grid == std::vector<float>{1, 1, 0.5f, 0});

  std::vector<int> tiles(32 * 32);
  for (int i = 0; i < 32 * 32; ++i) tiles[i] = i;
  const auto inner = central_tiles(tiles, 32, 32);
  REQUIRE(inner.size() == 900);
  CHECK(inner.front() == 33);
  CHECK(inner[29] == 62);
  CHECK(inner[30] == 65);
  CHECK(inner.back() == 30 * 32 + 30);
}

TEST_CASE("toy training reaches full accuracy") {
  Dataset d;
  d.inputs.resize(40, 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> noise(0, 0.2f);
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    d.labels.push_back(label);
    for (int j = 0; j < 4; ++j)
      d.inputs(i, j) = (j < 2) == (label == 0) ? 0.8f + noise(rng) : noise(rng);
  }
  TrainParams p;
  p.epochs = 200;
  p.bins = 2;
  const auto ann = train_ann(d, Encoding::categorical, p, 1);
  CHECK(predict_all(ann, d) == d.labels);

  // Same classes on a 3x3 grid for the CNN.
  Dataset g;
  g.side = 3;
  g.labels = d.labels;
  g.inputs = RowMatrix::Zero(40, 9);
  g.inputs.leftCols(4) = d.inputs;
  const auto cnn = train_cnn(g, p, 1);
  CHECK(cnn.fc.rows() == 2);
  CHECK(predict_all(cnn, g) == g.labels);
}

TEST_CASE("training is bitwise deterministic") {
  Dataset d;
  d.side = 5;
  d.inputs.resize(60, 25);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> u(0, 1);
  for (int i = 0; i < 60; ++i) {
    d.labels.push_back(i % 24);
    for (int j = 0; j < 25; ++j) d.inputs(i, j) = u(rng);
  }
  TrainParams p;
  p.epochs = 5;
  CHECK(train_ann(d, Encoding::ordinal, p, 4) == train_ann(d, Encoding::ordinal, p, 4));
  CHECK(train_cnn(d, p, 4) == train_cnn(d, p, 4));
  CHECK_FALSE(train_cnn(d, p, 4) == train_cnn(d, p, 5));
  const auto ord = train_ann(d, Encoding::ordinal, p, 4);
  CHECK(ord.out.rows() == 12);
  CHECK(ord.hidden1.rows() == 32);
  CHECK(ord.hidden2.rows() == 32);

  TrainParams wild = p;
  wild.learning_rate = 1e30f;
  CHECK(code_of([&] { train_ann(d, Encoding::categorical, wild, 1); }) ==
        Errc::diverged_training);
  Dataset empty;
  empty.inputs.resize(0, 4);
  CHECK(code_of([&] { train_ann(empty, Encoding::categorical, p, 1); }) ==
        Errc::empty_input);
}

TEST_CASE("integrate-and-fire neuron") {
  IafNeuron n;
  int spikes = 0;
  for (int t = 0; t < 8; ++t) spikes += n.step(0.4);
  CHECK(spikes == 3);
  CHECK(n.potential == doctest::Approx(0.2));
}

TEST_CASE("snn inference") {
  std::mt19937_64 rng(11);
  CnnModel cnn{8, random_layer(6, 9, rng), random_layer(24, 6 * 36, rng, 0.3f)};
  RowMatrix calib(50, 64);
  for (int i = 0; i < 50; ++i) {
    const auto v = random_input(64, rng);
    for (int j = 0; j < 64; ++j) calib(i, j) = v[j];
  }
  auto snn = convert_to_snn(cnn, calib, 32);
  CHECK(snn.time_steps == 32);
  CHECK(snn.bits() == 0);

  const std::vector<float> zero(64, 0.0f);
  SnnModel silent = snn;
  silent.conv.b.setZero();
  silent.fc.b.setZero();
  const auto c0 = run_snn(silent, zero);
  CHECK(std::all_of(c0.hidden.begin(), c0.hidden.end(), [](int c) { return c == 0; }));
  CHECK(std::all_of(c0.output.begin(), c0.output.end(), [](int c) { return c == 0; }));
  CHECK(infer_snn(silent, zero).bin == 0);

  for (int i = 0; i < 20; ++i) {
    const auto c = run_snn(snn, random_input(64, rng));
    for (int v : c.hidden) CHECK((v >= 0 && v <= 32));
    for (int v : c.output) CHECK((v >= 0 && v <= 32));
  }

  snn.time_steps = 256;
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    const auto in = random_input(64, rng);
    agree += infer_snn(snn, in).bin == predict(cnn, in).bin;
  }
  CHECK(agree >= 90);
}

TEST_CASE("identity calibration leaves weights unchanged") {
  // One input pixel at 1 drives every filter to exactly 1 at one position;
  // the fc layer then also peaks at 1.
  CnnModel cnn;
  cnn.side = 3;
  cnn.conv = Layer(6, 9);
  cnn.conv.w.col(4).setOnes();
  cnn.fc = Layer(24, 6);
  cnn.fc.w.setConstant(1.0f / 6);
  RowMatrix calib = RowMatrix::Zero(3, 9);
  calib.col(4).setOnes();
  const auto snn = convert_to_snn(cnn, calib, 16);
  CHECK(snn.conv.w.isApprox(cnn.conv.w));
  CHECK(snn.fc.w.isApprox(cnn.fc.w));
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3);
  CHECK(percentile({0, 10}, 99.9) == doctest::Approx(9.99));
}

TEST_CASE("quantization") {
  std::mt19937_64 rng(12);
  const Layer l = random_layer(20, 30, rng);
  const Layer q = quantize(l, 16);
  CHECK(q.bits == 16);
  CHECK((q.w - l.w).cwiseAbs().maxCoeff() <= std::ldexp(1.0f, -15));
  CHECK(q.b == l.b);
  for (Eigen::Index i = 0; i < q.w.size(); ++i)
    CHECK(q.w.data()[i] == dequantize(q.codes[i], q.scale, 16));

  const Layer zero(4, 4);
  CHECK(quantize(zero, 8).w == zero.w);

  const Layer q4 = quantize(l, 4);
  for (auto code : q4.codes) CHECK(std::abs(code) <= 7);

  CHECK(code_of([&] { quantize(l, 1); }) == Errc::invalid_argument);
  CHECK(code_of([&] { quantize(l, 17); }) == Errc::invalid_argument);

  CnnModel cnn{10, random_layer(6, 9, rng), random_layer(24, 6 * 64, rng)};
  const auto q16 = quantize(cnn, 16);
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_input(100, rng);
    same += predict(cnn, in).bin == predict(q16, in).bin;
  }
  CHECK(same == 1000);
}
