#include "cadc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "cadc/error.hpp"

namespace cadc {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::cnn: return "cnn";
    case ModelKind::ann: return "ann";
    case ModelKind::snn: return "snn";
  }
  return "?";
}

std::string_view to_string(Encoding e) {
  return e == Encoding::categorical ? "cat" : "ord";
}

std::string_view to_string(InputKind i) {
  return i == InputKind::cell ? "cell" : "tile";
}

int output_width(Encoding e, int bins) {
  return e == Encoding::ordinal ? kOrdinalBits : bins;
}

namespace {

using Eigen::VectorXf;

void glorot(Layer& layer, int fan_in, int fan_out, std::mt19937_64& rng) {
  const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  std::uniform_real_distribution<float> u(-limit, limit);
  for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = u(rng);
  layer.b.setZero();
}

struct Velocity {
  RowMatrix w;
  VectorXf b;
  explicit Velocity(const Layer& l)
      : w(RowMatrix::Zero(l.w.rows(), l.w.cols())),
        b(VectorXf::Zero(l.b.size())) {}
};

void sgd_step(Layer& layer, Velocity& v, const RowMatrix& gw,
              const VectorXf& gb, const TrainParams& p) {
  v.w = p.momentum * v.w - p.learning_rate * gw;
  v.b = p.momentum * v.b - p.learning_rate * gb;
  layer.w += v.w;
  layer.b += v.b;
}

RowMatrix affine(const RowMatrix& x, const Layer& l) {
  RowMatrix z = x * l.w.transpose();
  z.rowwise() += l.b.transpose();
  return z;
}

// Loss and output gradient (already divided by the batch size).
float output_loss(const RowMatrix& logits, std::span<const int> labels,
                  Encoding enc, RowMatrix& grad) {
  const auto n = logits.rows();
  grad.resize(n, logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (enc == Encoding::categorical) {
      const float m = logits.row(i).maxCoeff();
      Eigen::RowVectorXf e = (logits.row(i).array() - m).exp().matrix();
      const float sum = e.sum();
      e /= sum;
      loss -= std::log(std::max(e(label), 1e-30f));
      grad.row(i) = e;
      grad(i, label) -= 1.0f;
    } else {
      const auto code = encode_ordinal(label);
      for (Eigen::Index k = 0; k < logits.cols(); ++k) {
        const float z = logits(i, k);
        const float s = 1.0f / (1.0f + std::exp(-z));
        const float t = code[static_cast<std::size_t>(k)];
        // log(1 + e^-|z|) form keeps large logits finite.
        loss += std::max(z, 0.0f) - z * t + std::log1p(std::exp(-std::abs(z)));
        grad(i, k) = s - t;
      }
    }
  }
  grad /= static_cast<float>(n);
  return static_cast<float>(loss / static_cast<double>(n));
}

void check_finite(float loss, int epoch) {
  if (!std::isfinite(loss))
    throw Error(Errc::diverged_training,
                "training loss became non-finite at epoch " +
                    std::to_string(epoch));
}

void check_data(const Dataset& data, int bins) {
  if (data.size() == 0)
    throw Error(Errc::empty_input, "training set is empty");
  if (static_cast<std::int64_t>(data.labels.size()) != data.size())
    throw Error(Errc::invalid_argument, "labels do not match samples");
  for (int l : data.labels)
    if (l < 0 || l >= bins)
      throw Error(Errc::invalid_argument,
                  "label " + std::to_string(l) + " outside the output range");
}

RowMatrix gather_rows(const RowMatrix& m, std::span<const int> rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

// im2col for valid 3x3 convolution: one row per (sample, output position).
RowMatrix patches(const RowMatrix& x, int side) {
  const int out = side - 2;
  const int per = out * out;
  RowMatrix p(x.rows() * per, 9);
  for (Eigen::Index s = 0; s < x.rows(); ++s)
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < out; ++j) {
        const Eigen::Index row = s * per + i * out + j;
        for (int di = 0; di < 3; ++di)
          for (int dj = 0; dj < 3; ++dj)
            p(row, di * 3 + dj) = x(s, (i + di) * side + (j + dj));
      }
  return p;
}

}  // namespace

VectorXf CnnModel::features(std::span<const float> input) const {
  if (static_cast<int>(input.size()) != side * side)
    throw Error(Errc::invalid_argument, "CNN input size mismatch");
  const int out = side - 2;
  const int per = out * out;
  VectorXf f(kConvFilters * per);
  for (int i = 0; i < out; ++i)
    for (int j = 0; j < out; ++j) {
      float patch[9];
      for (int di = 0; di < 3; ++di)
        for (int dj = 0; dj < 3; ++dj)
          patch[di * 3 + dj] = input[(i + di) * side + (j + dj)];
      for (int k = 0; k < kConvFilters; ++k) {
        float z = conv.b(k);
        for (int q = 0; q < 9; ++q) z += conv.w(k, q) * patch[q];
        f(k * per + i * out + j) = std::max(z, 0.0f);
      }
    }
  return f;
}

VectorXf CnnModel::forward(std::span<const float> input) const {
  return fc.w * features(input) + fc.b;
}

VectorXf AnnModel::forward(std::span<const float> input) const {
  if (static_cast<int>(input.size()) != inputs())
    throw Error(Errc::invalid_argument, "ANN input size mismatch");
  const Eigen::Map<const VectorXf> x(input.data(),
                                     static_cast<Eigen::Index>(input.size()));
  const VectorXf h1 = (hidden1.w * x + hidden1.b).cwiseMax(0.0f);
  const VectorXf h2 = (hidden2.w * h1 + hidden2.b).cwiseMax(0.0f);
  VectorXf z = out.w * h2 + out.b;
  if (encoding == Encoding::ordinal)
    z = (1.0f + (-z.array()).exp()).inverse().matrix();
  return z;
}

AnnModel train_ann(const Dataset& data, Encoding encoding,
                   const TrainParams& params, std::uint64_t seed) {
  const int outputs = output_width(encoding, params.bins);
  check_data(data, encoding == Encoding::ordinal ? 24 : params.bins);
  const int in = static_cast<int>(data.inputs.cols());

  std::mt19937_64 rng(seed);
  AnnModel m;
  m.encoding = encoding;
  m.hidden1 = Layer(kHiddenWidth, in);
  m.hidden2 = Layer(kHiddenWidth, kHiddenWidth);
  m.out = Layer(outputs, kHiddenWidth);
  glorot(m.hidden1, in, kHiddenWidth, rng);
  glorot(m.hidden2, kHiddenWidth, kHiddenWidth, rng);
  glorot(m.out, kHiddenWidth, outputs, rng);
  Velocity v1(m.hidden1), v2(m.hidden2), v3(m.out);

  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  RowMatrix grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(params.batch));
      const std::span<const int> idx(order.data() + start, end - start);
      std::vector<int> labels;
      for (int i : idx) labels.push_back(data.labels[i]);

      const RowMatrix x = gather_rows(data.inputs, idx);
      const RowMatrix z1 = affine(x, m.hidden1);
      const RowMatrix h1 = z1.cwiseMax(0.0f);
      const RowMatrix z2 = affine(h1, m.hidden2);
      const RowMatrix h2 = z2.cwiseMax(0.0f);
      const RowMatrix z3 = affine(h2, m.out);
      const float loss = output_loss(z3, labels, encoding, grad);
      check_finite(loss, epoch);
      epoch_loss += loss;
      ++batches;

      const RowMatrix gw3 = grad.transpose() * h2;
      const VectorXf gb3 = grad.colwise().sum().transpose();
      RowMatrix d2 = grad * m.out.w;
      d2 = d2.cwiseProduct((z2.array() > 0.0f).cast<float>().matrix());
      const RowMatrix gw2 = d2.transpose() * h1;
      const VectorXf gb2 = d2.colwise().sum().transpose();
      RowMatrix d1 = d2 * m.hidden2.w;
      d1 = d1.cwiseProduct((z1.array() > 0.0f).cast<float>().matrix());
      const RowMatrix gw1 = d1.transpose() * x;
      const VectorXf gb1 = d1.colwise().sum().transpose();

      sgd_step(m.out, v3, gw3, gb3, params);
      sgd_step(m.hidden2, v2, gw2, gb2, params);
      sgd_step(m.hidden1, v1, gw1, gb1, params);
    }
    check_finite(static_cast<float>(epoch_loss / std::max(batches, 1)), epoch);
  }
  return m;
}

CnnModel train_cnn(const Dataset& data, const TrainParams& params,
                   std::uint64_t seed) {
  check_data(data, params.bins);
  const int side = data.side;
  if (side < 3 || data.inputs.cols() != side * side)
    throw Error(Errc::invalid_argument, "CNN needs square inputs of side >= 3");

  std::mt19937_64 rng(seed);
  CnnModel m;
  m.side = side;
  m.conv = Layer(kConvFilters, 9);
  m.fc = Layer(params.bins, m.features());
  glorot(m.conv, 9, kConvFilters * 9, rng);
  glorot(m.fc, m.features(), params.bins, rng);
  Velocity vc(m.conv), vf(m.fc);

  const int per = m.positions();
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  RowMatrix grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(params.batch));
      const std::span<const int> idx(order.data() + start, end - start);
      const auto n = static_cast<Eigen::Index>(idx.size());
      std::vector<int> labels;
      for (int i : idx) labels.push_back(data.labels[i]);

      const RowMatrix p = patches(gather_rows(data.inputs, idx), side);
      const RowMatrix conv = affine(p, m.conv);  // (n*per) x 6
      RowMatrix feat(n, m.features());
      for (Eigen::Index s = 0; s < n; ++s)
        for (int k = 0; k < kConvFilters; ++k)
          for (int q = 0; q < per; ++q)
            feat(s, k * per + q) = std::max(conv(s * per + q, k), 0.0f);
      const RowMatrix logits = affine(feat, m.fc);
      const float loss =
          output_loss(logits, labels, Encoding::categorical, grad);
      check_finite(loss, epoch);
      epoch_loss += loss;
      ++batches;

      const RowMatrix gwf = grad.transpose() * feat;
      const VectorXf gbf = grad.colwise().sum().transpose();
      const RowMatrix dfeat = grad * m.fc.w;
      RowMatrix dconv(n * per, kConvFilters);
      for (Eigen::Index s = 0; s < n; ++s)
        for (int k = 0; k < kConvFilters; ++k)
          for (int q = 0; q < per; ++q)
            dconv(s * per + q, k) =
                conv(s * per + q, k) > 0.0f ? dfeat(s, k * per + q) : 0.0f;
      const RowMatrix gwc = dconv.transpose() * p;
      const VectorXf gbc = dconv.colwise().sum().transpose();

      sgd_step(m.fc, vf, gwf, gbf, params);
      sgd_step(m.conv, vc, gwc, gbc, params);
    }
    check_finite(static_cast<float>(epoch_loss / std::max(batches, 1)), epoch);
  }
  return m;
}

PositionPrediction predict(const AnnModel& model, std::span<const float> input) {
  const VectorXf out = model.forward(input);
  const std::span<const float> s(out.data(), static_cast<std::size_t>(out.size()));
  return model.encoding == Encoding::ordinal ? decode_ordinal(s)
                                             : infer_categorical(s);
}

PositionPrediction predict(const CnnModel& model, std::span<const float> input) {
  const VectorXf out = model.forward(input);
  return infer_categorical(
      std::span<const float>(out.data(), static_cast<std::size_t>(out.size())));
}

namespace {
template <typename Model>
std::vector<int> predict_rows(const Model& model, const Dataset& data) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  std::vector<float> row(static_cast<std::size_t>(data.inputs.cols()));
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c)
      row[static_cast<std::size_t>(c)] = data.inputs(i, c);
    out.push_back(predict(model, row).bin);
  }
  return out;
}
}  // namespace

std::vector<int> predict_all(const AnnModel& model, const Dataset& data) {
  return predict_rows(model, data);
}

std::vector<int> predict_all(const CnnModel& model, const Dataset& data) {
  return predict_rows(model, data);
}

}  // namespace cadc
