#include "cadc/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <vector>

#include "cadc/error.hpp"
#include "cadc/formats.hpp"
#include "cadc/quantize.hpp"

namespace cadc {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "CADC1";

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_layer(std::string& out, const Layer& l) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.bits));
  put<double>(out, l.scale);
  if (l.bits == 0) {
    for (Eigen::Index i = 0; i < l.w.size(); ++i)
      put<double>(out, l.w.data()[i]);
  } else {
    for (auto c : l.codes) put<std::int16_t>(out, static_cast<std::int16_t>(c));
  }
  for (Eigen::Index i = 0; i < l.b.size(); ++i) put<double>(out, l.b(i));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size())
      throw CorruptFileError(pos_, std::string("truncated ") + what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }
  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw CorruptFileError(pos_, "truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kMaxDim = 1u << 20;

Layer get_layer(Reader& in) {
  const std::size_t at = in.pos();
  const auto rows = in.get<std::uint32_t>("layer rows");
  const auto cols = in.get<std::uint32_t>("layer cols");
  if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim)
    throw CorruptFileError(at, "implausible layer shape");
  const std::size_t bits_at = in.pos();
  const auto bits = in.get<std::uint32_t>("bit width");
  if (bits == 1 || bits > 16)
    throw CorruptFileError(bits_at, "bit width out of range");
  const std::size_t scale_at = in.pos();
  const double scale = in.get<double>("scale");
  if (!std::isfinite(scale) || scale < 0.0 || (bits > 0 && scale == 0.0))
    throw CorruptFileError(scale_at, "bad layer scale");

  Layer l(static_cast<int>(rows), static_cast<int>(cols));
  l.bits = static_cast<int>(bits);
  l.scale = scale;
  const auto n = static_cast<std::size_t>(rows) * cols;
  if (bits == 0) {
    for (std::size_t i = 0; i < n; ++i)
      l.w.data()[i] = static_cast<float>(in.get<double>("weights"));
  } else {
    const int top = max_code(static_cast<int>(bits));
    l.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t code_at = in.pos();
      const auto code = in.get<std::int16_t>("weight codes");
      if (code > top || code < -top)
        throw CorruptFileError(code_at, "weight code exceeds bit width");
      l.codes[i] = code;
      l.w.data()[i] = dequantize(code, scale, static_cast<int>(bits));
    }
  }
  for (std::uint32_t i = 0; i < rows; ++i)
    l.b(i) = static_cast<float>(in.get<double>("biases"));
  return l;
}

int side_from_features(const Layer& conv, const Layer& fc, std::size_t at) {
  if (conv.rows() != kConvFilters || conv.cols() != 9)
    throw CorruptFileError(at, "conv layer must be 6x9");
  const int per = fc.cols() / kConvFilters;
  const int out = static_cast<int>(std::lround(std::sqrt(per)));
  if (per * kConvFilters != fc.cols() || out * out != per || out < 1)
    throw CorruptFileError(at, "dense layer width does not match a square grid");
  return out + 2;
}

}  // namespace

ModelKind kind_of(const Model& m) {
  return static_cast<ModelKind>(m.index() + 1);
}

std::string serialize_model(const Model& m) {
  std::string out(kMagic);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(kind_of(m)));
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, AnnModel>) {
          put<std::uint32_t>(out, 3);
          put_layer(out, model.hidden1);
          put_layer(out, model.hidden2);
          put_layer(out, model.out);
        } else {
          put<std::uint32_t>(out, 2);
          put_layer(out, model.conv);
          put_layer(out, model.fc);
          if constexpr (std::is_same_v<T, SnnModel>) {
            for (double t : model.thresholds) put<double>(out, t);
            put<std::uint32_t>(out, static_cast<std::uint32_t>(model.time_steps));
          }
        }
      },
      m);
  return out;
}

Model deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < kMagic.size() || in.take(kMagic.size()) != kMagic)
    throw CorruptFileError(0, "not a model checkpoint");
  const std::size_t kind_at = in.pos();
  const auto kind = in.get<std::uint8_t>("kind");
  if (kind < 1 || kind > 3) throw CorruptFileError(kind_at, "unknown model kind");
  const std::size_t count_at = in.pos();
  const auto layers = in.get<std::uint32_t>("layer count");
  const std::uint32_t expected = kind == 2 ? 3 : 2;
  if (layers != expected)
    throw CorruptFileError(count_at, "wrong layer count for model kind");

  Model result;
  if (kind == 2) {
    AnnModel m;
    const std::size_t at = in.pos();
    m.hidden1 = get_layer(in);
    m.hidden2 = get_layer(in);
    m.out = get_layer(in);
    if (m.hidden1.rows() != kHiddenWidth || m.hidden2.rows() != kHiddenWidth ||
        m.hidden2.cols() != kHiddenWidth || m.out.cols() != kHiddenWidth)
      throw CorruptFileError(at, "ANN hidden layers must be 32 wide");
    m.encoding = m.out.rows() == kOrdinalBits ? Encoding::ordinal
                                              : Encoding::categorical;
    result = std::move(m);
  } else {
    const std::size_t at = in.pos();
    Layer conv = get_layer(in);
    Layer fc = get_layer(in);
    const int side = side_from_features(conv, fc, at);
    if (kind == 1) {
      result = CnnModel{side, std::move(conv), std::move(fc)};
    } else {
      SnnModel s;
      s.side = side;
      s.conv = std::move(conv);
      s.fc = std::move(fc);
      for (auto& t : s.thresholds) {
        const std::size_t t_at = in.pos();
        t = in.get<double>("threshold");
        if (!(t > 0.0) || !std::isfinite(t))
          throw CorruptFileError(t_at, "threshold must be positive");
      }
      const std::size_t ts_at = in.pos();
      const auto ts = in.get<std::uint32_t>("time steps");
      if (ts < 1 || ts > (1u << 24))
        throw CorruptFileError(ts_at, "time steps out of range");
      s.time_steps = static_cast<int>(ts);
      result = std::move(s);
    }
  }
  if (!in.done()) throw CorruptFileError(in.pos(), "trailing bytes");
  return result;
}

void save_model(const std::filesystem::path& path, const Model& m) {
  write_file(path, serialize_model(m));
}

Model load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace cadc
