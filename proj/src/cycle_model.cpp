#include "cadc/cycle_model.hpp"

#include <vector>

#include "cadc/error.hpp"

namespace cadc {

std::int64_t cnn_macs(int n_p) {
  const std::int64_t pos = static_cast<std::int64_t>(n_p - 2) * (n_p - 2);
  return pos * 9 * kConvFilters + pos * kConvFilters * 24;
}

std::int64_t ann_macs(int inputs, int outputs) {
  return static_cast<std::int64_t>(inputs) * kHiddenWidth +
         kHiddenWidth * kHiddenWidth +
         static_cast<std::int64_t>(kHiddenWidth) * outputs;
}

std::int64_t snn_macs(int n_p, int time_steps) {
  return static_cast<std::int64_t>(time_steps) * cnn_macs(n_p);
}

namespace {

CycleCalibration weighted_fit(std::span<const CyclePoint> points,
                              bool relative) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double w = relative ? 1.0 / (p.cycles * p.cycles) : 1.0;
    sw += w;
    sx += w * p.macs;
    sy += w * p.cycles;
    sxx += w * p.macs * p.macs;
    sxy += w * p.macs * p.cycles;
  }
  const double det = sw * sxx - sx * sx;
  if (points.size() < 2 || det <= 0.0)
    throw Error(Errc::invalid_argument,
                "cycle fit needs at least two distinct sizes");
  CycleCalibration c;
  c.per_mac = (sw * sxy - sx * sy) / det;
  c.overhead = (sy - c.per_mac * sx) / sw;
  return c;
}

}  // namespace

CycleCalibration fit_relative(std::span<const CyclePoint> points) {
  return weighted_fit(points, true);
}

CycleCalibration fit_ordinary(std::span<const CyclePoint> points) {
  return weighted_fit(points, false);
}

DecoderCalibration calibrate_decoders() {
  std::vector<CyclePoint> cnn, ann;
  for (const auto& r : kMeasuredCycles) {
    const int n_in = r.n_p * r.n_p;
    cnn.push_back({static_cast<double>(cnn_macs(r.n_p)),
                   static_cast<double>(r.cnn)});
    ann.push_back({static_cast<double>(ann_macs(n_in, 24)),
                   static_cast<double>(r.ann_cat)});
    ann.push_back({static_cast<double>(ann_macs(n_in, kOrdinalBits)),
                   static_cast<double>(r.ann_ord)});
  }
  DecoderCalibration cal;
  cal.cnn = fit_relative(cnn);
  cal.ann = fit_relative(ann);
  cal.snn.overhead = 0.0;
  cal.snn.per_mac =
      static_cast<double>(kMeasuredSnnCycles) /
      static_cast<double>(snn_macs(kMeasuredSnnSide, kMeasuredSnnSteps));
  return cal;
}

double estimate_cycles(const DecoderCalibration& cal, ModelKind kind, int n_p,
                       Encoding encoding, int time_steps, int inputs) {
  if (n_p < 3) throw Error(Errc::invalid_argument, "input side must be >= 3");
  switch (kind) {
    case ModelKind::cnn:
      return cal.cnn.estimate(static_cast<double>(cnn_macs(n_p)));
    case ModelKind::ann:
      return cal.ann.estimate(static_cast<double>(
          ann_macs(inputs > 0 ? inputs : n_p * n_p, output_width(encoding))));
    case ModelKind::snn:
      return cal.snn.estimate(static_cast<double>(snn_macs(n_p, time_steps)));
  }
  return 0.0;
}

}  // namespace cadc
