#include "cadc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "cadc/error.hpp"
#include "cadc/snn.hpp"

namespace cadc {

namespace {

void check_pairs(std::span<const int> p, std::span<const int> t) {
  if (p.size() != t.size())
    throw Error(Errc::invalid_argument, "prediction and truth lengths differ");
  if (p.empty()) throw Error(Errc::empty_input, "no predictions to score");
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Score {
  double hit1 = 0, hit3 = 0, sigma = 0;
};

Score run_trial(const PreparedInputs& in, const ExperimentCell& cell,
                const ExperimentOptions& opt, std::uint64_t seed) {
  std::vector<int> pred;
  switch (cell.model) {
    case ModelKind::ann:
      pred = predict_all(train_ann(in.train, cell.encoding, opt.train, seed),
                         in.test);
      break;
    case ModelKind::cnn:
    case ModelKind::snn: {
      if (cell.encoding != Encoding::categorical)
        throw Error(Errc::invalid_argument,
                    "CNN and SNN decoders are categorical only");
      const CnnModel cnn = train_cnn(in.train, opt.train, seed);
      if (cell.model == ModelKind::cnn) {
        pred = predict_all(cnn, in.test);
      } else {
        pred = predict_all(
            convert_to_snn(cnn, in.train.inputs, opt.time_steps, opt.bits),
            in.test);
      }
      break;
    }
  }
  return {hit_n(pred, in.test.labels, 1), hit_n(pred, in.test.labels, 3),
          mean_error(pred, in.test.labels)};
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

double hit_n(std::span<const int> predictions, std::span<const int> truths,
             int n) {
  if (n < 1 || n % 2 == 0)
    throw Error(Errc::invalid_argument,
                "Hit-N needs an odd N, got " + std::to_string(n));
  check_pairs(predictions, truths);
  const int reach = (n - 1) / 2;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (std::abs(predictions[i] - truths[i]) <= reach) ++hits;
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(predictions.size());
}

double mean_error(std::span<const int> predictions,
                  std::span<const int> truths) {
  check_pairs(predictions, truths);
  double sum = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += std::abs(predictions[i] - truths[i]);
  return sum / static_cast<double>(predictions.size());
}

std::uint64_t trial_seed(std::uint64_t master, const ExperimentCell& cell,
                         int trial) {
  const std::uint64_t tag = (static_cast<std::uint64_t>(cell.input) << 16) |
                            (static_cast<std::uint64_t>(cell.encoding) << 8) |
                            static_cast<std::uint64_t>(cell.model);
  return splitmix(splitmix(master ^ splitmix(tag)) +
                  static_cast<std::uint64_t>(trial));
}

std::vector<ExperimentRow> run_experiment(
    const DecodingData& data, std::span<const ExperimentCell> grid,
    const ExperimentOptions& options) {
  if (options.trials < 1)
    throw Error(Errc::invalid_argument, "need at least one trial");
  std::map<InputKind, PreparedInputs> inputs;
  for (const auto& c : grid)
    if (!inputs.count(c.input))
      inputs.emplace(c.input, prepare_inputs(data, c.input, options.n_p));

  const std::size_t tasks = grid.size() * static_cast<std::size_t>(options.trials);
  std::vector<Score> scores(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::mutex m;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(m);
        if (next >= tasks) return;
        k = next++;
      }
      const auto& cell = grid[k / static_cast<std::size_t>(options.trials)];
      const int trial = static_cast<int>(k % static_cast<std::size_t>(options.trials));
      try {
        scores[k] = run_trial(inputs.at(cell.input), cell, options,
                              trial_seed(options.seed, cell, trial));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, options.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ExperimentRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> h1, h3, sg;
    for (int t = 0; t < options.trials; ++t) {
      const auto& s = scores[g * static_cast<std::size_t>(options.trials) + t];
      h1.push_back(s.hit1);
      h3.push_back(s.hit3);
      sg.push_back(s.sigma);
    }
    ExperimentRow r;
    r.cell = grid[g];
    r.trials = options.trials;
    double unused;
    mean_std(h1, r.hit1_mean, unused);
    mean_std(h3, r.hit3_mean, r.hit3_std);
    mean_std(sg, r.sigma_mean, r.sigma_std);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ExperimentCell> table_grid() {
  return {
      {InputKind::cell, Encoding::categorical, ModelKind::cnn},
      {InputKind::cell, Encoding::categorical, ModelKind::ann},
      {InputKind::cell, Encoding::ordinal, ModelKind::ann},
      {InputKind::tile, Encoding::categorical, ModelKind::cnn},
      {InputKind::tile, Encoding::categorical, ModelKind::ann},
      {InputKind::tile, Encoding::ordinal, ModelKind::ann},
  };
}

void write_report_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  out << "input,encoding,model,hit3_mean,hit3_std,sigma_mean,sigma_std,trials\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f,%d", r.hit3_mean,
                  r.hit3_std, r.sigma_mean, r.sigma_std, r.trials);
    out << to_string(r.cell.input) << ',' << to_string(r.cell.encoding) << ','
        << to_string(r.cell.model) << ',' << buf << '\n';
  }
}

std::vector<SweepRow> run_sweep(const PreparedInputs& inputs,
                                const SweepOptions& options) {
  if (options.seeds < 1)
    throw Error(Errc::invalid_argument, "need at least one seed");
  std::vector<SweepRow> rows;
  rows.push_back({ModelKind::cnn, 0, 0, 0, 0, options.seeds});
  for (int b : options.bits)
    rows.push_back({ModelKind::snn, b, options.steps_for_bits, 0, 0, options.seeds});
  for (int t : options.time_steps)
    rows.push_back({ModelKind::snn, options.bits_for_steps, t, 0, 0, options.seeds});

  const auto& truth = inputs.test.labels;
  const ExperimentCell tag{InputKind::cell, Encoding::categorical, ModelKind::snn};
  for (int s = 0; s < options.seeds; ++s) {
    const CnnModel cnn =
        train_cnn(inputs.train, options.train, trial_seed(options.seed, tag, s));
    for (auto& row : rows) {
      const auto pred =
          row.model == ModelKind::cnn
              ? predict_all(cnn, inputs.test)
              : predict_all(convert_to_snn(cnn, inputs.train.inputs,
                                           row.time_steps, row.bits),
                            inputs.test);
      row.hit1_mean += hit_n(pred, truth, 1) / options.seeds;
      row.hit3_mean += hit_n(pred, truth, 3) / options.seeds;
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "model,bits,time_steps,hit1_mean,hit3_mean,seeds\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.4f,%.4f,%d", r.bits, r.time_steps,
                  r.hit1_mean, r.hit3_mean, r.seeds);
    out << to_string(r.model) << ',' << buf << '\n';
  }
}

}  // namespace cadc
