// Command-line front end: data generation, allocation, extraction, the
// cycle-level simulator, decoder training and evaluation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cadc/alloc.hpp"
#include "cadc/bench.hpp"
#include "cadc/checkpoint.hpp"
#include "cadc/dataset.hpp"
#include "cadc/error.hpp"
#include "cadc/eval.hpp"
#include "cadc/formats.hpp"
#include "cadc/quantize.hpp"
#include "cadc/snn.hpp"
#include "cadc/synth.hpp"
#include "cadc/systolic.hpp"
#include "cadc/trace.hpp"

namespace {

using namespace cadc;

template <typename... Args>
void log(const char* fmt, Args... args) {
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  return out;
}

DecodingData load_traces(const std::string& session_path,
                         const std::string& contours_path) {
  SessionReader reader(session_path);
  const auto contours = load_contours(contours_path);
  log("extracting %lld frames, %zu cells",
      static_cast<long long>(reader.size()), contours.size());
  return collect_traces([&](std::int64_t t) { return reader.read(t); },
                        reader.size(), reader.positions(), contours,
                        reader.header().dims);
}

ModelKind parse_model(const std::string& s) {
  if (s == "cnn") return ModelKind::cnn;
  if (s == "ann") return ModelKind::ann;
  if (s == "snn") return ModelKind::snn;
  throw Error(Errc::invalid_argument, "unknown model " + s);
}

Encoding parse_encoding(const std::string& s) {
  if (s == "cat") return Encoding::categorical;
  if (s == "ord") return Encoding::ordinal;
  throw Error(Errc::invalid_argument, "unknown encoding " + s);
}

InputKind parse_input(const std::string& s) {
  if (s == "cell") return InputKind::cell;
  if (s == "tile") return InputKind::tile;
  throw Error(Errc::invalid_argument, "unknown input kind " + s);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

// "table" or a comma list of input:encoding:model triples.
std::vector<ExperimentCell> parse_grid(const std::string& s) {
  if (s == "table") return table_grid();
  std::vector<ExperimentCell> grid;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find(':');
    const auto b = item.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw Error(Errc::invalid_argument, "grid entry " + item +
                                              " is not input:encoding:model");
    grid.push_back({parse_input(item.substr(0, a)),
                    parse_encoding(item.substr(a + 1, b - a - 1)),
                    parse_model(item.substr(b + 1))});
  }
  return grid;
}

struct GenArgs {
  GeneratorParams p;
  std::string out, contours_out;
};

void run_gen(const GenArgs& a) {
  log("generating %lld frames with %d cells (seed %llu)",
      static_cast<long long>(a.p.n_frames), a.p.n_cells,
      static_cast<unsigned long long>(a.p.seed));
  const auto contours = write_session(a.p, a.out);
  if (!a.contours_out.empty()) save_contours(a.contours_out, contours);
}

struct AllocArgs {
  std::string mode = "cell", contours, contours_out, out;
  int j = 32, k = 8, rounds = 0, width = 512, height = 512;
  bool segment = false;
  std::uint64_t seed = 0;
};

void run_allocate(const AllocArgs& a) {
  const FrameDims dims{a.width, a.height};
  Allocation alloc;
  std::vector<Contour> contours;
  if (a.mode == "tile") {
    contours = generate_tile_contours(a.width, a.height);
    alloc = map_tiles(contours, a.j, dims);
    attach_scan_plans(alloc, contours, dims);
    if (!a.contours_out.empty()) save_contours(a.contours_out, contours);
  } else if (a.mode == "cell") {
    if (a.contours.empty())
      throw Error(Errc::invalid_argument, "cell mode needs --contours");
    contours = load_contours(a.contours);
    AcceleratorShape shape{a.j, a.k, a.rounds};
    if (shape.rounds == 0) {
      const auto per = static_cast<std::int64_t>(a.j) * a.k;
      shape.rounds = static_cast<int>(
          std::max<std::int64_t>(1, (static_cast<std::int64_t>(contours.size()) + per - 1) / per));
    }
    if (a.segment) {
      alloc = allocate_segmented(contours, shape, dims, a.seed);
    } else {
      alloc = allocate_cells(contours, shape, a.seed);
      attach_scan_plans(alloc, contours, dims);
    }
  } else {
    throw Error(Errc::invalid_argument, "mode must be cell or tile");
  }
  const auto report = validate_allocation(alloc, contours, alloc.shape);
  if (!report.ok())
    throw Error(Errc::conflict_detected, "allocation failed validation");
  save_allocation(a.out, alloc);
  log("%zu contours in %d round(s) of %dx%d, %d repair swaps",
      contours.size(), alloc.shape.rounds, alloc.shape.tes, alloc.shape.slots,
      alloc.swaps);
}

struct ExtractArgs {
  std::string session, contours, out;
};

void run_extract(const ExtractArgs& a) {
  SessionReader reader(a.session);
  const auto contours = load_contours(a.contours);
  const TraceExtractor x(contours, reader.header().dims);
  auto out = open_out(a.out);
  write_trace_csv_header(out, x.ids());
  for (std::int64_t t = 0; t < reader.size(); ++t)
    write_trace_csv_row(out, x.extract(reader.read(t)));
  log("wrote %lld trace vectors", static_cast<long long>(reader.size()));
}

struct SimArgs {
  std::string session, contours, alloc, opt = "none", traces_out, report_out;
  double clock_mhz = 300.0;
  std::int64_t frames = 1;
  int j = 0, k = 0, rounds = 0;
};

void run_simulate(const SimArgs& a) {
  SessionReader reader(a.session);
  const auto contours = load_contours(a.contours);
  const Allocation alloc = load_allocation(a.alloc);
  if ((a.j && a.j != alloc.shape.tes) || (a.k && a.k != alloc.shape.slots) ||
      (a.rounds && a.rounds != alloc.shape.rounds))
    throw Error(Errc::invalid_shape,
                "--j/--k/--rounds disagree with the allocation file");
  SimConfig cfg;
  cfg.shape = alloc.shape;
  cfg.clock_mhz = a.clock_mhz;
  set_optimizations(cfg, a.opt);

  const std::int64_t n =
      a.frames <= 0 ? reader.size() : std::min(a.frames, reader.size());
  std::optional<std::ofstream> traces, report;
  if (!a.traces_out.empty()) traces = open_out(a.traces_out);
  if (!a.report_out.empty()) {
    report = open_out(a.report_out);
    write_report_csv_header(*report);
  }
  SimReport last;
  std::int64_t conflicts = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    SimResult r;
    try {
      r = simulate_frame(reader.read(t), contours, alloc, cfg);
    } catch (const ConflictError& e) {
      ++conflicts;
      log("frame %lld: %s", static_cast<long long>(t), e.what());
      continue;
    }
    if (traces) {
      if (t == 0) write_trace_csv_header(*traces, r.traces.ids);
      write_trace_csv_row(*traces, r.traces);
    }
    if (report) write_report_csv_rows(*report, t, r.report);
    conflicts += r.report.conflicts;
    last = r.report;
  }
  std::printf("frames=%lld rounds=%d opt=%s total_cycles=%lld wall_us=%.1f "
              "conflicts=%lld\n",
              static_cast<long long>(n), alloc.shape.rounds, a.opt.c_str(),
              static_cast<long long>(last.total_cycles), last.wall_us,
              static_cast<long long>(conflicts));
  if (conflicts > 0)
    throw Error(Errc::conflict_detected, "read-port conflicts during simulation");
}

struct TrainArgs {
  std::string session, contours, out, model = "ann", encoding = "ord",
                                        input = "tile";
  int bits = 0, ts = 32, epochs = 100, n_p = 0;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const auto data = load_traces(a.session, a.contours);
  const auto in = prepare_inputs(data, parse_input(a.input), a.n_p);
  TrainParams tp;
  tp.epochs = a.epochs;
  const ModelKind kind = parse_model(a.model);
  const Encoding enc = parse_encoding(a.encoding);
  Model model;
  if (kind == ModelKind::ann) {
    AnnModel m = train_ann(in.train, enc, tp, a.seed);
    model = a.bits > 0 ? quantize(m, a.bits) : m;
  } else {
    if (enc != Encoding::categorical)
      throw Error(Errc::invalid_argument, "CNN and SNN are categorical only");
    CnnModel m = train_cnn(in.train, tp, a.seed);
    if (kind == ModelKind::snn)
      model = convert_to_snn(m, in.train.inputs, a.ts, a.bits);
    else
      model = a.bits > 0 ? quantize(m, a.bits) : m;
  }
  save_model(a.out, model);
  log("trained %s (%s, %s input) on %lld frames", a.model.c_str(),
      a.encoding.c_str(), a.input.c_str(),
      static_cast<long long>(in.train.size()));
}

struct EvalArgs {
  std::string session, contours, checkpoint, input = "tile", grid, out;
  int trials = 5, n_p = 0, epochs = 100, ts = 32, bits = 8, threads = 1;
  std::uint64_t seed = 0;
};

void run_eval(const EvalArgs& a) {
  const auto data = load_traces(a.session, a.contours);
  if (!a.checkpoint.empty()) {
    const Model model = load_model(a.checkpoint);
    const auto in = prepare_inputs(data, parse_input(a.input), a.n_p);
    const auto pred = std::visit(
        [&](const auto& m) { return predict_all(m, in.test); }, model);
    std::printf("model,input,hit1,hit3,sigma,frames\n%s,%s,%.4f,%.4f,%.4f,%lld\n",
                std::string(to_string(kind_of(model))).c_str(), a.input.c_str(),
                hit_n(pred, in.test.labels, 1), hit_n(pred, in.test.labels, 3),
                mean_error(pred, in.test.labels),
                static_cast<long long>(pred.size()));
    return;
  }
  ExperimentOptions opt;
  opt.trials = a.trials;
  opt.seed = a.seed;
  opt.n_p = a.n_p;
  opt.train.epochs = a.epochs;
  opt.time_steps = a.ts;
  opt.bits = a.bits;
  opt.threads = a.threads;
  const auto grid = parse_grid(a.grid.empty() ? "table" : a.grid);
  const auto rows = run_experiment(data, grid, opt);
  if (a.out.empty()) {
    write_report_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out);
    write_report_csv(out, rows);
  }
}

struct BenchArgs {
  int cells = 760, j = 32, k = 0;
  double clock_mhz = 300.0;
  std::uint64_t seed = 1;
};

void run_bench(const BenchArgs& a) {
  BenchParams p;
  p.workload.cells = a.cells;
  p.workload.seed = a.seed;
  p.tes = a.j;
  p.clock_mhz = a.clock_mhz;
  if (a.k > 0) p.slot_options = {a.k};
  const auto r = run_latency_bench(p);
  for (const auto& [k, us] : r.baselines)
    std::printf("# K=%d baseline_us=%.1f\n", k, us);
  std::printf("opt,rounds,total_cycles,wall_us\n");
  for (const auto& row : r.rows)
    std::printf("%s,%d,%lld,%.1f\n", row.label().c_str(), row.rounds,
                static_cast<long long>(row.cycles), row.wall_us);
  std::printf("# K=%d baseline_us=%.1f optimized_us=%.1f speedup=%.2f\n",
              r.slots, r.baseline().wall_us, r.optimized().wall_us,
              r.speedup());
}

struct SweepArgs {
  std::string session, contours, out, bits = "16,8,6,4", ts = "4,8,16,32";
  int seeds = 5, n_p = 0, epochs = 100;
  std::uint64_t seed = 0;
};

void run_sweep_cmd(const SweepArgs& a) {
  const auto data = load_traces(a.session, a.contours);
  const auto in = prepare_inputs(data, InputKind::cell, a.n_p);
  SweepOptions opt;
  opt.bits = parse_int_list(a.bits);
  opt.time_steps = parse_int_list(a.ts);
  opt.seeds = a.seeds;
  opt.seed = a.seed;
  opt.train.epochs = a.epochs;
  const auto rows = run_sweep(in, opt);
  if (a.out.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out);
    write_sweep_csv(out, rows);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calcium trace extraction accelerator and position decoders"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic session");
  g->add_option("--cells", gen.p.n_cells, "Cells with contours");
  g->add_option("--frames", gen.p.n_frames, "Frame count");
  g->add_option("--seed", gen.p.seed, "Random seed");
  g->add_option("--undetected-ratio", gen.p.undetected_ratio, "Dim contour-less cells per cell");
  g->add_option("--noise", gen.p.noise_std, "Background noise std");
  g->add_option("--fov-radius", gen.p.fov_radius, "Radius of the cell disk, px");
  g->add_option("--width", gen.p.dims.width);
  g->add_option("--height", gen.p.dims.height);
  g->add_option("--out", gen.out, "Session file")->required();
  g->add_option("--contours-out", gen.contours_out, "Ground-truth contour file");

  AllocArgs al;
  auto* a = app.add_subcommand("allocate", "Assign contours to tracing elements");
  a->add_option("--mode", al.mode, "cell or tile")->check(CLI::IsMember({"cell", "tile"}));
  a->add_option("--contours", al.contours, "Contour file (cell mode)");
  a->add_option("--contours-out", al.contours_out, "Write generated tile contours");
  a->add_option("--j", al.j, "Tracing elements");
  a->add_option("--k", al.k, "Slots per element (cell mode)");
  a->add_option("--rounds", al.rounds, "Rounds, 0 for the minimum");
  a->add_flag("--segment", al.segment, "Region segmentation by row band");
  a->add_option("--width", al.width);
  a->add_option("--height", al.height);
  a->add_option("--seed", al.seed, "Random seed");
  a->add_option("--out", al.out, "Allocation file")->required();

  ExtractArgs ex;
  auto* e = app.add_subcommand("extract", "Reference trace extraction");
  e->add_option("--session", ex.session)->required();
  e->add_option("--contours", ex.contours)->required();
  e->add_option("--out", ex.out, "Trace CSV")->required();

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Cycle-level accelerator run");
  s->add_option("--session", sim.session)->required();
  s->add_option("--contours", sim.contours)->required();
  s->add_option("--allocation,--alloc", sim.alloc, "Allocation file")->required();
  s->add_option("--j", sim.j, "Expected tracing elements");
  s->add_option("--k", sim.k, "Expected slots per element");
  s->add_option("--rounds", sim.rounds, "Expected rounds");
  s->add_option("--opt", sim.opt, "Subset of region,ff,db or none");
  s->add_option("--clock-mhz", sim.clock_mhz);
  s->add_option("--frames", sim.frames, "Frames to simulate, 0 for all");
  s->add_option("--traces-out", sim.traces_out, "Trace CSV");
  s->add_option("--report", sim.report_out, "Per-round cycle CSV");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a position decoder");
  t->add_option("--session", tr.session)->required();
  t->add_option("--contours", tr.contours)->required();
  t->add_option("--model", tr.model)->check(CLI::IsMember({"cnn", "ann", "snn"}));
  t->add_option("--encoding", tr.encoding)->check(CLI::IsMember({"cat", "ord"}));
  t->add_option("--input", tr.input)->check(CLI::IsMember({"cell", "tile"}));
  t->add_option("--bits", tr.bits, "Weight bits, 0 for float");
  t->add_option("--ts", tr.ts, "SNN time steps");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--n-p", tr.n_p, "Cell grid side, 0 for automatic");
  t->add_option("--seed", tr.seed);
  t->add_option("--out", tr.out, "Checkpoint")->required();

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Score a checkpoint or run an experiment grid");
  v->add_option("--session", ev.session)->required();
  v->add_option("--contours", ev.contours)->required();
  v->add_option("--checkpoint", ev.checkpoint, "Score this model on the test split");
  v->add_option("--input", ev.input)->check(CLI::IsMember({"cell", "tile"}));
  v->add_option("--grid", ev.grid, "table, or input:encoding:model,...");
  v->add_option("--trials", ev.trials);
  v->add_option("--epochs", ev.epochs);
  v->add_option("--n-p", ev.n_p);
  v->add_option("--ts", ev.ts, "SNN time steps");
  v->add_option("--bits", ev.bits, "SNN weight bits");
  v->add_option("--threads", ev.threads);
  v->add_option("--seed", ev.seed);
  v->add_option("--out", ev.out, "Report CSV (default stdout)");

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Latency workload on a 512x512 frame");
  b->add_option("--cells", be.cells);
  b->add_option("--j", be.j);
  b->add_option("--k", be.k, "Slots per element, 0 picks from 4,8,16");
  b->add_option("--clock-mhz", be.clock_mhz);
  b->add_option("--seed", be.seed);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "SNN bit-width and time-step sweep");
  w->add_option("--session", sw.session)->required();
  w->add_option("--contours", sw.contours)->required();
  w->add_option("--bits-list", sw.bits);
  w->add_option("--ts-list", sw.ts);
  w->add_option("--seeds", sw.seeds);
  w->add_option("--epochs", sw.epochs);
  w->add_option("--n-p", sw.n_p);
  w->add_option("--seed", sw.seed);
  w->add_option("--out", sw.out, "Sweep CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*g) run_gen(gen);
    else if (*a) run_allocate(al);
    else if (*e) run_extract(ex);
    else if (*s) run_simulate(sim);
    else if (*t) run_train(tr);
    else if (*v) run_eval(ev);
    else if (*b) run_bench(be);
    else if (*w) run_sweep_cmd(sw);
  } catch (const cadc::Error& err) {
    std::fprintf(stderr, "error: %s: %s\n",
                 std::string(cadc::to_string(err.code())).c_str(), err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
