#include "cadc/systolic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>

#include "cadc/error.hpp"
#include "cadc/trace.hpp"

namespace cadc {

void SimConfig::check() const {
  shape.check();
  if (!(clock_mhz > 0))
    throw Error(Errc::invalid_argument, "clock must be positive");
  if (load_cycles_per_contour < 1 || store_cycles_per_contour < 1)
    throw Error(Errc::invalid_argument, "per-contour cycle costs must be >= 1");
}

void set_optimizations(SimConfig& config, std::string_view list) {
  config.opt_region = config.opt_fastforward = config.opt_doublebuffer = false;
  if (list.empty() || list == "none") return;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto item = list.substr(pos, comma == std::string_view::npos
                                           ? std::string_view::npos
                                           : comma - pos);
    if (item == "region")
      config.opt_region = true;
    else if (item == "ff")
      config.opt_fastforward = true;
    else if (item == "db")
      config.opt_doublebuffer = true;
    else
      throw Error(Errc::invalid_argument,
                  "unknown optimization '" + std::string(item) +
                      "' (expected region, ff, db)");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
}

std::int64_t combine_phases(std::span<const RoundCycles> rounds,
                            bool double_buffer) {
  std::int64_t total = 0;
  if (!double_buffer) {
    for (const auto& r : rounds) total += r.load + r.compute + r.store;
    return total;
  }
  if (rounds.empty()) return 0;
  const std::size_t n = rounds.size();
  total = rounds.front().load + rounds.back().store;
  for (std::size_t r = 0; r < n; ++r) {
    const std::int64_t hidden = (r > 0 ? rounds[r - 1].store : 0) +
                                (r + 1 < n ? rounds[r + 1].load : 0);
    total += std::max(rounds[r].compute, hidden);
  }
  return total;
}

double wall_time_us(std::int64_t cycles, double clock_mhz) {
  return std::round(static_cast<double>(cycles) / clock_mhz * 10.0) / 10.0;
}

namespace {

struct ScanWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // exclusive
};

ScanWindow scan_window(FrameDims dims, const RoundPlan* plan,
                       const SimConfig& config) {
  if (!config.opt_region || plan == nullptr) return {0, dims.pixels()};
  if (plan->bounds.empty()) return {0, 0};
  return {static_cast<std::int64_t>(plan->bounds.first) * dims.width,
          static_cast<std::int64_t>(plan->bounds.last + 1) * dims.width};
}

void check_fits(const Allocation& alloc, const SimConfig& config) {
  const auto& s = config.shape;
  if (alloc.shape.rounds > s.rounds)
    throw Error(Errc::invalid_shape,
                "allocation uses " + std::to_string(alloc.shape.rounds) +
                    " rounds, configuration allows " +
                    std::to_string(s.rounds));
  for (const auto& e : alloc.entries) {
    const auto& w = e.where;
    if (w.round < 0 || w.round >= s.rounds || w.te < 0 || w.te >= s.tes ||
        w.slot < 0 || w.slot >= s.slots)
      throw Error(Errc::invalid_shape,
                  "contour " + std::to_string(e.contour_id) +
                      " assigned outside J=" + std::to_string(s.tes) +
                      " K=" + std::to_string(s.slots));
  }
}

std::vector<std::int64_t> contours_per_round(const Allocation& alloc) {
  std::vector<std::int64_t> n(static_cast<std::size_t>(alloc.shape.rounds), 0);
  for (const auto& e : alloc.entries) ++n[e.where.round];
  return n;
}

const Allocation& with_plans(const Allocation& alloc,
                             std::span<const Contour> contours, FrameDims dims,
                             std::optional<Allocation>& scratch) {
  if (static_cast<int>(alloc.rounds.size()) == alloc.shape.rounds) return alloc;
  scratch = alloc;
  attach_scan_plans(*scratch, contours, dims);
  return *scratch;
}

SimReport finish(std::vector<RoundCycles> rounds, const SimConfig& config) {
  SimReport report;
  for (const auto& r : rounds) report.skipped += r.skipped;
  report.total_cycles = combine_phases(rounds, config.opt_doublebuffer);
  report.wall_us = wall_time_us(report.total_cycles, config.clock_mhz);
  report.rounds = std::move(rounds);
  return report;
}

}  // namespace

SimReport account_cycles(FrameDims dims, const Allocation& alloc,
                         const SimConfig& config) {
  config.check();
  check_fits(alloc, config);
  if ((config.opt_region || config.opt_fastforward) &&
      static_cast<int>(alloc.rounds.size()) != alloc.shape.rounds)
    throw Error(Errc::invalid_argument,
                "allocation has no scan plans; attach them first");

  const auto counts = contours_per_round(alloc);
  std::vector<RoundCycles> rounds;
  for (int r = 0; r < alloc.shape.rounds; ++r) {
    const RoundPlan* plan =
        alloc.rounds.empty() ? nullptr : &alloc.rounds[static_cast<std::size_t>(r)];
    const auto win = scan_window(dims, plan, config);
    RoundCycles rc;
    rc.load = counts[r] * config.load_cycles_per_contour;
    rc.store = counts[r] * config.store_cycles_per_contour;
    if (config.opt_fastforward && plan != nullptr)
      rc.skipped = plan->skips.skipped_within(win.lo, win.hi);
    rc.compute = (win.hi - win.lo) - rc.skipped;
    rounds.push_back(rc);
  }
  return finish(std::move(rounds), config);
}

void TracingElement::clear() {
  for (auto& s : slots_) s = Slot{};
}

void TracingElement::load(int slot, const Contour& contour) {
  auto& s = slots_.at(static_cast<std::size_t>(slot));
  s.used = true;
  s.contour_id = contour.id;
  s.center = contour.center;
  s.window = contour.window;
  s.mask = contour.mask;
  s.acc = 0;
}

void TracingElement::compute(const PixelEvent& e, std::int64_t scan_index,
                             int round, int te_index) {
  int hit = -1;
  for (int k = 0; k < slot_count(); ++k) {
    auto& s = slots_[k];
    if (!s.used) continue;
    const auto off = window_indices(e.r, e.c, s.center, s.window);
    if (!off) continue;
    // Any window hit costs a port read, whether or not the bit is set.
    if (hit >= 0)
      throw ConflictError(round, te_index, slots_[hit].contour_id,
                          s.contour_id, scan_index);
    hit = k;
    if (s.mask[static_cast<std::size_t>(off->dr) * s.window + off->dc])
      s.acc += e.v;
  }
}

SimResult simulate_frame(const Frame& frame, std::span<const Contour> contours,
                         const Allocation& alloc_in, const SimConfig& config) {
  config.check();
  frame.check();
  check_fits(alloc_in, config);
  std::optional<Allocation> scratch;
  const Allocation& alloc = with_plans(alloc_in, contours, frame.dims, scratch);

  std::unordered_map<int, const Contour*> by_id;
  for (const auto& c : contours) {
    c.check();
    by_id.emplace(c.id, &c);
  }
  for (const auto& e : alloc.entries)
    if (!by_id.count(e.contour_id))
      throw Error(Errc::invalid_argument,
                  "allocation names unknown contour " +
                      std::to_string(e.contour_id));

  const int J = config.shape.tes;
  const int width = frame.width();
  std::vector<TracingElement> chain(static_cast<std::size_t>(J),
                                    TracingElement(config.shape.slots));
  std::vector<std::uint64_t> sums(alloc.entries.size(), 0);
  std::vector<RoundCycles> rounds;

  struct Stage {
    bool valid = false;
    PixelEvent pixel;
    std::int64_t index = 0;
  };
  std::vector<Stage> pipe(static_cast<std::size_t>(J));

  for (int r = 0; r < alloc.shape.rounds; ++r) {
    RoundCycles rc;

    // Load: shift contour data into the slots.
    for (auto& te : chain) te.clear();
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < alloc.entries.size(); ++i) {
      const auto& e = alloc.entries[i];
      if (e.where.round != r) continue;
      chain[e.where.te].load(e.where.slot, *by_id.at(e.contour_id));
      members.push_back(i);
      rc.load += config.load_cycles_per_contour;
    }

    // Compute: one pixel enters TE 0 per cycle and moves one TE per cycle.
    const RoundPlan& plan = alloc.rounds[static_cast<std::size_t>(r)];
    const auto win = scan_window(frame.dims, &plan, config);
    const auto& skips = plan.skips.ranges;
    std::size_t next_skip = 0;
    std::int64_t cursor = win.lo;
    const auto advance = [&]() -> std::optional<std::int64_t> {
      while (cursor < win.hi) {
        if (config.opt_fastforward) {
          while (next_skip < skips.size() && skips[next_skip].to <= cursor)
            ++next_skip;
          if (next_skip < skips.size() && skips[next_skip].from <= cursor) {
            const std::int64_t to = std::min(skips[next_skip].to, win.hi);
            rc.skipped += to - cursor;
            cursor = to;
            continue;
          }
        }
        return cursor++;
      }
      return std::nullopt;
    };

    for (auto& s : pipe) s.valid = false;
    while (true) {
      const auto next = advance();
      for (int j = J - 1; j > 0; --j) pipe[j] = pipe[j - 1];
      if (next) {
        const auto idx = *next;
        const int row = static_cast<int>(idx / width);
        const int col = static_cast<int>(idx % width);
        pipe[0] = {true,
                   {frame.at(row, col), static_cast<std::uint16_t>(row),
                    static_cast<std::uint16_t>(col)},
                   idx};
        ++rc.compute;
      } else {
        pipe[0].valid = false;
      }
      // The drain after the last pixel overlaps the store shift-out and is
      // not counted as compute.
      bool busy = false;
      for (int j = 0; j < J; ++j) {
        if (!pipe[j].valid) continue;
        chain[j].compute(pipe[j].pixel, pipe[j].index, r, j);
        busy = true;
      }
      if (!busy) break;
    }

    // Store: shift the accumulators out.
    for (std::size_t i : members) {
      const auto& w = alloc.entries[i].where;
      sums[i] = chain[w.te].accumulator(w.slot);
      rc.store += config.store_cycles_per_contour;
    }
    rounds.push_back(rc);
  }

  SimResult result;
  result.traces.frame = frame.index;
  for (std::size_t i = 0; i < alloc.entries.size(); ++i) {
    result.traces.ids.push_back(alloc.entries[i].contour_id);
    result.traces.values.push_back(
        checked_trace(sums[i], alloc.entries[i].contour_id));
  }
  result.report = finish(std::move(rounds), config);
  return result;
}

}  // namespace cadc
