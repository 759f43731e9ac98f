#include "cadc/alloc.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "cadc/error.hpp"

namespace cadc {

void AcceleratorShape::check() const {
  if (tes < 1 || slots < 1 || rounds < 1)
    throw Error(Errc::invalid_shape,
                "accelerator shape needs J, K, rounds >= 1 (got J=" +
                    std::to_string(tes) + " K=" + std::to_string(slots) +
                    " rounds=" + std::to_string(rounds) + ")");
}

std::int64_t FastForwardTable::skipped_within(std::int64_t lo,
                                              std::int64_t hi) const {
  std::int64_t n = 0;
  for (const auto& r : ranges) {
    const std::int64_t a = std::max(lo, r.from);
    const std::int64_t b = std::min(hi, r.to);
    if (b > a) n += b - a;
  }
  return n;
}

std::int64_t FastForwardTable::total() const {
  std::int64_t n = 0;
  for (const auto& r : ranges) n += r.length();
  return n;
}

namespace {

// Slot table for the repair loop. TE t = round * J + j.
class SlotGrid {
 public:
  SlotGrid(std::span<const Contour> contours, const AcceleratorShape& shape)
      : contours_(contours),
        shape_(shape),
        te_count_(shape.tes * shape.rounds),
        occupant_(static_cast<std::size_t>(te_count_) * shape.slots, -1),
        where_(contours.size()) {}

  int te_count() const { return te_count_; }
  int slots() const { return shape_.slots; }

  void place(int contour, int te, int slot) {
    occupant_[index(te, slot)] = contour;
    where_[contour] = {te, slot};
  }
  int occupant(int te, int slot) const { return occupant_[index(te, slot)]; }
  std::pair<int, int> where(int contour) const { return where_[contour]; }

  // Does `contour` overlap anything in `te`, ignoring `skip_slot`?
  bool conflicts(int contour, int te, int skip_slot) const {
    const Contour& c = contours_[contour];
    for (int k = 0; k < shape_.slots; ++k) {
      if (k == skip_slot) continue;
      const int other = occupant(te, k);
      if (other < 0 || other == contour) continue;
      if (windows_overlap(c, contours_[other])) return true;
    }
    return false;
  }

  void swap_slots(int te_a, int slot_a, int te_b, int slot_b) {
    const int a = occupant(te_a, slot_a);
    const int b = occupant(te_b, slot_b);
    occupant_[index(te_a, slot_a)] = b;
    occupant_[index(te_b, slot_b)] = a;
    if (a >= 0) where_[a] = {te_b, slot_b};
    if (b >= 0) where_[b] = {te_a, slot_a};
  }

 private:
  std::size_t index(int te, int slot) const {
    return static_cast<std::size_t>(te) * shape_.slots + slot;
  }

  std::span<const Contour> contours_;
  AcceleratorShape shape_;
  int te_count_;
  std::vector<int> occupant_;
  std::vector<std::pair<int, int>> where_;
};

std::vector<const Contour*> round_members(const Allocation& alloc,
                                          std::span<const Contour> contours,
                                          int round) {
  std::unordered_map<int, const Contour*> by_id;
  for (const auto& c : contours) by_id.emplace(c.id, &c);
  std::vector<const Contour*> out;
  for (const auto& e : alloc.entries) {
    if (e.where.round != round) continue;
    auto it = by_id.find(e.contour_id);
    if (it != by_id.end()) out.push_back(it->second);
  }
  return out;
}

RowSpan hull_rows(std::span<const Contour* const> members, FrameDims dims) {
  RowSpan hull;
  for (const Contour* c : members) {
    const RowSpan s = window_rows(*c, dims);
    if (s.empty()) continue;
    if (hull.empty()) {
      hull = s;
    } else {
      hull.first = std::min(hull.first, s.first);
      hull.last = std::max(hull.last, s.last);
    }
  }
  return hull;
}

FastForwardTable fast_forward_from(std::span<const Contour* const> members,
                                   FrameDims dims, RowSpan rows,
                                   int min_skip) {
  FastForwardTable table;
  rows.first = std::max(rows.first, 0);
  rows.last = std::min(rows.last, dims.height - 1);
  if (rows.empty()) return table;

  const std::int64_t w = dims.width;
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(dims.pixels()),
                                    0);
  for (const Contour* c : members) {
    const int half = c->window / 2;
    const int r0 = std::max(0, c->center.row - half);
    const int r1 = std::min(dims.height - 1, c->center.row + half);
    const int c0 = std::max(0, c->center.col - half);
    const int c1 = std::min(dims.width - 1, c->center.col + half);
    if (r0 > r1 || c0 > c1) continue;
    for (int r = r0; r <= r1; ++r)
      std::fill_n(covered.begin() + r * w + c0, c1 - c0 + 1, 1);
  }

  const std::int64_t lo = rows.first * w;
  const std::int64_t hi = (rows.last + 1) * w;
  std::int64_t i = lo;
  while (i < hi) {
    if (covered[i]) {
      ++i;
      continue;
    }
    std::int64_t j = i;
    while (j < hi && !covered[j]) ++j;
    if (j - i >= min_skip) table.ranges.push_back({i, j});
    i = j;
  }
  return table;
}

}  // namespace

Allocation allocate_cells(std::span<const Contour> contours,
                          const AcceleratorShape& shape, std::uint64_t seed,
                          int max_attempts) {
  shape.check();
  const auto n = static_cast<std::int64_t>(contours.size());
  if (n > shape.capacity())
    throw Error(Errc::invalid_shape,
                std::to_string(n) + " contours exceed capacity " +
                    std::to_string(shape.capacity()) + " (J*K*rounds)");

  SlotGrid grid(contours, shape);
  const std::int64_t per_round = shape.per_round();
  for (std::int64_t q = 0; q < n; ++q) {
    const int round = static_cast<int>(q / per_round);
    const int p = static_cast<int>(q % per_round);
    grid.place(static_cast<int>(q), round * shape.tes + p % shape.tes,
               p / shape.tes);
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_te(0, std::max(0, grid.te_count() - 2));
  std::uniform_int_distribution<int> pick_slot(0, shape.slots - 1);

  int swaps = 0;
  for (int x = 0; x < n; ++x) {
    auto [te, slot] = grid.where(x);
    if (!grid.conflicts(x, te, slot)) continue;

    // solve_conflict: random partner from another TE, accept when neither
    // side overlaps its new neighbours.
    bool solved = false;
    for (int attempt = 0; attempt < max_attempts && grid.te_count() > 1;
         ++attempt) {
      int other_te = pick_te(rng);
      if (other_te >= te) ++other_te;
      const int other_slot = pick_slot(rng);
      const int y = grid.occupant(other_te, other_slot);
      if (grid.conflicts(x, other_te, other_slot)) continue;
      if (y >= 0 && grid.conflicts(y, te, slot)) continue;
      grid.swap_slots(te, slot, other_te, other_slot);
      ++swaps;
      solved = true;
      break;
    }
    if (!solved)
      throw Error(Errc::allocation_infeasible,
                  "no conflict-free swap for contour " +
                      std::to_string(contours[x].id) + " after " +
                      std::to_string(max_attempts) +
                      " attempts; contour density too high for J=" +
                      std::to_string(shape.tes) +
                      " K=" + std::to_string(shape.slots));
  }

  Allocation alloc;
  alloc.shape = shape;
  alloc.swaps = swaps;
  alloc.entries.reserve(contours.size());
  for (int x = 0; x < n; ++x) {
    const auto [te, slot] = grid.where(x);
    alloc.entries.push_back(
        {contours[x].id, SlotRef{te / shape.tes, te % shape.tes, slot}});
  }
  return alloc;
}

std::vector<Contour> generate_tile_contours(int width, int height, int tile,
                                            int window) {
  if (tile <= 0 || width <= 0 || height <= 0 || width % tile != 0 ||
      height % tile != 0)
    throw Error(Errc::invalid_geometry,
                "frame " + std::to_string(width) + "x" +
                    std::to_string(height) + " is not divisible into " +
                    std::to_string(tile) + "-pixel tiles");
  if (window < tile || window % 2 == 0)
    throw Error(Errc::invalid_geometry,
                "tile window must be odd and at least the tile size");

  // Window index dr = r - R + window/2 with R = tile_row*tile + tile/2, so
  // the tile's first row lands at window/2 - tile/2.
  const int offset = window / 2 - tile / 2;
  const int rows = height / tile;
  const int cols = width / tile;
  std::vector<Contour> tiles;
  tiles.reserve(static_cast<std::size_t>(rows) * cols);
  for (int tr = 0; tr < rows; ++tr) {
    for (int tc = 0; tc < cols; ++tc) {
      Contour c(tr * cols + tc, {tr * tile + tile / 2, tc * tile + tile / 2},
                window, ContourKind::tile);
      for (int dr = offset; dr < offset + tile; ++dr)
        for (int dc = offset; dc < offset + tile; ++dc) c.set(dr, dc);
      tiles.push_back(std::move(c));
    }
  }
  return tiles;
}

Allocation map_tiles(std::span<const Contour> tiles, int tes, FrameDims dims) {
  if (tes < 3)
    throw Error(Errc::invalid_shape, "tile mapping needs J >= 3");

  std::set<int> row_set, col_set;
  for (const auto& t : tiles) {
    row_set.insert(t.center.row);
    col_set.insert(t.center.col);
  }
  const std::vector<int> rows(row_set.begin(), row_set.end());
  const std::vector<int> cols(col_set.begin(), col_set.end());
  const auto rank = [](const std::vector<int>& v, int x) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) -
                            v.begin());
  };

  std::vector<int> order(tiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = tiles[a].center;
    const auto& cb = tiles[b].center;
    return std::tie(ca.row, ca.col) < std::tie(cb.row, cb.col);
  });

  std::vector<int> fill(tes, 0);
  std::vector<SlotRef> where(tiles.size());
  for (int i : order) {
    const int tr = rank(rows, tiles[i].center.row);
    const int tc = rank(cols, tiles[i].center.col);
    const int j = (tc + 2 * tr) % tes;
    where[i] = {0, j, fill[j]++};
  }

  Allocation alloc;
  alloc.shape = {tes, std::max(1, *std::max_element(fill.begin(), fill.end())),
                 1};
  for (std::size_t i = 0; i < tiles.size(); ++i)
    alloc.entries.push_back({tiles[i].id, where[i]});
  attach_scan_plans(alloc, tiles, dims);

  const auto report = validate_allocation(alloc, tiles, alloc.shape);
  if (!report.ok()) {
    const auto& p = report.overlaps.empty() ? OverlapPair{} : report.overlaps[0];
    throw Error(Errc::conflict_detected,
                "tile mapping produced " +
                    std::to_string(report.overlaps.size()) +
                    " overlapping pairs (first: " + std::to_string(p.first_id) +
                    ", " + std::to_string(p.second_id) + ")");
  }
  return alloc;
}

RegionSegmentation segment_regions(std::span<const Contour> contours,
                                   const AcceleratorShape& shape,
                                   FrameDims dims) {
  shape.check();
  const int n = static_cast<int>(contours.size());
  if (n > shape.capacity())
    throw Error(Errc::allocation_infeasible,
                std::to_string(n) + " contours cannot fit " +
                    std::to_string(shape.rounds) + " rounds of " +
                    std::to_string(shape.per_round()));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = contours[a];
    const auto& cb = contours[b];
    return std::tie(ca.center.row, ca.center.col, ca.id) <
           std::tie(cb.center.row, cb.center.col, cb.id);
  });
  const auto row_of = [&](int pos) { return contours[order[pos]].center.row; };
  const auto cap = static_cast<int>(
      std::min<std::int64_t>(shape.per_round(), std::numeric_limits<int>::max()));

  RegionSegmentation seg;
  int start = 0;
  for (int g = 0; g < shape.rounds && start < n; ++g) {
    const int groups_left = shape.rounds - g;
    const int left = n - start;
    const int target = (left + groups_left - 1) / groups_left;
    int end = start + target;
    if (g == shape.rounds - 1 || end >= n) {
      end = n;
    } else {
      // Prefer a split between rows: the nearer of the enclosing row's
      // start or end, as long as the band stays within capacity and
      // the remaining contours still fit in the remaining rounds.
      int back = end;
      while (back > start && row_of(back - 1) == row_of(back)) --back;
      int fwd = end;
      while (fwd < n && row_of(fwd) == row_of(fwd - 1)) ++fwd;
      const auto viable = [&](int e) {
        return e > start && e - start <= cap &&
               n - e <= static_cast<std::int64_t>(groups_left - 1) * cap;
      };
      const bool back_ok = viable(back);
      const bool fwd_ok = viable(fwd);
      if (back_ok && fwd_ok)
        end = (end - back <= fwd - end) ? back : fwd;
      else if (back_ok)
        end = back;
      else if (fwd_ok)
        end = fwd;
    }
    if (end - start > cap)
      throw Error(Errc::allocation_infeasible,
                  "row band " + std::to_string(g) + " holds " +
                      std::to_string(end - start) + " contours, capacity " +
                      std::to_string(cap));
    std::vector<int> group(order.begin() + start, order.begin() + end);
    std::vector<const Contour*> members;
    for (int i : group) members.push_back(&contours[i]);
    seg.bounds.push_back(hull_rows(members, dims));
    seg.groups.push_back(std::move(group));
    start = end;
  }
  return seg;
}

FastForwardTable build_fast_forward_table(std::span<const Contour> contours,
                                          FrameDims dims, RowSpan rows,
                                          int min_skip) {
  std::vector<const Contour*> members;
  for (const auto& c : contours) members.push_back(&c);
  return fast_forward_from(members, dims, rows, min_skip);
}

FastForwardTable build_fast_forward_table(std::span<const Contour> contours,
                                          FrameDims dims, int min_skip) {
  return build_fast_forward_table(contours, dims, RowSpan{0, dims.height - 1},
                                  min_skip);
}

void attach_scan_plans(Allocation& alloc, std::span<const Contour> contours,
                       FrameDims dims, int min_skip) {
  alloc.rounds.clear();
  for (int r = 0; r < alloc.shape.rounds; ++r) {
    const auto members = round_members(alloc, contours, r);
    RoundPlan plan;
    plan.bounds = hull_rows(members, dims);
    plan.skips = fast_forward_from(members, dims, RowSpan{0, dims.height - 1},
                                   min_skip);
    alloc.rounds.push_back(std::move(plan));
  }
}

Allocation allocate_segmented(std::span<const Contour> contours,
                              const AcceleratorShape& shape, FrameDims dims,
                              std::uint64_t seed, int max_attempts,
                              int min_skip) {
  const auto seg = segment_regions(contours, shape, dims);
  Allocation alloc;
  alloc.shape = shape;
  alloc.shape.rounds = std::max<int>(1, static_cast<int>(seg.groups.size()));
  std::vector<Assignment> by_index(contours.size());
  for (std::size_t g = 0; g < seg.groups.size(); ++g) {
    std::vector<Contour> band;
    for (int i : seg.groups[g]) band.push_back(contours[i]);
    const auto part = allocate_cells(band, {shape.tes, shape.slots, 1},
                                     seed + g, max_attempts);
    alloc.swaps += part.swaps;
    for (std::size_t b = 0; b < band.size(); ++b) {
      Assignment a = part.entries[b];
      a.where.round = static_cast<int>(g);
      by_index[seg.groups[g][b]] = a;
    }
  }
  alloc.entries = std::move(by_index);
  attach_scan_plans(alloc, contours, dims, min_skip);
  return alloc;
}

ValidationReport validate_allocation(const Allocation& alloc,
                                     std::span<const Contour> contours,
                                     const AcceleratorShape& shape) {
  ValidationReport report;
  if (static_cast<std::int64_t>(contours.size()) > shape.capacity())
    report.capacity.push_back(
        {-1, std::to_string(contours.size()) + " contours exceed J*K*rounds=" +
                 std::to_string(shape.capacity())});

  std::unordered_map<int, const Contour*> by_id;
  for (const auto& c : contours) by_id.emplace(c.id, &c);

  std::map<SlotRef, int> used;
  std::set<int> seen;
  std::map<std::pair<int, int>, std::vector<const Contour*>> per_te;
  for (const auto& e : alloc.entries) {
    const auto& w = e.where;
    auto it = by_id.find(e.contour_id);
    if (it == by_id.end()) {
      report.capacity.push_back({e.contour_id, "unknown contour id"});
      continue;
    }
    if (!seen.insert(e.contour_id).second)
      report.capacity.push_back({e.contour_id, "contour assigned twice"});
    if (w.round < 0 || w.round >= shape.rounds || w.te < 0 ||
        w.te >= shape.tes || w.slot < 0 || w.slot >= shape.slots) {
      report.capacity.push_back(
          {e.contour_id, "slot (" + std::to_string(w.round) + "," +
                             std::to_string(w.te) + "," +
                             std::to_string(w.slot) + ") outside the shape"});
      continue;
    }
    auto [slot_it, fresh] = used.emplace(w, e.contour_id);
    if (!fresh)
      report.capacity.push_back(
          {e.contour_id,
           "slot shared with contour " + std::to_string(slot_it->second)});
    per_te[{w.round, w.te}].push_back(it->second);
  }
  for (const auto& c : contours)
    if (!seen.count(c.id))
      report.capacity.push_back({c.id, "contour not allocated"});

  for (const auto& [key, members] : per_te) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (windows_overlap(*members[a], *members[b]))
          report.overlaps.push_back({SlotRef{key.first, key.second, 0},
                                     members[a]->id, members[b]->id});
  }
  return report;
}

}  // namespace cadc
