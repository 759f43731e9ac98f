#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "cadc/core.hpp"
#include "cadc/error.hpp"

namespace cadc::testing {

inline Frame random_frame(FrameDims dims, std::mt19937_64& rng,
                          std::int64_t index = 0) {
  Frame f(dims, index);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(v(rng));
  return f;
}

/// Random mask with at least one bit; `density` in (0, 1].
inline Contour random_contour(int id, Center c, int n_c, std::mt19937_64& rng,
                              double density = 0.5) {
  Contour out(id, c, n_c);
  std::bernoulli_distribution bit(density);
  for (auto& m : out.mask) m = bit(rng) ? 1 : 0;
  out.mask[static_cast<std::size_t>(n_c / 2) * n_c + n_c / 2] = 1;
  return out;
}

inline Contour full_contour(int id, Center c, int n_c,
                            ContourKind kind = ContourKind::cell) {
  Contour out(id, c, n_c, kind);
  for (auto& m : out.mask) m = 1;
  return out;
}

/// Direct Eq. (1) by looping over each contour's window, never over the
/// frame: an oracle independent of window_indices.
inline std::vector<std::uint64_t> window_sums(const Frame& f,
                                              const std::vector<Contour>& cs) {
  std::vector<std::uint64_t> out;
  for (const auto& c : cs) {
    std::uint64_t s = 0;
    const int h = c.window / 2;
    for (int dr = 0; dr < c.window; ++dr)
      for (int dc = 0; dc < c.window; ++dc) {
        const int r = c.center.row - h + dr;
        const int col = c.center.col - h + dc;
        if (r < 0 || col < 0 || r >= f.height() || col >= f.width()) continue;
        if (c.bit(dr, dc)) s += f.at(r, col);
      }
    out.push_back(s);
  }
  return out;
}

/// Code of the Error thrown by `f`; empty when nothing is thrown.
inline std::optional<Errc> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace cadc::testing
