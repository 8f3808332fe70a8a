// Copyright 2026 The bootlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"
#include "family.hpp"
#include "lattice.hpp"
#include "site.hpp"

namespace bootlab {

namespace detail {

// 64 bits of a row starting at column `start`; columns outside [0, width)
// read as zero. The row's tail bits must already be clear.
inline std::uint64_t row_bits(std::span<const std::uint64_t> row, std::int64_t width,
                              std::int64_t start) {
  if (start >= width || start <= -64) return 0;
  if (start < 0) return row[0] << (-start);
  const auto w = static_cast<std::size_t>(start / 64);
  const auto b = static_cast<unsigned>(start % 64);
  std::uint64_t v = row[w] >> b;
  if (b != 0 && w + 1 < row.size()) v |= row[w + 1] << (64 - b);
  return v;
}

// dst[c] = src[c + dx], wrapping modulo width on the torus and reading zeros
// outside the window otherwise.
inline void shift_row(std::span<const std::uint64_t> src, std::span<std::uint64_t> dst,
                      std::int64_t width, std::int64_t dx, bool wrap) {
  if (wrap) {
    dx = ((dx % width) + width) % width;
    for (std::size_t w = 0; w < dst.size(); ++w) {
      const std::int64_t s = static_cast<std::int64_t>(w) * 64 + dx;
      std::uint64_t v = 0;
      for (std::int64_t k = s; k > -64; k -= width) v |= row_bits(src, width, k);
      dst[w] = v;
    }
  } else {
    for (std::size_t w = 0; w < dst.size(); ++w)
      dst[w] = row_bits(src, width, static_cast<std::int64_t>(w) * 64 + dx);
  }
  const std::int64_t rem = width % 64;
  if (rem != 0 && !dst.empty()) dst.back() &= (std::uint64_t{1} << rem) - 1;
}

// Mask M with M[x] = state[x + offset].
inline LatticeState shifted(const LatticeState& state, Site offset) {
  const Geometry& g = state.geometry();
  LatticeState out(g);
  const std::int64_t h = g.height();
  for (std::int64_t r = 0; r < h; ++r) {
    std::int64_t src = r + offset.y;
    if (g.is_torus()) {
      src = ((src % h) + h) % h;
    } else if (src < 0 || src >= h) {
      continue;
    }
    shift_row(state.row_words(src), out.row_words(r), g.width(), offset.x, g.is_torus());
  }
  return out;
}

}  // namespace detail

// One synchronous update: A_{t+1} = A_t plus every x with x + X in A_t for
// some rule X. Computed with whole-row word operations on shifted masks.
inline LatticeState step(const LatticeState& state, const UpdateFamily& family) {
  LatticeState next = state;
  for (const auto& rule : family.rules()) {
    LatticeState acc(state.geometry());
    acc.fill();
    for (const Site& s : rule.offsets()) {
      LatticeState m = detail::shifted(state, s);
      for (std::int64_t r = 0; r < state.geometry().height(); ++r) {
        auto a = acc.row_words(r);
        auto b = m.row_words(r);
        for (std::size_t w = 0; w < a.size(); ++w) a[w] &= b[w];
      }
    }
    next |= acc;
  }
  return next;
}

// Work-queue closure engine over a byte grid. Windows get a blocked border
// as thick as the family reach so rule lookups need no bounds checks; the
// torus wraps explicitly near its seams. The buffer can be refilled and
// re-run, which is how the Monte Carlo code reuses it across trials.
class ClosureKernel {
 public:
  static constexpr std::uint8_t kHealthy = 0;
  static constexpr std::uint8_t kInfected = 1;
  static constexpr std::uint8_t kBlocked = 2;

  ClosureKernel(const UpdateFamily& family, const Geometry& geometry)
      : geometry_(geometry), torus_(geometry.is_torus()) {
    width_ = geometry.width();
    height_ = geometry.height();
    pad_ = torus_ ? 0 : family.reach();
    stride_ = width_ + 2 * pad_;
    const std::int64_t rows = height_ + 2 * pad_;
    if (stride_ * rows >= std::numeric_limits<std::uint32_t>::max()) {
      throw BudgetExceeded("closure grid too large");
    }
    cells_.assign(static_cast<std::size_t>(stride_ * rows), torus_ ? kHealthy : kBlocked);
    clear();

    for (const auto& rule : family.rules()) {
      rule_begin_.push_back(offsets_.size());
      for (const Site& s : rule.offsets()) offsets_.push_back(s);
    }
    rule_begin_.push_back(offsets_.size());
    for (const Site& s : offsets_) deltas_.push_back(s.y * stride_ + s.x);
    candidates_ = family.distinct_offsets();
    for (const Site& s : candidates_) candidate_deltas_.push_back(-(s.y * stride_ + s.x));
  }

  const Geometry& geometry() const { return geometry_; }

  // Marks every site of the geometry healthy.
  void clear() {
    for (std::int64_t y = 0; y < height_; ++y) {
      std::uint8_t* row = cells_.data() + index_raw(0, y);
      std::fill(row, row + width_, kHealthy);
    }
  }

  std::size_t index(Site s) const {
    const Box& b = geometry_.box();
    if (torus_) s = geometry_.wrap(s);
    return index_raw(s.x - b.x_min, s.y - b.y_min);
  }

  // Geometry-relative coordinates (0..width-1, 0..height-1).
  std::size_t index_raw(std::int64_t cx, std::int64_t cy) const {
    return static_cast<std::size_t>((cy + pad_) * stride_ + cx + pad_);
  }

  void infect(Site s) { cells_[index(s)] = kInfected; }
  bool infected(Site s) const {
    if (!torus_ && !geometry_.contains(s)) return false;
    return cells_[index(s)] == kInfected;
  }
  std::uint8_t* row(std::int64_t cy) { return cells_.data() + index_raw(0, cy); }
  const std::uint8_t* row(std::int64_t cy) const { return cells_.data() + index_raw(0, cy); }

  void import_state(const LatticeState& state) {
    clear();
    for (const Site& s : state.sites()) infect(s);
  }

  LatticeState export_state() const {
    LatticeState out(geometry_);
    for (std::int64_t y = 0; y < height_; ++y) {
      auto words = out.row_words(y);
      const std::uint8_t* r = row(y);
      for (std::int64_t x = 0; x < width_; ++x)
        if (r[x] == kInfected) words[static_cast<std::size_t>(x / 64)] |= std::uint64_t{1} << (x % 64);
    }
    return out;
  }

  std::int64_t count() const {
    std::int64_t c = 0;
    for (std::int64_t y = 0; y < height_; ++y) {
      const std::uint8_t* r = row(y);
      for (std::int64_t x = 0; x < width_; ++x) c += (r[x] == kInfected);
    }
    return c;
  }

  // Runs the closure in place. One row-major sweep tests every healthy site
  // against the current state; each site infected from then on re-queues the
  // sites whose rules can see it.
  void run() {
    queue_.clear();
    for (std::int64_t y = 0; y < height_; ++y) {
      for (std::int64_t x = 0; x < width_; ++x) {
        const std::size_t j = index_raw(x, y);
        if (cells_[j] != kHealthy) continue;
        if (torus_ ? fires_torus(j, x, y) : fires_linear(j)) {
          cells_[j] = kInfected;
          push_candidates(j, x, y);
        }
      }
    }
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::size_t i = queue_[head];
      if (cells_[i] != kHealthy) continue;
      if (torus_) {
        const auto x = static_cast<std::int64_t>(i % static_cast<std::size_t>(stride_));
        const auto y = static_cast<std::int64_t>(i / static_cast<std::size_t>(stride_));
        if (!fires_torus(i, x, y)) continue;
        cells_[i] = kInfected;
        push_candidates(i, x, y);
      } else {
        if (!fires_linear(i)) continue;
        cells_[i] = kInfected;
        push_linear(i);
      }
    }
  }

 private:
  bool fires_linear(std::size_t i) const {
    for (std::size_t r = 0; r + 1 < rule_begin_.size(); ++r) {
      bool ok = true;
      for (std::size_t k = rule_begin_[r]; k < rule_begin_[r + 1]; ++k) {
        if (cells_[static_cast<std::size_t>(static_cast<std::int64_t>(i) + deltas_[k])] != kInfected) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  }

  bool interior(std::int64_t x, std::int64_t y) const {
    const std::int64_t m = reach_torus();
    return x >= m && x < width_ - m && y >= m && y < height_ - m;
  }

  std::int64_t reach_torus() const {
    if (torus_reach_ < 0) {
      std::int64_t r = 0;
      for (const Site& s : offsets_) r = std::max({r, std::abs(s.x), std::abs(s.y)});
      torus_reach_ = r;
    }
    return torus_reach_;
  }

  std::size_t wrapped(std::int64_t x, std::int64_t y) const {
    x %= width_;
    if (x < 0) x += width_;
    y %= height_;
    if (y < 0) y += height_;
    return static_cast<std::size_t>(y * stride_ + x);
  }

  bool fires_torus(std::size_t i, std::int64_t x, std::int64_t y) const {
    if (interior(x, y)) return fires_linear(i);
    for (std::size_t r = 0; r + 1 < rule_begin_.size(); ++r) {
      bool ok = true;
      for (std::size_t k = rule_begin_[r]; k < rule_begin_[r + 1]; ++k) {
        if (cells_[wrapped(x + offsets_[k].x, y + offsets_[k].y)] != kInfected) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  }

  void push_linear(std::size_t j) {
    for (std::int64_t d : candidate_deltas_) {
      const auto c = static_cast<std::size_t>(static_cast<std::int64_t>(j) + d);
      if (cells_[c] == kHealthy) queue_.push_back(static_cast<std::uint32_t>(c));
    }
  }

  // j is the buffer index of geometry-relative (x, y).
  void push_candidates(std::size_t j, std::int64_t x, std::int64_t y) {
    if (!torus_ || interior(x, y)) {
      push_linear(j);
      return;
    }
    for (const Site& s : candidates_) {
      const std::size_t c = wrapped(x - s.x, y - s.y);
      if (cells_[c] == kHealthy) queue_.push_back(static_cast<std::uint32_t>(c));
    }
  }

  Geometry geometry_;
  bool torus_;
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::int64_t pad_ = 0;
  std::int64_t stride_ = 0;
  mutable std::int64_t torus_reach_ = -1;
  std::vector<std::uint8_t> cells_;
  std::vector<Site> offsets_;
  std::vector<std::size_t> rule_begin_;
  std::vector<std::int64_t> deltas_;
  std::vector<Site> candidates_;
  std::vector<std::int64_t> candidate_deltas_;
  std::vector<std::uint32_t> queue_;
};

// Least fixed point of `step` containing `state`.
inline LatticeState closure(const LatticeState& state, const UpdateFamily& family) {
  ClosureKernel kernel(family, state.geometry());
  kernel.import_state(state);
  kernel.run();
  return kernel.export_state();
}

// Closure of finitely many sites inside a window.
template <typename Range>
LatticeState closure_in_window(const Range& sites, const UpdateFamily& family, const Box& window) {
  return closure(LatticeState(Geometry::window(window), sites), family);
}

// True iff the torus closure of the seed set is all of Z_n^2.
template <typename Range>
bool percolates(const Range& seeds, const UpdateFamily& family, std::int64_t n) {
  ClosureKernel kernel(family, Geometry::torus(n));
  for (const Site& s : seeds) {
    if (s.x < 0 || s.x >= n || s.y < 0 || s.y >= n) throw InvalidArgument("seed outside the torus");
    kernel.infect(s);
  }
  kernel.run();
  return kernel.count() == n * n;
}

}  // namespace bootlab
