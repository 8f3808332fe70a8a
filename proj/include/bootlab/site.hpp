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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace bootlab {

// A point of Z^2.
struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
  friend constexpr Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Site operator-(Site a, Site b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Site operator-(Site a) { return {-a.x, -a.y}; }

  friend std::ostream& operator<<(std::ostream& os, const Site& s) {
    return os << '(' << s.x << ',' << s.y << ')';
  }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(s.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(s.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Chebyshev (l-infinity) distance.
constexpr std::int64_t chebyshev(Site a, Site b) {
  const std::int64_t dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const std::int64_t dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

// Axis-aligned inclusive rectangle of sites.
struct Box {
  std::int64_t x_min = 0;
  std::int64_t y_min = 0;
  std::int64_t x_max = -1;
  std::int64_t y_max = -1;

  constexpr bool empty() const { return x_max < x_min || y_max < y_min; }
  constexpr std::int64_t width() const { return empty() ? 0 : x_max - x_min + 1; }
  constexpr std::int64_t height() const { return empty() ? 0 : y_max - y_min + 1; }
  constexpr bool contains(Site s) const {
    return s.x >= x_min && s.x <= x_max && s.y >= y_min && s.y <= y_max;
  }
  constexpr Box padded(std::int64_t pad) const {
    return {x_min - pad, y_min - pad, x_max + pad, y_max + pad};
  }
  constexpr void extend(Site s) {
    if (empty()) {
      *this = {s.x, s.y, s.x, s.y};
      return;
    }
    if (s.x < x_min) x_min = s.x;
    if (s.x > x_max) x_max = s.x;
    if (s.y < y_min) y_min = s.y;
    if (s.y > y_max) y_max = s.y;
  }

  friend constexpr bool operator==(const Box&, const Box&) = default;
};

// Gap between two boxes in the Chebyshev metric (0 when they overlap).
constexpr std::int64_t chebyshev_gap(const Box& a, const Box& b) {
  std::int64_t gx = 0;
  if (b.x_min > a.x_max) gx = b.x_min - a.x_max;
  if (a.x_min > b.x_max) gx = a.x_min - b.x_max;
  std::int64_t gy = 0;
  if (b.y_min > a.y_max) gy = b.y_min - a.y_max;
  if (a.y_min > b.y_max) gy = a.y_min - b.y_max;
  return gx > gy ? gx : gy;
}

template <typename Range>
Box bounding_box(const Range& sites) {
  Box box;
  for (const Site& s : sites) box.extend(s);
  return box;
}

}  // namespace bootlab
