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

// Classifies the Duarte model, spans a small seed set into droplets, and
// samples percolation on a small torus.

#include <iostream>

#include "bootlab.hpp"

int main() {
  const bootlab::UpdateFamily duarte = bootlab::duarte_family();

  const bootlab::Classification c = bootlab::classify(duarte);
  std::cout << "duarte: " << bootlab::to_string(c.kind) << ", " << bootlab::to_string(c.balance)
            << ", alpha=" << c.alpha << "\n";

  const bootlab::GrowthParams params(0.5, 0.1);
  const bootlab::SpanResult r = bootlab::span({{0, 0}, {0, 2}, {1, 5}, {9, 9}}, duarte, params);
  for (const auto& d : r.droplets) std::cout << "droplet height " << d.height() << ", " << d.sites().size() << " sites\n";

  const bootlab::RunManifest m = bootlab::sample_percolation({duarte, 48, 0.15, 100, 2026});
  std::cout << "percolation frequency at p=0.15, n=48: " << m.fraction << " [" << m.interval.lo << ", "
            << m.interval.hi << "]\n";
}
