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

#include "bootlab/direction.hpp"
#include "bootlab/droplet.hpp"
#include "bootlab/droplet_count.hpp"
#include "bootlab/dynamics.hpp"
#include "bootlab/error.hpp"
#include "bootlab/family.hpp"
#include "bootlab/growth.hpp"
#include "bootlab/lattice.hpp"
#include "bootlab/parallel.hpp"
#include "bootlab/percolation.hpp"
#include "bootlab/philox.hpp"
#include "bootlab/site.hpp"
#include "bootlab/spanning.hpp"
#include "bootlab/stats.hpp"
#include "bootlab/union_find.hpp"
#include "bootlab/version.hpp"
