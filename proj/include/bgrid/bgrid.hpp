// Copyright 2026 The bgrid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "bgrid/bench.hpp"
#include "bgrid/diff_slice.hpp"
#include "bgrid/fit.hpp"
#include "bgrid/gradcheck.hpp"
#include "bgrid/grid.hpp"
#include "bgrid/guidance.hpp"
#include "bgrid/image.hpp"
#include "bgrid/laplacian.hpp"
#include "bgrid/parallel.hpp"
#include "bgrid/pipeline.hpp"
#include "bgrid/slice.hpp"
#include "bgrid/stats.hpp"
