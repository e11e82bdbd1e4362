// Copyright 2026 The SPOR Toolkit Authors.
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

#include "spor/alignment.hpp"
#include "spor/core.hpp"
#include "spor/distribution.hpp"
#include "spor/evaluate.hpp"
#include "spor/ingest.hpp"
#include "spor/io.hpp"
#include "spor/metrics.hpp"
#include "spor/order_invariance.hpp"
#include "spor/predictions.hpp"
#include "spor/productivity.hpp"
#include "spor/rng.hpp"
#include "spor/rules.hpp"
#include "spor/runner.hpp"
#include "spor/systematicity.hpp"
#include "spor/text.hpp"
