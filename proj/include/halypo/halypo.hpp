// Copyright 2026 The halypo Authors
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

#include "halypo/core.hpp"
#include "halypo/fixtures.hpp"
#include "halypo/games.hpp"
#include "halypo/harness.hpp"
#include "halypo/io.hpp"
#include "halypo/lyapunov.hpp"
#include "halypo/markov.hpp"
#include "halypo/metrics.hpp"
#include "halypo/optimizers.hpp"
#include "halypo/plot.hpp"
#include "halypo/projection.hpp"
#include "halypo/validate.hpp"
