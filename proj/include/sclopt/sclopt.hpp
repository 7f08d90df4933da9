/*
 * Copyright (c) 2026, the sclopt authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sclopt/aux_functions.hpp"
#include "sclopt/bench.hpp"
#include "sclopt/core.hpp"
#include "sclopt/eigs.hpp"
#include "sclopt/libsvm.hpp"
#include "sclopt/metric.hpp"
#include "sclopt/oracles.hpp"
#include "sclopt/profile.hpp"
#include "sclopt/prox.hpp"
#include "sclopt/records.hpp"
#include "sclopt/scl_verify.hpp"
#include "sclopt/solvers.hpp"
#include "sclopt/step.hpp"
#include "sclopt/synth.hpp"
