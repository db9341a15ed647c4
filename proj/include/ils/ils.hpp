// Copyright 2026 The ils Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Umbrella header for the solver library (everything except the CLI).

#pragma once

#include "ils/box.hpp"
#include "ils/core.hpp"
#include "ils/decorrelate.hpp"
#include "ils/ilp.hpp"
#include "ils/model.hpp"
#include "ils/oracle.hpp"
#include "ils/pivot_solver.hpp"
