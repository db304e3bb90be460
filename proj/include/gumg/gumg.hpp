// Copyright 2026 The gumg Authors
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

#ifndef GUMG_GUMG_HPP
#define GUMG_GUMG_HPP

#include "gumg/diagnostics.hpp"
#include "gumg/envs.hpp"
#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/gradients.hpp"
#include "gumg/learner.hpp"
#include "gumg/mailbox.hpp"
#include "gumg/occupancy.hpp"
#include "gumg/projection.hpp"
#include "gumg/rng.hpp"
#include "gumg/trajectory.hpp"
#include "gumg/utilities.hpp"

#endif  // GUMG_GUMG_HPP
