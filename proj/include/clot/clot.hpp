// Copyright 2026 The CLOT Authors.
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

#include "clot/amp.hpp"
#include "clot/control.hpp"
#include "clot/core.hpp"
#include "clot/curriculum.hpp"
#include "clot/geometry.hpp"
#include "clot/kinematics.hpp"
#include "clot/metrics.hpp"
#include "clot/model_io.hpp"
#include "clot/motion_data.hpp"
#include "clot/observation.hpp"
#include "clot/pipeline.hpp"
#include "clot/retarget.hpp"
#include "clot/reward.hpp"
#include "clot/rng.hpp"
#include "clot/sim.hpp"
#include "clot/stream.hpp"
#include "clot/synthetic.hpp"
#include "clot/wire.hpp"
