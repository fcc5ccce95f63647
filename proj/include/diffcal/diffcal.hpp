// Copyright 2026 The diffcal Authors.
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

// Umbrella header.

#pragma once

#include "diffcal/calib.hpp"
#include "diffcal/control.hpp"
#include "diffcal/core.hpp"
#include "diffcal/harness/homography.hpp"
#include "diffcal/harness/metrics.hpp"
#include "diffcal/harness/runner.hpp"
#include "diffcal/harness/scenario.hpp"
#include "diffcal/harness/trajectory.hpp"
#include "diffcal/plant.hpp"
#include "diffcal/records.hpp"
#include "diffcal/robot.hpp"
#include "diffcal/sensors.hpp"
#include "diffcal/stats.hpp"
#include "diffcal/store.hpp"
