// SPDX-License-Identifier: Apache-2.0
//
// mvlink - multi-vehicular hybrid MIMO link-level simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mvlink/channel.hpp"

#include <random>
#include <string>
#include <vector>

namespace mvlink
{

// Static propagation geometry: one base station plus single-bounce point
// reflectors. Arrays are vertical URAs whose broadside faces the horizontal
// direction given by the orientation/heading angle; azimuth is measured from
// broadside in the horizontal plane, elevation from the horizontal.
struct Environment
{
    arma::vec3 bs_position = {0.0, 0.0, 6.0};
    double bs_orientation = 0.0; // azimuth of the BS broadside, radians
    std::vector<arma::vec3> reflectors;
    double pathloss_exponent = 2.0;
    bool los_enabled = true;

    void validate() const;
};

// Disk-shaped region of vehicle positions sharing one nominal heading.
struct MvRegion
{
    arma::vec3 center = {0.0, 0.0, 0.0};
    double heading = 0.0; // nominal vehicle heading, radians
    double radius = 1.0;  // meters
};

struct VehiclePose
{
    arma::vec3 position = {0.0, 0.0, 0.0};
    double heading = 0.0;
};

enum class AngleMode
{
    FrozenAtCenter, // all passages reuse the region-center geometry
    PerPose         // each passage evaluates geometry at its own pose
};

std::string to_string(AngleMode m);
AngleMode angle_mode_from_string(const std::string& s);

// Uniform position on the region disk (ground plane, z = center z) plus a
// heading jitter uniform in [-jitter, jitter]. Draw order is fixed: radius,
// angle, heading.
VehiclePose sample_passage(const MvRegion& region, double heading_jitter, std::mt19937_64& rng);

// Geometric path extraction for one pose: LoS (if enabled) plus one path per
// reflector; powers proportional to (total path length)^-exponent and
// normalized to sum to one. FrozenAtCenter evaluates at the region center
// pose regardless of the passage pose.
PathSet geometry_to_paths(const Environment& env, const VehiclePose& pose, AngleMode mode,
                          const MvRegion& region);

struct ScenarioPreset
{
    Environment env;
    MvRegion region;
};

// Named scenarios: "s1" is a ~60 m three-path multipath region (LoS plus two
// reflectors, radius 2 m), "s2" is a close-range (~8 m) LoS-only region with
// radius 0.5 m.
ScenarioPreset scenario_preset(const std::string& name);

} // namespace mvlink
