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

#include "mvlink/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace mvlink
{

namespace
{
constexpr double pi = 3.14159265358979323846;

// Direction g (global frame, unit norm) expressed as (azimuth, elevation) in
// the local frame of an array whose broadside faces the horizontal direction
// 'orientation'.
void direction_to_angles(const arma::vec3& g, double orientation, double& az, double& el)
{
    const double cx = std::cos(orientation), sx = std::sin(orientation);
    const double dx = g(0) * cx + g(1) * sx;  // along broadside
    const double dy = -g(0) * sx + g(1) * cx; // along the azimuth axis
    const double dz = g(2);

    az = std::atan2(dy, dx);
    if (az <= -pi)
        az = pi; // keep azimuth inside (-pi, pi]
    el = std::asin(std::clamp(dz, -1.0, 1.0));
}

arma::vec3 unit(const arma::vec3& v)
{
    const double n = arma::norm(v);
    if (n < 1e-9)
        throw std::invalid_argument("scenario: degenerate geometry (coincident points)");
    return v / n;
}
} // namespace

void Environment::validate() const
{
    if (!los_enabled && reflectors.empty())
        throw std::invalid_argument("Environment: no propagation paths (LoS disabled, no reflectors)");
    if (!(pathloss_exponent > 0.0))
        throw std::invalid_argument("Environment: pathloss exponent must be positive");
}

std::string to_string(AngleMode m)
{
    return m == AngleMode::FrozenAtCenter ? "frozen" : "per_pose";
}

AngleMode angle_mode_from_string(const std::string& s)
{
    if (s == "frozen")
        return AngleMode::FrozenAtCenter;
    if (s == "per_pose")
        return AngleMode::PerPose;
    throw std::invalid_argument("unknown angle mode: " + s);
}

VehiclePose sample_passage(const MvRegion& region, double heading_jitter, std::mt19937_64& rng)
{
    if (region.radius < 0.0)
        throw std::invalid_argument("sample_passage: negative region radius");
    if (heading_jitter < 0.0)
        throw std::invalid_argument("sample_passage: negative heading jitter");

    // fixed draw order (radius, angle, heading) keeps streams reproducible
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r = region.radius * std::sqrt(u01(rng));
    const double phi = 2.0 * pi * u01(rng);
    const double dh = heading_jitter * (2.0 * u01(rng) - 1.0);

    VehiclePose pose;
    pose.position = region.center + arma::vec3{r * std::cos(phi), r * std::sin(phi), 0.0};
    pose.heading = region.heading + dh;
    return pose;
}

PathSet geometry_to_paths(const Environment& env, const VehiclePose& pose, AngleMode mode,
                          const MvRegion& region)
{
    env.validate();

    VehiclePose eval = pose;
    if (mode == AngleMode::FrozenAtCenter)
    {
        eval.position = region.center;
        eval.heading = region.heading;
    }

    const arma::uword n_paths = (env.los_enabled ? 1 : 0) + env.reflectors.size();
    PathSet p;
    p.aod_az.set_size(n_paths);
    p.aod_el.set_size(n_paths);
    p.aoa_az.set_size(n_paths);
    p.aoa_el.set_size(n_paths);
    p.powers.set_size(n_paths);

    arma::vec lengths(n_paths);
    arma::uword k = 0;

    if (env.los_enabled)
    {
        const arma::vec3 d_dep = unit(env.bs_position - eval.position); // MS toward BS
        const arma::vec3 d_arr = unit(eval.position - env.bs_position); // BS toward MS
        direction_to_angles(d_dep, eval.heading, p.aod_az(k), p.aod_el(k));
        direction_to_angles(d_arr, env.bs_orientation, p.aoa_az(k), p.aoa_el(k));
        lengths(k) = arma::norm(env.bs_position - eval.position);
        ++k;
    }

    for (const arma::vec3& refl : env.reflectors)
    {
        const arma::vec3 d_dep = unit(refl - eval.position);    // MS toward reflector
        const arma::vec3 d_arr = unit(refl - env.bs_position);  // BS toward reflector
        direction_to_angles(d_dep, eval.heading, p.aod_az(k), p.aod_el(k));
        direction_to_angles(d_arr, env.bs_orientation, p.aoa_az(k), p.aoa_el(k));
        lengths(k) = arma::norm(refl - eval.position) + arma::norm(refl - env.bs_position);
        ++k;
    }

    for (arma::uword i = 0; i < n_paths; ++i)
        p.powers(i) = std::pow(lengths(i), -env.pathloss_exponent);
    p.powers /= arma::accu(p.powers);

    p.validate();
    return p;
}

ScenarioPreset scenario_preset(const std::string& name)
{
    ScenarioPreset sp;
    if (name == "s1")
    {
        // multipath region ~60 m from the base: LoS plus two off-axis
        // reflectors, all three directions well separated on both sides
        sp.env.bs_position = {0.0, 0.0, 6.0};
        sp.env.bs_orientation = 0.0;
        sp.env.reflectors = {{30.0, 18.0, 4.0}, {28.0, -22.0, 9.0}};
        sp.env.pathloss_exponent = 2.0;
        sp.env.los_enabled = true;
        sp.region.center = {60.0, 0.0, 1.5};
        sp.region.heading = pi;
        sp.region.radius = 2.0;
        return sp;
    }
    if (name == "s2")
    {
        // close-range LoS-only region ~8 m from the base
        sp.env.bs_position = {0.0, 0.0, 6.0};
        sp.env.bs_orientation = 0.0;
        sp.env.reflectors = {};
        sp.env.pathloss_exponent = 2.0;
        sp.env.los_enabled = true;
        sp.region.center = {8.0, 0.0, 1.5};
        sp.region.heading = pi;
        sp.region.radius = 0.5;
        return sp;
    }
    throw std::invalid_argument("unknown scenario preset: " + name);
}

} // namespace mvlink
