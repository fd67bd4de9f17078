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

#include "mvlink/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mvlink/persistence.hpp"

namespace mvlink
{

using ordered_json = nlohmann::ordered_json;

std::string to_string(EstimatorKind kind)
{
    switch (kind)
    {
    case EstimatorKind::Uml:
        return "UML";
    case EstimatorKind::Js:
        return "JS";
    case EstimatorKind::Ds:
        return "DS";
    case EstimatorKind::PerfectCsi:
        return "PERFECT_CSI";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& label)
{
    if (label == "UML")
        return EstimatorKind::Uml;
    if (label == "JS")
        return EstimatorKind::Js;
    if (label == "DS")
        return EstimatorKind::Ds;
    if (label == "PERFECT_CSI")
        return EstimatorKind::PerfectCsi;
    throw std::invalid_argument("unknown estimator label: " + label);
}

HybridConfig ExperimentConfig::hybrid_for(Architecture arch, const RfPair& rf) const
{
    HybridConfig cfg;
    cfg.arch = arch;
    cfg.tx = tx;
    cfg.rx = rx;
    cfg.n_streams = n_streams;
    if (arch == Architecture::FullDigital)
    {
        cfg.n_tx_rf = tx.total();
        cfg.n_rx_rf = rx.total();
    }
    else
    {
        cfg.n_tx_rf = rf.n_tx_rf;
        cfg.n_rx_rf = rf.n_rx_rf;
    }
    return cfg;
}

std::vector<double> ExperimentConfig::effective_radii() const
{
    if (!radii_m.empty())
    {
        return radii_m;
    }
    return {region.radius};
}

void ExperimentConfig::validate() const
{
    if (preset != "s1" && preset != "s2" && preset != "custom")
    {
        throw std::invalid_argument("config: unknown preset '" + preset + "'");
    }
    env.validate();
    if (!(region.radius > 0.0))
    {
        throw std::invalid_argument("config: region radius must be positive");
    }
    if (architectures.empty() || snr_db.empty() || passages.empty() || rf_pairs.empty() ||
        estimators.empty())
    {
        throw std::invalid_argument("config: grids and estimator set must be non-empty");
    }
    for (const double s : snr_db)
    {
        if (!std::isfinite(s))
        {
            throw std::invalid_argument("config: SNR grid entries must be finite");
        }
    }
    for (const arma::uword l : passages)
    {
        if (l == 0)
        {
            throw std::invalid_argument("config: passage counts must be positive");
        }
    }
    for (const double r : radii_m)
    {
        if (!(r > 0.0))
        {
            throw std::invalid_argument("config: radii must be positive");
        }
    }
    if (trials == 0 || n_fits == 0 || threads == 0)
    {
        throw std::invalid_argument("config: trials, n_fits, and threads must be positive");
    }
    if (!(rank_threshold > 0.0 && rank_threshold <= 1.0))
    {
        throw std::invalid_argument("config: rank threshold must lie in (0, 1]");
    }
    if (fd_fit_max_dim == 0)
    {
        throw std::invalid_argument("config: fd_fit_max_dim must be positive");
    }

    const bool wants_subspace =
        std::find(estimators.begin(), estimators.end(), EstimatorKind::Js) != estimators.end() ||
        std::find(estimators.begin(), estimators.end(), EstimatorKind::Ds) != estimators.end();
    for (const Architecture arch : architectures)
    {
        for (const RfPair& rf : rf_pairs)
        {
            const HybridConfig hybrid = hybrid_for(arch, rf);
            hybrid.validate();
            if (arch != Architecture::FullDigital)
            {
                // Beam scanning needs at least as many codebook beams as
                // chains on each side.
                const Codebook tx_cb = codebook_for(hybrid, Side::Tx);
                const Codebook rx_cb = codebook_for(hybrid, Side::Rx);
                if (tx_cb.matrix.n_cols < hybrid.n_tx_rf ||
                    rx_cb.matrix.n_cols < hybrid.n_rx_rf)
                {
                    throw std::invalid_argument(
                        "config: codebook smaller than the RF chain count");
                }
            }
            if (arch == Architecture::FullDigital && wants_subspace &&
                hybrid.n_tx_rf * hybrid.n_rx_rf > fd_fit_max_dim)
            {
                throw std::invalid_argument(
                    "config: subspace estimators on full-digital exceed fd_fit_max_dim; "
                    "drop JS/DS for FD or shrink the arrays");
            }
        }
    }
    if (pilot_cols != 0)
    {
        for (const Architecture arch : architectures)
        {
            for (const RfPair& rf : rf_pairs)
            {
                if (pilot_cols < hybrid_for(arch, rf).n_tx_rf)
                {
                    throw std::invalid_argument(
                        "config: pilot_cols must reach the Tx chain count");
                }
            }
        }
    }
}

ExperimentConfig default_config()
{
    ExperimentConfig cfg;
    const ScenarioPreset preset = scenario_preset(cfg.preset);
    cfg.env = preset.env;
    cfg.region = preset.region;
    return cfg;
}

namespace
{

void require_keys(const ordered_json& obj, const std::string& where,
                  const std::set<std::string>& allowed)
{
    for (const auto& item : obj.items())
    {
        if (allowed.find(item.key()) == allowed.end())
        {
            throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
        }
    }
}

arma::vec3 parse_vec3(const ordered_json& node, const std::string& what)
{
    if (!node.is_array() || node.size() != 3)
    {
        throw std::invalid_argument("config: " + what + " must be a 3-element array");
    }
    arma::vec3 out;
    for (std::size_t i = 0; i < 3; ++i)
    {
        out(i) = node.at(i).get<double>();
    }
    return out;
}

Environment parse_environment(const ordered_json& node)
{
    require_keys(node, "environment",
                 {"bs_position", "bs_orientation", "reflectors", "pathloss_exponent", "los"});
    Environment env;
    if (node.contains("bs_position"))
    {
        env.bs_position = parse_vec3(node.at("bs_position"), "bs_position");
    }
    if (node.contains("bs_orientation"))
    {
        env.bs_orientation = node.at("bs_orientation").get<double>();
    }
    if (node.contains("reflectors"))
    {
        for (const auto& refl : node.at("reflectors"))
        {
            env.reflectors.push_back(parse_vec3(refl, "reflector"));
        }
    }
    if (node.contains("pathloss_exponent"))
    {
        env.pathloss_exponent = node.at("pathloss_exponent").get<double>();
    }
    if (node.contains("los"))
    {
        env.los_enabled = node.at("los").get<bool>();
    }
    return env;
}

MvRegion parse_region(const ordered_json& node)
{
    require_keys(node, "region", {"center", "heading", "radius"});
    MvRegion region;
    if (node.contains("center"))
    {
        region.center = parse_vec3(node.at("center"), "region center");
    }
    if (node.contains("heading"))
    {
        region.heading = node.at("heading").get<double>();
    }
    if (node.contains("radius"))
    {
        region.radius = node.at("radius").get<double>();
    }
    return region;
}

UraGeometry parse_ura(const ordered_json& node, double spacing, const std::string& what)
{
    if (!node.is_array() || node.size() != 2)
    {
        throw std::invalid_argument("config: " + what + " must be [n_az, n_el]");
    }
    UraGeometry geo;
    geo.n_az = node.at(0).get<arma::uword>();
    geo.n_el = node.at(1).get<arma::uword>();
    geo.spacing = spacing;
    return geo;
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text)
{
    ordered_json root;
    try
    {
        root = ordered_json::parse(text);
    }
    catch (const nlohmann::json::parse_error& err)
    {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + err.what());
    }
    if (!root.is_object())
    {
        throw std::invalid_argument("config: top level must be an object");
    }
    require_keys(root, "top level",
                 {"preset", "environment", "region", "angle_mode", "arrays", "n_streams",
                  "architectures", "grid", "estimators", "trials", "n_fits", "align_passages",
                  "master_seed", "out", "threads", "rank_threshold", "fd_fit_max_dim",
                  "pilot_cols"});

    ExperimentConfig cfg = default_config();
    if (root.contains("preset"))
    {
        cfg.preset = root.at("preset").get<std::string>();
        if (cfg.preset == "s1" || cfg.preset == "s2")
        {
            const ScenarioPreset preset = scenario_preset(cfg.preset);
            cfg.env = preset.env;
            cfg.region = preset.region;
        }
        else if (cfg.preset != "custom")
        {
            throw std::invalid_argument("config: unknown preset '" + cfg.preset + "'");
        }
    }
    if (cfg.preset == "custom")
    {
        if (!root.contains("environment") || !root.contains("region"))
        {
            throw std::invalid_argument(
                "config: the custom preset requires environment and region");
        }
        cfg.env = parse_environment(root.at("environment"));
        cfg.region = parse_region(root.at("region"));
    }
    else if (root.contains("environment"))
    {
        throw std::invalid_argument("config: environment requires preset \"custom\"");
    }
    else if (root.contains("region"))
    {
        // Built-in scenario with an overridden vehicle region.
        cfg.region = parse_region(root.at("region"));
    }

    if (root.contains("angle_mode"))
    {
        cfg.angle_mode = angle_mode_from_string(root.at("angle_mode").get<std::string>());
    }
    if (root.contains("arrays"))
    {
        const ordered_json& arrays = root.at("arrays");
        require_keys(arrays, "arrays", {"tx", "rx", "spacing"});
        const double spacing =
            arrays.contains("spacing") ? arrays.at("spacing").get<double>() : 0.5;
        if (arrays.contains("tx"))
        {
            cfg.tx = parse_ura(arrays.at("tx"), spacing, "arrays.tx");
        }
        if (arrays.contains("rx"))
        {
            cfg.rx = parse_ura(arrays.at("rx"), spacing, "arrays.rx");
        }
    }
    if (root.contains("n_streams"))
    {
        cfg.n_streams = root.at("n_streams").get<arma::uword>();
    }
    if (root.contains("architectures"))
    {
        cfg.architectures.clear();
        for (const auto& label : root.at("architectures"))
        {
            cfg.architectures.push_back(architecture_from_string(label.get<std::string>()));
        }
    }
    if (root.contains("grid"))
    {
        const ordered_json& grid = root.at("grid");
        require_keys(grid, "grid", {"snr_db", "passages", "rf_pairs", "radii_m"});
        if (grid.contains("snr_db"))
        {
            cfg.snr_db = grid.at("snr_db").get<std::vector<double>>();
        }
        if (grid.contains("passages"))
        {
            cfg.passages = grid.at("passages").get<std::vector<arma::uword>>();
        }
        if (grid.contains("rf_pairs"))
        {
            cfg.rf_pairs.clear();
            for (const auto& pair : grid.at("rf_pairs"))
            {
                if (!pair.is_array() || pair.size() != 2)
                {
                    throw std::invalid_argument("config: rf_pairs entries must be [tx, rx]");
                }
                cfg.rf_pairs.push_back(
                    RfPair{pair.at(0).get<arma::uword>(), pair.at(1).get<arma::uword>()});
            }
        }
        if (grid.contains("radii_m"))
        {
            cfg.radii_m = grid.at("radii_m").get<std::vector<double>>();
        }
    }
    if (root.contains("estimators"))
    {
        cfg.estimators.clear();
        for (const auto& label : root.at("estimators"))
        {
            cfg.estimators.push_back(estimator_from_string(label.get<std::string>()));
        }
    }
    if (root.contains("trials"))
    {
        cfg.trials = root.at("trials").get<arma::uword>();
    }
    if (root.contains("n_fits"))
    {
        cfg.n_fits = root.at("n_fits").get<arma::uword>();
    }
    if (root.contains("align_passages"))
    {
        cfg.align_passages = root.at("align_passages").get<arma::uword>();
    }
    if (root.contains("master_seed"))
    {
        cfg.master_seed = root.at("master_seed").get<std::uint64_t>();
    }
    if (root.contains("out"))
    {
        cfg.out_path = root.at("out").get<std::string>();
    }
    if (root.contains("threads"))
    {
        cfg.threads = root.at("threads").get<arma::uword>();
    }
    if (root.contains("rank_threshold"))
    {
        cfg.rank_threshold = root.at("rank_threshold").get<double>();
    }
    if (root.contains("fd_fit_max_dim"))
    {
        cfg.fd_fit_max_dim = root.at("fd_fit_max_dim").get<arma::uword>();
    }
    if (root.contains("pilot_cols"))
    {
        cfg.pilot_cols = root.at("pilot_cols").get<arma::uword>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("config: cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

namespace
{

ordered_json environment_to_json(const Environment& env)
{
    ordered_json node;
    node["bs_position"] = {env.bs_position(0), env.bs_position(1), env.bs_position(2)};
    node["bs_orientation"] = env.bs_orientation;
    ordered_json reflectors = ordered_json::array();
    for (const arma::vec3& r : env.reflectors)
    {
        reflectors.push_back({r(0), r(1), r(2)});
    }
    node["reflectors"] = reflectors;
    node["pathloss_exponent"] = env.pathloss_exponent;
    node["los"] = env.los_enabled;
    return node;
}

ordered_json region_to_json(const MvRegion& region)
{
    ordered_json node;
    node["center"] = {region.center(0), region.center(1), region.center(2)};
    node["heading"] = region.heading;
    node["radius"] = region.radius;
    return node;
}

ordered_json structural_json(const ExperimentConfig& cfg)
{
    ordered_json root;
    root["preset"] = cfg.preset;
    root["environment"] = environment_to_json(cfg.env);
    root["region"] = region_to_json(cfg.region);
    root["angle_mode"] = to_string(cfg.angle_mode);
    root["arrays"] = {{"tx", {cfg.tx.n_az, cfg.tx.n_el}},
                      {"rx", {cfg.rx.n_az, cfg.rx.n_el}},
                      {"spacing", cfg.tx.spacing}};
    root["n_streams"] = cfg.n_streams;
    ordered_json archs = ordered_json::array();
    for (const Architecture a : cfg.architectures)
    {
        archs.push_back(to_string(a));
    }
    root["architectures"] = archs;
    ordered_json grid;
    grid["snr_db"] = cfg.snr_db;
    grid["passages"] = cfg.passages;
    ordered_json pairs = ordered_json::array();
    for (const RfPair& p : cfg.rf_pairs)
    {
        pairs.push_back({p.n_tx_rf, p.n_rx_rf});
    }
    grid["rf_pairs"] = pairs;
    grid["radii_m"] = cfg.radii_m;
    root["grid"] = grid;
    root["n_fits"] = cfg.n_fits;
    root["align_passages"] = cfg.align_passages;
    root["rank_threshold"] = cfg.rank_threshold;
    root["fd_fit_max_dim"] = cfg.fd_fit_max_dim;
    root["pilot_cols"] = cfg.pilot_cols;
    return root;
}

} // namespace

std::string config_to_json(const ExperimentConfig& cfg)
{
    ordered_json root = structural_json(cfg);
    if (cfg.preset != "custom")
    {
        // Built-in scenarios carry their environment implicitly; emitting it
        // would make the file unreadable by the strict parser.
        root.erase("environment");
    }
    // Runtime knobs follow the structural block so the file round-trips.
    ordered_json estimators = ordered_json::array();
    for (const EstimatorKind e : cfg.estimators)
    {
        estimators.push_back(to_string(e));
    }
    root["estimators"] = estimators;
    root["trials"] = cfg.trials;
    root["master_seed"] = cfg.master_seed;
    root["out"] = cfg.out_path;
    root["threads"] = cfg.threads;
    return root.dump(2) + "\n";
}

std::uint64_t config_fingerprint(const ExperimentConfig& cfg)
{
    return fnv1a64(structural_json(cfg).dump());
}

} // namespace mvlink
