// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "lorapl/analysis.hpp"
#include "lorapl/csv.hpp"
#include "lorapl/error.hpp"
#include "lorapl/filters.hpp"
#include "lorapl/fitting.hpp"
#include "lorapl/link_budget.hpp"
#include "lorapl/models.hpp"
#include "lorapl/synth.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace lorapl::config {

struct SynthSettings {
    std::size_t count = 50'000;
    double sigma_db = 8.0;
    double n = 2.0;
    double pl_d0_db = 130.0;
    double d0_m = 1000.0;
    synth::DistanceLaw law = synth::DistanceLaw::LogUniform;
    double min_m = 50.0;
    double max_m = 13'000.0;
    double alt_m = 60.0;
};

/// Everything a CLI run needs. Populated from defaults, then the config file,
/// then command-line flags.
struct RunConfig {
    std::string samples;
    std::string gateways;
    std::string catalog;
    std::string out = "lorapl-out";
    /// identity | fixture:<path> | live:<url>
    std::string snap = "identity";
    std::uint64_t seed = 20210927;

    int snap_retries = 3;
    double snap_timeout_s = 5.0;
    std::size_t snap_max_in_flight = 4;

    int min_satellites = 5;
    double max_offset_m = 20.0;
    std::optional<double> max_altitude_m;

    fitting::FitOptions fit;
    std::vector<std::size_t> subset_sizes;
    std::size_t repeats = 20;
    bool rmse_on_subset = false;
    double bias_bin_width_m = 500.0;
    double bias_max_m = 13'000.0;
    std::vector<double> progression_max_m;

    LinkBudget budget;
    models::Environment env;
    csv::ColumnMapping columns;
    analysis::SensitivityTable sensitivity = analysis::default_sensitivity();
    SynthSettings synth;

    [[nodiscard]] filters::FilterConfig filter_config() const
    {
        filters::FilterConfig f;
        f.min_satellites = min_satellites;
        f.max_offset_m = max_offset_m;
        f.max_altitude_m = max_altitude_m;
        f.freq_mhz = env.freq_mhz;
        f.budget = budget;
        return f;
    }

    [[nodiscard]] std::vector<double> bias_edges() const
    {
        return analysis::uniform_edges(bias_bin_width_m, bias_max_m);
    }

    /// 1 km steps up to 13 km unless configured.
    [[nodiscard]] std::vector<double> progression_distances() const
    {
        if (!progression_max_m.empty())
            return progression_max_m;
        std::vector<double> d;
        for (int km = 1; km <= 13; ++km)
            d.push_back(km * 1000.0);
        return d;
    }

    [[nodiscard]] fitting::FitOptions fit_options() const { return fit; }

    [[nodiscard]] analysis::ConvergenceOptions convergence_options() const
    {
        analysis::ConvergenceOptions c;
        c.fit = fit;
        c.repeats = repeats;
        c.seed = seed;
        c.rmse_on_subset = rmse_on_subset;
        return c;
    }

    [[nodiscard]] synth::SynthConfig synth_config(std::vector<Gateway> layout) const
    {
        synth::SynthConfig s;
        s.ground_truth = models::ModelSpec("LDPL-synthetic", models::LdplParams{synth.n, synth.pl_d0_db, synth.d0_m, synth.sigma_db});
        s.sigma_db = synth.sigma_db;
        s.gateways = std::move(layout);
        s.count = synth.count;
        s.distances = {synth.law, synth.min_m, synth.max_m};
        s.seed = seed;
        s.env = env;
        s.budget = budget;
        s.alt_m = synth.alt_m;
        return s;
    }
};

/// What a subcommand is about to touch; validate() checks only that.
struct Needs {
    bool samples = false;
    bool gateways = false;
    bool filter = false;
    bool convergence = false;
};

namespace detail {

inline void require_file(const std::string& key, const std::string& path)
{
    if (path.empty())
        fail(errc::invalid_argument, key + " is required");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        fail(errc::io, key + ": no such file '" + path + "'");
}

inline void positive(const char* key, double v)
{
    if (!(v > 0.0) || !std::isfinite(v))
        fail(errc::invalid_argument, std::string(key) + " must be positive");
}

} // namespace detail

inline void validate(const RunConfig& c, const Needs& needs)
{
    if (needs.samples)
        detail::require_file("samples", c.samples);
    if (needs.gateways)
        detail::require_file("gateways", c.gateways);
    if (!c.catalog.empty())
        detail::require_file("catalog", c.catalog);
    if (c.out.empty())
        fail(errc::invalid_argument, "out must name a directory");

    if (c.snap.rfind("fixture:", 0) == 0) {
        if (needs.filter)
            detail::require_file("snap fixture", c.snap.substr(8));
    } else if (c.snap.rfind("live:", 0) == 0) {
        if (c.snap.size() == 5)
            fail(errc::invalid_argument, "snap live: needs a URL");
    } else if (c.snap != "identity") {
        fail(errc::invalid_argument, "snap must be identity, fixture:<path> or live:<url>, got '" + c.snap + "'");
    }
    if (c.snap_retries < 0)
        fail(errc::invalid_argument, "snap_retries must be >= 0");
    detail::positive("snap_timeout_s", c.snap_timeout_s);
    if (c.snap_max_in_flight == 0)
        fail(errc::invalid_argument, "snap_max_in_flight must be positive");

    if (c.min_satellites < 0)
        fail(errc::invalid_argument, "min_satellites must be >= 0");
    detail::positive("max_offset_m", c.max_offset_m);
    if (needs.filter)
        c.filter_config().validate();
    else if (c.max_altitude_m && !std::isfinite(*c.max_altitude_m))
        fail(errc::invalid_argument, "max_altitude_m must be finite");

    detail::positive("bin_width_m", c.fit.bin_width_m);
    detail::positive("d0_m", c.fit.d0_m);
    detail::positive("bias_bin_width_m", c.bias_bin_width_m);
    detail::positive("bias_max_m", c.bias_max_m);
    for (const double d : c.progression_max_m)
        detail::positive("progression_max_m", d);
    if (c.repeats == 0)
        fail(errc::invalid_argument, "repeats must be positive");
    for (const auto k : c.subset_sizes)
        if (k < 2)
            fail(errc::invalid_argument, "subset sizes must be at least 2");

    c.budget.validate();
    c.env.validate();
    for (int sf = 7; sf <= 12; ++sf)
        if (!c.sensitivity.count(sf))
            fail(errc::invalid_argument, "sensitivity table lacks SF" + std::to_string(sf));

    detail::positive("synth.count", static_cast<double>(c.synth.count));
    if (!(c.synth.sigma_db >= 0.0))
        fail(errc::invalid_argument, "synth.sigma_db must be >= 0");
    detail::positive("synth.d0_m", c.synth.d0_m);
    detail::positive("synth.min_m", c.synth.min_m);
    if (!(c.synth.min_m < c.synth.max_m))
        fail(errc::invalid_argument, "synth.min_m must be below synth.max_m");
}

template <class T>
T parse_value(const std::string& key, const std::string& text)
{
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes")
            return true;
        if (text == "false" || text == "0" || text == "no")
            return false;
        fail(errc::invalid_argument, key + ": expected a boolean, got '" + text + "'");
    } else {
        if (const auto v = csv::parse_number<T>(text))
            return *v;
        fail(errc::invalid_argument, key + ": cannot parse '" + text + "'");
    }
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty())
            out.push_back(parse_value<T>(key, item));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

inline models::CityClass parse_city(const std::string& text)
{
    if (text == "medium_small")
        return models::CityClass::MediumSmall;
    if (text == "metropolitan")
        return models::CityClass::Metropolitan;
    fail(errc::invalid_argument, "city_class must be medium_small or metropolitan, got '" + text + "'");
}

inline synth::DistanceLaw parse_law(const std::string& text)
{
    if (text == "log_uniform")
        return synth::DistanceLaw::LogUniform;
    if (text == "uniform")
        return synth::DistanceLaw::Uniform;
    fail(errc::invalid_argument, "synth.distribution must be log_uniform or uniform, got '" + text + "'");
}

/// Applies one `key = value` setting. Section keys use a dot:
/// columns.<field>, sensitivity.sf<N>, synth.<name>.
inline void set(RunConfig& c, const std::string& key, const std::string& value)
{
    auto num = [&](auto& field) { field = parse_value<std::remove_reference_t<decltype(field)>>(key, value); };

    if (key == "samples") c.samples = value;
    else if (key == "gateways") c.gateways = value;
    else if (key == "catalog") c.catalog = value;
    else if (key == "out") c.out = value;
    else if (key == "snap") c.snap = value;
    else if (key == "seed") num(c.seed);
    else if (key == "snap_retries") num(c.snap_retries);
    else if (key == "snap_timeout_s") num(c.snap_timeout_s);
    else if (key == "snap_max_in_flight") num(c.snap_max_in_flight);
    else if (key == "min_satellites") num(c.min_satellites);
    else if (key == "max_offset_m") num(c.max_offset_m);
    else if (key == "max_altitude_m") c.max_altitude_m = parse_value<double>(key, value);
    else if (key == "bin_width_m") num(c.fit.bin_width_m);
    else if (key == "d0_m") num(c.fit.d0_m);
    else if (key == "weighted_fit") num(c.fit.weighted);
    else if (key == "subset_sizes") c.subset_sizes = parse_list<std::size_t>(key, value);
    else if (key == "repeats") num(c.repeats);
    else if (key == "rmse_on_subset") num(c.rmse_on_subset);
    else if (key == "bias_bin_width_m") num(c.bias_bin_width_m);
    else if (key == "bias_max_m") num(c.bias_max_m);
    else if (key == "progression_max_m") c.progression_max_m = parse_list<double>(key, value);
    else if (key == "tx_power_dbm") num(c.budget.tx_power_dbm);
    else if (key == "tx_gain_dbi") num(c.budget.tx_gain_dbi);
    else if (key == "rx_gain_dbi") num(c.budget.rx_gain_dbi);
    else if (key == "fixed_losses_db") num(c.budget.fixed_losses_db);
    else if (key == "freq_mhz") num(c.env.freq_mhz);
    else if (key == "h_sensor_m") num(c.env.h_sensor_m);
    else if (key == "city_class") c.env.city = parse_city(value);
    else if (key.rfind("columns.", 0) == 0) {
        const auto field = key.substr(8);
        if (!c.columns.columns.count(field))
            fail(errc::invalid_argument, "unknown sample column '" + field + "'");
        c.columns.columns[field] = value;
    } else if (key.rfind("sensitivity.sf", 0) == 0) {
        const auto sf = parse_value<int>(key, key.substr(14));
        if (sf < 7 || sf > 12)
            fail(errc::invalid_argument, key + ": spreading factor must be 7..12");
        c.sensitivity[sf] = parse_value<double>(key, value);
    }
    else if (key == "synth.count") num(c.synth.count);
    else if (key == "synth.sigma_db") num(c.synth.sigma_db);
    else if (key == "synth.n") num(c.synth.n);
    else if (key == "synth.pl_d0_db") num(c.synth.pl_d0_db);
    else if (key == "synth.d0_m") num(c.synth.d0_m);
    else if (key == "synth.distribution") c.synth.law = parse_law(value);
    else if (key == "synth.min_m") num(c.synth.min_m);
    else if (key == "synth.max_m") num(c.synth.max_m);
    else if (key == "synth.alt_m") num(c.synth.alt_m);
    else fail(errc::invalid_argument, "unknown config key '" + key + "'");
}

/// Reads an INI-style file: top-level `key = value` lines plus [columns],
/// [sensitivity] and [synth] sections. Relative paths stay relative to the
/// working directory.
inline void apply_file(RunConfig& c, std::istream& in)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(errc::invalid_argument, std::string("config: ") + e.what());
    }
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            set(c, key, node.data());
            continue;
        }
        for (const auto& [sub, leaf] : node)
            set(c, key + "." + sub, leaf.data());
    }
}

inline void apply_file(RunConfig& c, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(errc::io, "cannot open config file '" + path + "'");
    apply_file(c, in);
}

} // namespace lorapl::config
