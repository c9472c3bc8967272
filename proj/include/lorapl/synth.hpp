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

#include "lorapl/error.hpp"
#include "lorapl/geo.hpp"
#include "lorapl/link_budget.hpp"
#include "lorapl/models.hpp"
#include "lorapl/records.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lorapl::synth {

enum class DistanceLaw { LogUniform, Uniform };

struct DistanceDistribution {
    DistanceLaw law = DistanceLaw::LogUniform;
    double min_m = 50.0;
    double max_m = 13'000.0;
};

struct SynthConfig {
    models::ModelSpec ground_truth{"LDPL-synthetic", models::LdplParams{2.0, 130.0, 1000.0, 0.0}};
    double sigma_db = 8.0;
    std::vector<Gateway> gateways;
    std::size_t count = 10'000;
    DistanceDistribution distances;
    std::uint64_t seed = 1;
    models::Environment env;
    LinkBudget budget;
    /// Constant sensor altitude written to every sample.
    double alt_m = 60.0;
    std::chrono::sys_seconds start{std::chrono::sys_days{std::chrono::year{2020} / 1 / 1}};

    void validate() const
    {
        if (gateways.empty())
            fail(errc::invalid_argument, "synthetic campaign needs at least one gateway");
        if (count == 0)
            fail(errc::invalid_argument, "synthetic sample count must be positive");
        if (!(distances.min_m > 0.0) || !(distances.min_m < distances.max_m))
            fail(errc::invalid_argument, "distance range needs 0 < min < max");
        if (!(sigma_db >= 0.0))
            fail(errc::invalid_argument, "sigma must be non-negative");
        env.validate();
        budget.validate();
        for (const auto& gw : gateways)
            gw.validate();
    }
};

struct Campaign {
    std::vector<Sample> samples;
    std::vector<Gateway> gateways;
};

inline std::string format_utc(std::chrono::sys_seconds t)
{
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

/// Three gateways around central Bonn, used when no layout is supplied.
inline std::vector<Gateway> default_layout()
{
    return {
        {"gw-north", geo::GeoPoint(50.7374, 7.0982), 30.0, 3.0},
        {"gw-east", geo::GeoPoint(50.7150, 7.1450), 25.0, 3.0},
        {"gw-west", geo::GeoPoint(50.7050, 7.0600), 35.0, 3.0},
    };
}

/// Each sample is placed at a random bearing and a drawn distance from a
/// uniformly chosen gateway. Its RPP is the ground-truth median loss plus
/// N(0, sigma) shadowing pushed through the link budget. The distance used
/// for the loss is re-measured from the generated position, so the corpus is
/// self-consistent with the geo module.
inline Campaign generate(const SynthConfig& config)
{
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_gateway(0, config.gateways.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> shadow(0.0, config.sigma_db > 0.0 ? config.sigma_db : 1.0);

    const auto& dist = config.distances;
    const double log_min = std::log(dist.min_m);
    const double log_max = std::log(dist.max_m);

    Campaign out;
    out.gateways = config.gateways;
    out.samples.reserve(config.count);
    for (std::size_t i = 0; i < config.count; ++i) {
        const Gateway& gw = config.gateways[pick_gateway(rng)];
        const double u = unit(rng);
        const double d = dist.law == DistanceLaw::LogUniform
                             ? std::exp(log_min + u * (log_max - log_min))
                             : dist.min_m + u * (dist.max_m - dist.min_m);
        const double bearing = 2.0 * std::numbers::pi * unit(rng);
        const double noise = config.sigma_db > 0.0 ? shadow(rng) : 0.0;

        const geo::GeoPoint pos = geo::destination_point(gw.pos, bearing, d).with_alt(config.alt_m);
        const auto link = link_geometry(pos, gw, config.env.h_sensor_m);
        const double pl = models::predict(config.ground_truth, link, config.env) + noise;

        char id[32];
        std::snprintf(id, sizeof id, "synth-%08zu", i);
        out.samples.push_back(Sample{id, format_utc(config.start + std::chrono::seconds{60 * i}), gw.gateway_id,
                                     pos, 10, predicted_rpp(pl, config.budget.for_gateway(gw)), 12,
                                     std::nullopt});
    }
    return out;
}

} // namespace lorapl::synth
