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
#include "lorapl/link_budget.hpp"
#include "lorapl/models.hpp"
#include "lorapl/records.hpp"
#include "lorapl/snap.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

namespace lorapl::filters {

enum class RejectReason { LowSatellites, SnapOffset, Altitude, BelowFspl };

constexpr std::string_view to_string(RejectReason r) noexcept
{
    switch (r) {
    case RejectReason::LowSatellites: return "LowSatellites";
    case RejectReason::SnapOffset: return "SnapOffset";
    case RejectReason::Altitude: return "Altitude";
    case RejectReason::BelowFspl: return "BelowFspl";
    }
    return "?";
}

struct FilterConfig {
    int min_satellites = 5;
    double max_offset_m = 20.0;
    /// Highest plausible sensor altitude. There is no sensible default, so
    /// apply_filters refuses to run without it.
    std::optional<double> max_altitude_m;
    double freq_mhz = 868.1;
    LinkBudget budget;

    void validate() const
    {
        if (min_satellites < 0)
            fail(errc::invalid_argument, "min_satellites must be >= 0");
        if (!(max_offset_m > 0.0))
            fail(errc::invalid_argument, "max_offset_m must be positive");
        if (!max_altitude_m)
            fail(errc::invalid_argument, "max_altitude_m must be configured");
        if (!std::isfinite(*max_altitude_m))
            fail(errc::invalid_argument, "max_altitude_m must be finite");
        if (!(freq_mhz > 0.0))
            fail(errc::invalid_argument, "freq_mhz must be positive");
        budget.validate();
    }
};

/// Funnel counts. Each sample lands in exactly one bucket: output, the first
/// stage that rejected it, or quarantine (snap provider gave no answer).
struct FilterReport {
    std::size_t input = 0;
    std::size_t output = 0;
    std::size_t low_satellites = 0;
    std::size_t snap_offset = 0;
    std::size_t altitude = 0;
    std::size_t below_fspl = 0;
    std::size_t quarantined = 0;

    [[nodiscard]] std::size_t rejected() const noexcept
    {
        return low_satellites + snap_offset + altitude + below_fspl;
    }

    [[nodiscard]] bool reconciles() const noexcept { return input == output + rejected() + quarantined; }

    FilterReport& operator+=(const FilterReport& o) noexcept
    {
        input += o.input;
        output += o.output;
        low_satellites += o.low_satellites;
        snap_offset += o.snap_offset;
        altitude += o.altitude;
        below_fspl += o.below_fspl;
        quarantined += o.quarantined;
        return *this;
    }

    /// Counts plus each stage's share of the raw input and of the population
    /// that actually reached the stage.
    [[nodiscard]] nlohmann::json to_json() const
    {
        auto share = [](std::size_t part, std::size_t whole) {
            return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
        };
        const std::size_t reach2 = input - low_satellites;
        const std::size_t reach3 = reach2 - snap_offset - quarantined;
        const std::size_t reach4 = reach3 - altitude;
        nlohmann::json stages = nlohmann::json::array();
        const std::pair<std::string_view, std::pair<std::size_t, std::size_t>> rows[] = {
            {"LowSatellites", {low_satellites, input}},
            {"SnapOffset", {snap_offset, reach2}},
            {"Altitude", {altitude, reach3}},
            {"BelowFspl", {below_fspl, reach4}},
        };
        for (const auto& [name, counts] : rows)
            stages.push_back({{"reason", name},
                              {"count", counts.first},
                              {"reached_stage", counts.second},
                              {"share_of_input", share(counts.first, input)},
                              {"share_of_stage", share(counts.first, counts.second)}});
        return {{"input", input},
                {"output", output},
                {"quarantined", quarantined},
                {"rejections",
                 {{"LowSatellites", low_satellites},
                  {"SnapOffset", snap_offset},
                  {"Altitude", altitude},
                  {"BelowFspl", below_fspl}}},
                {"stages", stages},
                {"reconciles", reconciles()}};
    }
};

struct RejectedSample {
    Sample sample;
    RejectReason reason;
    std::string detail;
};

struct QuarantinedSample {
    Sample sample;
    std::string error;
};

struct FilterResult {
    std::vector<Sample> clean;
    FilterReport report;
    std::vector<RejectedSample> rejected;
    std::vector<QuarantinedSample> quarantined;
};

namespace detail {

using PositionKey = std::pair<double, double>;
using SnapOutcome = std::variant<snap::SnapResult, std::string>;

/// Snaps each distinct position once, with at most provider.max_in_flight()
/// requests outstanding.
inline std::map<PositionKey, SnapOutcome> snap_unique(const std::vector<geo::GeoPoint>& positions,
                                                      const snap::SnapProvider& provider)
{
    std::vector<SnapOutcome> outcomes(positions.size(), std::string("not attempted"));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < positions.size(); i = next++) {
            try {
                outcomes[i] = snap::snap_to_street(positions[i], provider);
            } catch (const std::exception& e) {
                outcomes[i] = std::string(e.what());
            }
        }
    };
    const std::size_t threads = std::min(provider.max_in_flight(), positions.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }

    std::map<PositionKey, SnapOutcome> out;
    for (std::size_t i = 0; i < positions.size(); ++i)
        out.emplace(PositionKey{positions[i].lat(), positions[i].lon()}, std::move(outcomes[i]));
    return out;
}

} // namespace detail

/// Post-processing chain, applied in order:
///  1. fewer than min_satellites locked satellites
///  2. snap offset above max_offset_m; survivors move to the snapped position
///  3. altitude above max_altitude_m (samples without altitude pass)
///  4. measured path loss below free-space loss at the snapped distance
inline FilterResult apply_filters(const std::vector<Sample>& samples, const GatewayRegistry& gateways,
                                  const FilterConfig& config, const snap::SnapProvider& provider)
{
    config.validate();
    for (const auto& s : samples)
        (void)gateways.at(s.gateway_id);

    FilterResult result;
    result.report.input = samples.size();
    auto reject = [&](const Sample& s, RejectReason reason, std::string detail) {
        switch (reason) {
        case RejectReason::LowSatellites: ++result.report.low_satellites; break;
        case RejectReason::SnapOffset: ++result.report.snap_offset; break;
        case RejectReason::Altitude: ++result.report.altitude; break;
        case RejectReason::BelowFspl: ++result.report.below_fspl; break;
        }
        result.rejected.push_back({s, reason, std::move(detail)});
    };

    std::vector<const Sample*> stage2;
    for (const auto& s : samples) {
        if (s.satellites < config.min_satellites)
            reject(s, RejectReason::LowSatellites, "satellites=" + std::to_string(s.satellites));
        else
            stage2.push_back(&s);
    }

    std::vector<geo::GeoPoint> to_snap;
    {
        std::map<detail::PositionKey, bool> seen;
        for (const Sample* s : stage2)
            if (!s->snap_offset_m && seen.emplace(detail::PositionKey{s->pos.lat(), s->pos.lon()}, true).second)
                to_snap.push_back(s->pos);
    }
    const auto snapped = detail::snap_unique(to_snap, provider);

    for (const Sample* src : stage2) {
        Sample s = *src;
        if (!s.snap_offset_m) {
            const auto& outcome = snapped.at({s.pos.lat(), s.pos.lon()});
            if (const auto* err = std::get_if<std::string>(&outcome)) {
                ++result.report.quarantined;
                result.quarantined.push_back({s, *err});
                continue;
            }
            const auto& snap = std::get<snap::SnapResult>(outcome);
            s.snap_offset_m = snap.offset_m;
            if (snap.offset_m <= config.max_offset_m)
                s.pos = snap.snapped.with_alt(s.pos.alt());
        }
        if (*s.snap_offset_m > config.max_offset_m) {
            reject(*src, RejectReason::SnapOffset, "offset_m=" + std::to_string(*s.snap_offset_m));
            continue;
        }
        if (s.pos.alt() && *s.pos.alt() > *config.max_altitude_m) {
            reject(s, RejectReason::Altitude, "alt_m=" + std::to_string(*s.pos.alt()));
            continue;
        }
        const Gateway& gw = gateways.at(s.gateway_id);
        const double d = geo::haversine_distance(s.pos, gw.pos);
        if (!(d > 0.0)) {
            reject(s, RejectReason::BelowFspl, "zero distance to gateway");
            continue;
        }
        const double measured = measured_path_loss(s, gw, config.budget);
        const double free_space = models::fspl_db(d, config.freq_mhz);
        if (measured < free_space) {
            reject(s, RejectReason::BelowFspl,
                   "pl_db=" + std::to_string(measured) + " < fspl_db=" + std::to_string(free_space));
            continue;
        }
        result.clean.push_back(std::move(s));
    }
    result.report.output = result.clean.size();
    return result;
}

} // namespace lorapl::filters
