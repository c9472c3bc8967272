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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lorapl {

using geo::GeoPoint;

/// Parses "YYYY-MM-DDTHH:MM:SS[.frac][Z|+00:00]" into whole UTC seconds.
inline std::optional<std::chrono::sys_seconds> parse_utc_timestamp(std::string_view text)
{
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    unsigned h = 0;
    unsigned mi = 0;
    unsigned s = 0;
    int consumed = 0;
    const std::string buf(text);
    if (std::sscanf(buf.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6)
        return std::nullopt;
    std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest.front() == '.') {
        std::size_t i = 1;
        while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9')
            ++i;
        if (i == 1)
            return std::nullopt;
        rest.remove_prefix(i);
    }
    if (!(rest == "Z" || rest == "+00:00" || rest.empty()))
        return std::nullopt;

    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                          std::chrono::day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60)
        return std::nullopt;
    return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
           std::chrono::seconds{s};
}

/// One received packet as reported by one gateway.
struct Sample {
    std::string packet_id;
    std::string timestamp;
    std::string gateway_id;
    GeoPoint pos;
    int satellites = 0;
    double rpp_dbm = 0.0;
    int sf = 12;
    /// Set once the position has been snapped to the street network; a
    /// snapped sample is not sent to the snap provider again.
    std::optional<double> snap_offset_m;

    /// Throws invalid_argument describing the first violated field constraint.
    void validate() const
    {
        if (packet_id.empty())
            fail(errc::invalid_argument, "empty packet_id");
        if (!parse_utc_timestamp(timestamp))
            fail(errc::invalid_argument, "timestamp is not ISO-8601 UTC: '" + timestamp + "'");
        if (gateway_id.empty())
            fail(errc::invalid_argument, "empty gateway_id");
        if (satellites < 0)
            fail(errc::invalid_argument, "satellites must be >= 0");
        if (!std::isfinite(rpp_dbm))
            fail(errc::invalid_argument, "rpp_dbm must be finite");
        if (sf < 7 || sf > 12)
            fail(errc::invalid_argument, "sf must be in [7, 12], got " + std::to_string(sf));
        if (snap_offset_m && !(*snap_offset_m >= 0.0))
            fail(errc::invalid_argument, "snap_offset_m must be >= 0");
    }
};

struct Gateway {
    std::string gateway_id;
    GeoPoint pos;
    double height_m = 30.0;
    double gain_dbi = 3.0;

    void validate() const
    {
        if (gateway_id.empty())
            fail(errc::invalid_argument, "empty gateway_id");
        if (!(height_m > 0.0) || !std::isfinite(height_m))
            fail(errc::invalid_argument, "gateway '" + gateway_id + "' height must be positive");
        if (!std::isfinite(gain_dbi))
            fail(errc::invalid_argument, "gateway '" + gateway_id + "' gain must be finite");
    }
};

class GatewayRegistry {
public:
    GatewayRegistry() = default;

    explicit GatewayRegistry(const std::vector<Gateway>& gateways)
    {
        for (const auto& gw : gateways)
            add(gw);
    }

    void add(const Gateway& gw)
    {
        gw.validate();
        if (!by_id_.emplace(gw.gateway_id, gw).second)
            fail(errc::invalid_argument, "duplicate gateway_id '" + gw.gateway_id + "'");
    }

    [[nodiscard]] const Gateway& at(const std::string& id) const
    {
        const auto it = by_id_.find(id);
        if (it == by_id_.end())
            fail(errc::unknown_gateway, "gateway '" + id + "' is not registered");
        return it->second;
    }

    [[nodiscard]] bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
    [[nodiscard]] std::size_t size() const noexcept { return by_id_.size(); }
    [[nodiscard]] bool empty() const noexcept { return by_id_.empty(); }

    /// Gateways in id order.
    [[nodiscard]] std::vector<Gateway> list() const
    {
        std::vector<Gateway> out;
        out.reserve(by_id_.size());
        for (const auto& [id, gw] : by_id_)
            out.push_back(gw);
        return out;
    }

private:
    std::map<std::string, Gateway> by_id_;
};

/// Ground link geometry between a sample position and its receiving gateway.
inline geo::LinkGeometry link_geometry(const GeoPoint& sample_pos, const Gateway& gw, double h_sensor_m)
{
    return geo::link_geometry(sample_pos, gw.pos, gw.height_m, h_sensor_m);
}

} // namespace lorapl
