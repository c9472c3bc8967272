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

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>

namespace lorapl::snap {

using geo::GeoPoint;

struct SnapResult {
    GeoPoint snapped;
    double offset_m;
};

/// Maps a raw GPS fix onto the street network. Implementations throw
/// errc::provider_unavailable when no answer can be obtained.
class SnapProvider {
public:
    virtual ~SnapProvider() = default;

    /// Nearest street position. Altitude of the input is carried over.
    [[nodiscard]] virtual GeoPoint nearest(const GeoPoint& pos) const = 0;

    /// Upper bound on concurrent nearest() calls the provider accepts.
    [[nodiscard]] virtual std::size_t max_in_flight() const noexcept { return 1; }
};

/// Snapped position and the straight-line distance it moved.
inline SnapResult snap_to_street(const GeoPoint& pos, const SnapProvider& provider)
{
    const GeoPoint snapped = provider.nearest(pos).with_alt(pos.alt());
    return {snapped, geo::haversine_distance(pos, snapped)};
}

/// Offline passthrough for data that is already on the street network.
class IdentityProvider final : public SnapProvider {
public:
    [[nodiscard]] GeoPoint nearest(const GeoPoint& pos) const override { return pos; }
};

/// Lookup key of a position in a recorded fixture: lat and lon rounded to
/// `precision` decimals.
inline std::string fixture_key(const GeoPoint& pos, int precision = 6)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f,%.*f", precision, pos.lat(), precision, pos.lon());
    return buf;
}

/// Replays recorded provider answers stored as
/// {"precision": 6, "points": {"<lat>,<lon>": {"lat": .., "lon": ..}}}.
class FixtureProvider final : public SnapProvider {
public:
    explicit FixtureProvider(const nlohmann::json& doc)
    {
        if (!doc.is_object() || !doc.contains("points") || !doc.at("points").is_object())
            fail(errc::schema, "snap fixture needs a 'points' object");
        precision_ = doc.value("precision", 6);
        for (const auto& [key, value] : doc.at("points").items()) {
            if (!value.contains("lat") || !value.contains("lon"))
                fail(errc::schema, "snap fixture entry '" + key + "' needs lat and lon");
            points_.emplace(key, GeoPoint(value.at("lat").get<double>(), value.at("lon").get<double>()));
        }
    }

    static FixtureProvider from_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            fail(errc::io, "cannot open snap fixture '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            fail(errc::schema, "snap fixture '" + path + "' is not valid JSON: " + e.what());
        }
        return FixtureProvider(doc);
    }

    [[nodiscard]] GeoPoint nearest(const GeoPoint& pos) const override
    {
        const auto it = points_.find(fixture_key(pos, precision_));
        if (it == points_.end())
            fail(errc::provider_unavailable, "no recorded snap for " + fixture_key(pos, precision_));
        return it->second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

private:
    int precision_ = 6;
    std::map<std::string, GeoPoint> points_;
};

/// Decorator that remembers every successful answer of another provider so a
/// live run can be saved as a fixture and replayed later.
class RecordingProvider final : public SnapProvider {
public:
    explicit RecordingProvider(const SnapProvider& inner, int precision = 6)
        : inner_(inner), precision_(precision)
    {
    }

    [[nodiscard]] GeoPoint nearest(const GeoPoint& pos) const override
    {
        const GeoPoint snapped = inner_.nearest(pos);
        const std::lock_guard lock(mutex_);
        recorded_.insert_or_assign(fixture_key(pos, precision_), snapped);
        return snapped;
    }

    [[nodiscard]] std::size_t max_in_flight() const noexcept override { return inner_.max_in_flight(); }

    [[nodiscard]] nlohmann::json to_fixture() const
    {
        const std::lock_guard lock(mutex_);
        nlohmann::json points = nlohmann::json::object();
        for (const auto& [key, p] : recorded_)
            points[key] = {{"lat", p.lat()}, {"lon", p.lon()}};
        return {{"precision", precision_}, {"points", points}};
    }

private:
    const SnapProvider& inner_;
    int precision_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, GeoPoint> recorded_;
};

} // namespace lorapl::snap
