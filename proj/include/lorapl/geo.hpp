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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace lorapl::geo {

inline constexpr double earth_radius_m = 6'371'000.0;

constexpr double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

/// WGS84-style coordinate. Construction validates the ranges, so any
/// GeoPoint in flight is known to be well-formed.
class GeoPoint {
public:
    GeoPoint(double lat_deg, double lon_deg, std::optional<double> alt_m = std::nullopt)
        : lat_(lat_deg), lon_(lon_deg), alt_(alt_m)
    {
        if (!(lat_deg >= -90.0 && lat_deg <= 90.0))
            fail(errc::invalid_argument, "latitude out of range [-90, 90]: " + std::to_string(lat_deg));
        if (!(lon_deg >= -180.0 && lon_deg <= 180.0))
            fail(errc::invalid_argument, "longitude out of range [-180, 180]: " + std::to_string(lon_deg));
        if (alt_m && !std::isfinite(*alt_m))
            fail(errc::invalid_argument, "altitude is not finite");
    }

    [[nodiscard]] double lat() const noexcept { return lat_; }
    [[nodiscard]] double lon() const noexcept { return lon_; }
    [[nodiscard]] const std::optional<double>& alt() const noexcept { return alt_; }

    /// Same ground position, altitude replaced.
    [[nodiscard]] GeoPoint with_alt(std::optional<double> alt_m) const { return {lat_, lon_, alt_m}; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_;
    double lon_;
    std::optional<double> alt_;
};

/// Great-circle ground distance in meters. Altitude is ignored.
inline double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept
{
    const double phi1 = deg_to_rad(a.lat());
    const double phi2 = deg_to_rad(b.lat());
    const double dphi = phi2 - phi1;
    const double dlambda = deg_to_rad(b.lon() - a.lon());

    const double s_phi = std::sin(dphi / 2.0);
    const double s_lambda = std::sin(dlambda / 2.0);
    const double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lambda * s_lambda;
    return 2.0 * earth_radius_m * std::asin(std::sqrt(std::min(1.0, h)));
}

/// Point reached after travelling `distance_m` along the great circle that
/// leaves `start` with initial bearing `bearing_rad` (clockwise from north).
inline GeoPoint destination_point(const GeoPoint& start, double bearing_rad, double distance_m)
{
    const double delta = distance_m / earth_radius_m;
    const double phi1 = deg_to_rad(start.lat());
    const double lambda1 = deg_to_rad(start.lon());

    const double sin_phi2 =
        std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lambda2 =
        lambda1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                             std::cos(delta) - std::sin(phi1) * sin_phi2);

    double lon = rad_to_deg(lambda2);
    lon = std::remainder(lon, 360.0);
    return {std::clamp(rad_to_deg(phi2), -90.0, 90.0), std::clamp(lon, -180.0, 180.0), start.alt()};
}

struct LinkGeometry {
    double distance_m;
    double h_gw_m;
    double h_sensor_m;
};

/// Ground geometry of one sensor-to-gateway link. Coincident positions are
/// rejected because every log-distance model is undefined at d = 0.
inline LinkGeometry link_geometry(const GeoPoint& sensor, const GeoPoint& gateway, double h_gw_m,
                                  double h_sensor_m)
{
    if (!(h_gw_m > 0.0) || !(h_sensor_m > 0.0))
        fail(errc::invalid_argument, "antenna heights must be positive");
    const double d = haversine_distance(sensor, gateway);
    if (!(d > 0.0))
        fail(errc::zero_distance, "sensor position coincides with gateway position");
    return {d, h_gw_m, h_sensor_m};
}

} // namespace lorapl::geo
