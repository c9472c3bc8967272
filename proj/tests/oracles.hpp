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

// Independent reference computations used only by the tests. Nothing here
// calls into the library paths it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr double earth_radius_m = 6'371'000.0;

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Great-circle distance by the spherical law of cosines.
inline double law_of_cosines_m(double lat1, double lon1, double lat2, double lon2)
{
    const double c = std::sin(rad(lat1)) * std::sin(rad(lat2)) +
                     std::cos(rad(lat1)) * std::cos(rad(lat2)) * std::cos(rad(lon2 - lon1));
    return earth_radius_m * std::acos(std::clamp(c, -1.0, 1.0));
}

/// Latitude reached by moving `meters` due north along a meridian.
inline double lat_north_of(double lat, double meters)
{
    return lat + meters / earth_radius_m * 180.0 / std::numbers::pi;
}

/// Hand-written free-space loss: 32.45 + 20 log10(d_km) + 20 log10(f_MHz).
inline double free_space_db(double d_m, double f_mhz)
{
    return 32.45 + 20.0 * std::log10(d_m / 1000.0) + 20.0 * std::log10(f_mhz);
}

inline double normal_cdf(double x, double sigma)
{
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

inline double brute_rmse(const std::vector<double>& e)
{
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i)
        s += e[i] * e[i];
    return std::sqrt(s / static_cast<double>(e.size()));
}

/// Minimizes squared error of y ~ a + b x by exhaustive search over a grid
/// of spacing `step`. Returns (slope, intercept).
inline std::pair<double, double> grid_search_line(const std::vector<double>& x, const std::vector<double>& y,
                                                  double slope_lo, double slope_hi, double icpt_lo,
                                                  double icpt_hi, double step)
{
    double best = std::numeric_limits<double>::infinity();
    std::pair<double, double> arg{0.0, 0.0};
    const auto ns = static_cast<long>(std::llround((slope_hi - slope_lo) / step));
    const auto ni = static_cast<long>(std::llround((icpt_hi - icpt_lo) / step));
    for (long i = 0; i <= ns; ++i) {
        const double b = slope_lo + static_cast<double>(i) * step;
        for (long j = 0; j <= ni; ++j) {
            const double a = icpt_lo + static_cast<double>(j) * step;
            double sse = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double r = y[k] - a - b * x[k];
                sse += r * r;
            }
            if (sse < best) {
                best = sse;
                arg = {b, a};
            }
        }
    }
    return arg;
}

} // namespace oracle
