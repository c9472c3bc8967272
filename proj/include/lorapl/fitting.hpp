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
#include "lorapl/models.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <ranges>
#include <span>
#include <vector>

namespace lorapl::fitting {

/// Anything that exposes a link distance and an observed path loss.
template <class T>
concept DistanceLossPoint = requires(const T& t) {
    { t.distance_m } -> std::convertible_to<double>;
    { t.pl_db } -> std::convertible_to<double>;
};

struct PathLossPoint {
    double distance_m;
    double pl_db;
};

struct DistanceBin {
    double center_m;
    double mean_pl_db;
    std::size_t count;
    /// Mean of log10(distance) over the bin members. The regression uses it
    /// instead of the center so noiseless data is reproduced exactly.
    double mean_log10_distance;
};

struct FitOptions {
    double d0_m = 1000.0;
    double bin_width_m = 10.0;
    /// Weight each bin by its sample count. Off by default; the reference
    /// procedure fits the plain binned means.
    bool weighted = false;
};

struct FitResult {
    models::LdplParams params;
    std::vector<double> residuals;
    double r_squared = 0.0;
    std::size_t sample_count = 0;
    std::vector<DistanceBin> bins;

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"n", params.n},
                {"pl_d0", params.pl_d0},
                {"d0", params.d0},
                {"sigma", params.sigma},
                {"r_squared", r_squared},
                {"sample_count", sample_count},
                {"bin_count", bins.size()}};
    }
};

/// Groups points into bins of `bin_width_m`; a point at distance d belongs
/// to the bin centered at floor(d / w) * w + w / 2.
template <std::ranges::input_range R>
    requires DistanceLossPoint<std::ranges::range_value_t<R>>
std::vector<DistanceBin> bin_by_distance(const R& points, double bin_width_m = 10.0)
{
    if (!(bin_width_m > 0.0))
        fail(errc::invalid_argument, "bin width must be positive");
    struct Acc {
        double pl = 0.0;
        double log_d = 0.0;
        std::size_t count = 0;
    };
    std::map<std::int64_t, Acc> acc;
    for (const auto& p : points) {
        const double d = p.distance_m;
        if (!(d > 0.0) || !std::isfinite(d))
            fail(errc::invalid_argument, "distances must be positive and finite");
        auto& a = acc[static_cast<std::int64_t>(std::floor(d / bin_width_m))];
        a.pl += p.pl_db;
        a.log_d += std::log10(d);
        ++a.count;
    }
    if (acc.empty())
        fail(errc::empty_input, "no points to bin");

    std::vector<DistanceBin> bins;
    bins.reserve(acc.size());
    for (const auto& [k, a] : acc) {
        const auto n = static_cast<double>(a.count);
        bins.push_back({static_cast<double>(k) * bin_width_m + bin_width_m / 2.0, a.pl / n, a.count,
                        a.log_d / n});
    }
    return bins;
}

struct LineFit {
    double n;
    double pl_d0;
    double r_squared;
};

/// Least squares of mean path loss against 10 log10(d / d0) over the bins.
inline LineFit fit_bins(std::span<const DistanceBin> bins, double d0_m, bool weighted = false)
{
    if (!(d0_m > 0.0))
        fail(errc::invalid_argument, "d0 must be positive");
    if (bins.size() < 2)
        fail(errc::degenerate_input, "need at least two distance bins, got " + std::to_string(bins.size()));

    const double log_d0 = std::log10(d0_m);
    auto x_of = [&](const DistanceBin& b) { return 10.0 * (b.mean_log10_distance - log_d0); };
    auto w_of = [&](const DistanceBin& b) { return weighted ? static_cast<double>(b.count) : 1.0; };

    double sw = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (const auto& b : bins) {
        const double w = w_of(b);
        sw += w;
        mx += w * x_of(b);
        my += w * b.mean_pl_db;
    }
    mx /= sw;
    my /= sw;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& b : bins) {
        const double w = w_of(b);
        const double dx = x_of(b) - mx;
        const double dy = b.mean_pl_db - my;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if (!(sxx > 0.0))
        fail(errc::degenerate_input, "all bins share one distance");

    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    double ss_res = 0.0;
    for (const auto& b : bins) {
        const double r = b.mean_pl_db - (intercept + slope * x_of(b));
        ss_res += w_of(b) * r * r;
    }
    double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    r2 = std::clamp(r2, 0.0, 1.0);
    return {slope, intercept, r2};
}

/// Fits the log-distance model to binned means, then measures shadowing on
/// the individual points: residuals and sigma are per point, not per bin.
template <std::ranges::forward_range R>
    requires DistanceLossPoint<std::ranges::range_value_t<R>>
FitResult fit_ldpl(const R& points, const FitOptions& options = {})
{
    FitResult out;
    out.bins = bin_by_distance(points, options.bin_width_m);
    const auto line = fit_bins(out.bins, options.d0_m, options.weighted);
    out.params = {line.n, line.pl_d0, options.d0_m, 0.0};
    out.r_squared = line.r_squared;

    for (const auto& p : points)
        out.residuals.push_back(p.pl_db - models::ldpl_db(out.params, p.distance_m));
    out.sample_count = out.residuals.size();

    double mean = 0.0;
    for (const double r : out.residuals)
        mean += r;
    mean /= static_cast<double>(out.residuals.size());
    double var = 0.0;
    for (const double r : out.residuals)
        var += (r - mean) * (r - mean);
    out.params.sigma = std::sqrt(var / static_cast<double>(out.residuals.size()));
    return out;
}

struct EcdfPoint {
    double value;
    double probability;
};

/// Right-continuous empirical CDF; one point per distinct value, last at 1.
inline std::vector<EcdfPoint> residual_ecdf(std::span<const double> residuals)
{
    if (residuals.empty())
        fail(errc::empty_input, "ECDF of an empty set");
    std::vector<double> sorted(residuals.begin(), residuals.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());

    std::vector<EcdfPoint> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i])
            continue;
        out.push_back({sorted[i], static_cast<double>(i + 1) / n});
    }
    out.back().probability = 1.0;
    return out;
}

struct NormalFit {
    double mean_db;
    double sigma_db;
};

/// Sample mean and population standard deviation.
inline NormalFit normal_fit(std::span<const double> values)
{
    if (values.size() < 2)
        fail(errc::empty_input, "normal fit needs at least two values");
    double mean = 0.0;
    for (const double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values)
        var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

} // namespace lorapl::fitting
