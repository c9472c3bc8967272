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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace lorapl::models {

using geo::LinkGeometry;

enum class CityClass { MediumSmall, Metropolitan };

/// Radio environment shared by every link of a campaign. Gateway height is
/// per link and lives in LinkGeometry; the sensor height here is the default
/// used when link geometry is built from sample records.
struct Environment {
    double freq_mhz = 868.1;
    double h_sensor_m = 2.0;
    CityClass city = CityClass::MediumSmall;

    void validate() const
    {
        if (!(freq_mhz > 0.0) || !std::isfinite(freq_mhz))
            fail(errc::invalid_argument, "frequency must be positive");
        if (!(h_sensor_m > 0.0) || !std::isfinite(h_sensor_m))
            fail(errc::invalid_argument, "sensor height must be positive");
    }
};

/// One-slope log-distance model: PL(d) = pl_d0 + 10 n log10(d / d0) + X_sigma.
struct LdplParams {
    double n = 2.0;
    double pl_d0 = 0.0;
    double d0 = 1000.0;
    double sigma = 0.0;

    void validate() const
    {
        if (!std::isfinite(n) || !std::isfinite(pl_d0))
            fail(errc::invalid_argument, "LDPL exponent and intercept must be finite");
        if (!(d0 > 0.0))
            fail(errc::invalid_argument, "LDPL reference distance must be positive");
        if (!(sigma >= 0.0))
            fail(errc::invalid_argument, "LDPL sigma must be non-negative");
    }
};

/// Two slopes sharing one intercept; the break point is continuous by construction.
struct DualSlopeParams {
    double n1 = 2.0;
    double n2 = 2.0;
    double pl_d0 = 0.0;
    double d0 = 1000.0;
    double d_break = 2000.0;
    double sigma = 0.0;

    void validate() const
    {
        if (!std::isfinite(n1) || !std::isfinite(n2) || !std::isfinite(pl_d0))
            fail(errc::invalid_argument, "dual-slope exponents and intercept must be finite");
        if (!(d0 > 0.0) || !(d_break > d0))
            fail(errc::invalid_argument, "dual-slope requires d_break > d0 > 0");
        if (!(sigma >= 0.0))
            fail(errc::invalid_argument, "dual-slope sigma must be non-negative");
    }
};

struct Fspl {};
struct OkumuraHata {};
struct CostHata {};
struct Egli {};
struct Ecc33 {};
struct WinnerPlusUmaNlos {};

using ModelVariant = std::variant<Fspl, LdplParams, DualSlopeParams, OkumuraHata, CostHata, Egli,
                                  Ecc33, WinnerPlusUmaNlos>;

/// A named, fully parameterized path-loss model. `sigma_db` is the shadowing
/// spread used for variants that do not carry their own (everything but the
/// log-distance family).
class ModelSpec {
public:
    ModelSpec(std::string name, ModelVariant model, double sigma_db = 0.0)
        : name_(std::move(name)), model_(std::move(model)), sigma_db_(sigma_db)
    {
        if (name_.empty())
            fail(errc::invalid_argument, "model name must not be empty");
        if (!(sigma_db_ >= 0.0))
            fail(errc::invalid_argument, "model sigma must be non-negative");
        std::visit(
            [](const auto& m) {
                if constexpr (requires { m.validate(); })
                    m.validate();
            },
            model_);
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const ModelVariant& model() const noexcept { return model_; }

    /// Shadow-fading standard deviation attached to this model.
    [[nodiscard]] double shadowing_sigma() const noexcept
    {
        if (const auto* p = std::get_if<LdplParams>(&model_))
            return p->sigma;
        if (const auto* p = std::get_if<DualSlopeParams>(&model_))
            return p->sigma;
        return sigma_db_;
    }

private:
    std::string name_;
    ModelVariant model_;
    double sigma_db_;
};

// Closed-form models. Distances are meters, frequencies MHz, heights meters.

inline double fspl_db(double d_m, double f_mhz)
{
    return 32.45 + 20.0 * std::log10(d_m / 1000.0) + 20.0 * std::log10(f_mhz);
}

inline double ldpl_db(const LdplParams& p, double d_m)
{
    return p.pl_d0 + 10.0 * p.n * std::log10(d_m / p.d0);
}

inline double dual_slope_db(const DualSlopeParams& p, double d_m)
{
    if (d_m <= p.d_break)
        return p.pl_d0 + 10.0 * p.n1 * std::log10(d_m / p.d0);
    return p.pl_d0 + 10.0 * p.n1 * std::log10(p.d_break / p.d0) +
           10.0 * p.n2 * std::log10(d_m / p.d_break);
}

/// Mobile antenna correction a(h_m) for small and medium-sized cities.
inline double hata_mobile_correction(double f_mhz, double h_m)
{
    const double log_f = std::log10(f_mhz);
    return (1.1 * log_f - 0.7) * h_m - (1.56 * log_f - 0.8);
}

inline double okumura_hata_db(double d_m, double f_mhz, double h_b, double h_m)
{
    const double log_f = std::log10(f_mhz);
    const double log_hb = std::log10(h_b);
    return 69.55 + 26.16 * log_f - 13.82 * log_hb - hata_mobile_correction(f_mhz, h_m) +
           (44.9 - 6.55 * log_hb) * std::log10(d_m / 1000.0);
}

inline double cost_hata_db(double d_m, double f_mhz, double h_b, double h_m, CityClass city)
{
    const double log_f = std::log10(f_mhz);
    const double log_hb = std::log10(h_b);
    const double c = city == CityClass::Metropolitan ? 3.0 : 0.0;
    return 46.3 + 33.9 * log_f - 13.82 * log_hb - hata_mobile_correction(f_mhz, h_m) +
           (44.9 - 6.55 * log_hb) * std::log10(d_m / 1000.0) + c;
}

inline double egli_db(double d_m, double f_mhz, double h_b, double h_m)
{
    return 20.0 * std::log10(f_mhz) + 40.0 * std::log10(d_m / 1000.0) - 20.0 * std::log10(h_b) +
           76.3 - 10.0 * std::log10(h_m);
}

/// ECC-33, medium city variant. The base-station gain term squares only
/// log10(d), as in the published recommendation.
inline double ecc33_db(double d_m, double f_mhz, double h_b, double h_m)
{
    const double d_km = d_m / 1000.0;
    const double log_d = std::log10(d_km);
    const double log_f = std::log10(f_mhz / 1000.0);

    const double free_space = 92.4 + 20.0 * log_d + 20.0 * log_f;
    const double basic_median = 20.41 + 9.83 * log_d + 7.894 * log_f + 9.56 * log_f * log_f;
    const double bs_gain = std::log10(h_b / 200.0) * (13.958 + 5.8 * log_d * log_d);
    const double rx_gain = (42.57 + 13.7 * log_f) * (std::log10(h_m) - 0.585);
    return free_space + basic_median - bs_gain - rx_gain;
}

inline double winner_plus_uma_nlos_db(double d_m, double f_mhz, double h_b)
{
    const double log_hb = std::log10(h_b);
    return (44.9 - 6.55 * log_hb) * std::log10(d_m) + 34.46 + 5.83 * log_hb +
           23.0 * std::log10(f_mhz / 1000.0 / 5.0);
}

/// Median path loss in dB (no shadowing term).
inline double predict(const ModelSpec& spec, const LinkGeometry& link, const Environment& env)
{
    const double d = link.distance_m;
    const double f = env.freq_mhz;
    const double hb = link.h_gw_m;
    const double hm = link.h_sensor_m;
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Fspl>)
                return fspl_db(d, f);
            else if constexpr (std::is_same_v<T, LdplParams>)
                return ldpl_db(m, d);
            else if constexpr (std::is_same_v<T, DualSlopeParams>)
                return dual_slope_db(m, d);
            else if constexpr (std::is_same_v<T, OkumuraHata>)
                return okumura_hata_db(d, f, hb, hm);
            else if constexpr (std::is_same_v<T, CostHata>)
                return cost_hata_db(d, f, hb, hm, env.city);
            else if constexpr (std::is_same_v<T, Egli>)
                return egli_db(d, f, hb, hm);
            else if constexpr (std::is_same_v<T, Ecc33>)
                return ecc33_db(d, f, hb, hm);
            else
                return winner_plus_uma_nlos_db(d, f, hb);
        },
        spec.model());
}

/// Median prediction plus one N(0, sigma) draw from a generator seeded with `seed`.
inline double sample_with_shadowing(const ModelSpec& spec, const LinkGeometry& link,
                                    const Environment& env, std::uint64_t seed)
{
    const double median = predict(spec, link, env);
    const double sigma = spec.shadowing_sigma();
    if (sigma == 0.0)
        return median;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shadow(0.0, sigma);
    return median + shadow(rng);
}

struct ValidityWarning {
    std::string model;
    std::string parameter;
    double value;
    double lo;
    double hi;

    [[nodiscard]] std::string message() const
    {
        return model + ": " + parameter + "=" + std::to_string(value) + " outside published range [" +
               std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }
};

/// Published validity windows of the empirical models. Out-of-range use is
/// reported, never refused.
inline std::vector<ValidityWarning> check_validity(const ModelSpec& spec, const LinkGeometry& link,
                                                   const Environment& env)
{
    struct Window {
        const char* parameter;
        double value;
        double lo;
        double hi;
    };
    std::vector<Window> windows;
    const double d_km = link.distance_m / 1000.0;

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, OkumuraHata>) {
                windows = {{"freq_mhz", env.freq_mhz, 150, 1500},
                           {"h_gw_m", link.h_gw_m, 30, 200},
                           {"h_sensor_m", link.h_sensor_m, 1, 10},
                           {"distance_km", d_km, 1, 20}};
            } else if constexpr (std::is_same_v<T, CostHata>) {
                windows = {{"freq_mhz", env.freq_mhz, 1500, 2000},
                           {"h_gw_m", link.h_gw_m, 30, 200},
                           {"h_sensor_m", link.h_sensor_m, 1, 10},
                           {"distance_km", d_km, 1, 20}};
            } else if constexpr (std::is_same_v<T, Egli>) {
                windows = {{"freq_mhz", env.freq_mhz, 40, 900},
                           {"h_sensor_m", link.h_sensor_m, 0, 10},
                           {"distance_km", d_km, 0, 60}};
            } else if constexpr (std::is_same_v<T, Ecc33>) {
                windows = {{"freq_mhz", env.freq_mhz, 700, 3500},
                           {"h_gw_m", link.h_gw_m, 20, 200},
                           {"distance_km", d_km, 1, 10}};
            } else if constexpr (std::is_same_v<T, WinnerPlusUmaNlos>) {
                windows = {{"freq_mhz", env.freq_mhz, 450, 6000},
                           {"distance_km", d_km, 0.05, 5}};
            }
        },
        spec.model());

    std::vector<ValidityWarning> out;
    for (const auto& w : windows)
        if (w.value < w.lo || w.value > w.hi)
            out.push_back({spec.name(), w.parameter, w.value, w.lo, w.hi});
    return out;
}

} // namespace lorapl::models
