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

#include "lorapl/catalog.hpp"
#include "lorapl/error.hpp"
#include "lorapl/fitting.hpp"
#include "lorapl/link_budget.hpp"
#include "lorapl/models.hpp"
#include "lorapl/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace lorapl::analysis {

/// A clean sample joined with its gateway: link geometry plus the measured
/// path loss under the gateway-specific budget.
struct Observation {
    std::size_t sample_index;
    double distance_m;
    double h_gw_m;
    double h_sensor_m;
    double pl_db;
    double rpp_dbm;
    LinkBudget budget;

    [[nodiscard]] geo::LinkGeometry link() const noexcept { return {distance_m, h_gw_m, h_sensor_m}; }
};

inline std::vector<Observation> make_observations(const std::vector<Sample>& samples,
                                                  const GatewayRegistry& gateways,
                                                  const LinkBudget& budget, double h_sensor_m)
{
    std::vector<Observation> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const Gateway& gw = gateways.at(s.gateway_id);
        const auto link = link_geometry(s.pos, gw, h_sensor_m);
        const auto b = budget.for_gateway(gw);
        out.push_back({i, link.distance_m, link.h_gw_m, link.h_sensor_m,
                       path_loss_from_rpp(s.rpp_dbm, b), s.rpp_dbm, b});
    }
    return out;
}

struct ErrorSample {
    std::string model_name;
    double distance_m;
    /// Measured minus predicted RPP; negative means the model overestimates.
    double epsilon_db;
};

inline double rmse(std::span<const double> errors)
{
    if (errors.empty())
        fail(errc::empty_input, "RMSE of an empty error series");
    double sum = 0.0;
    for (const double e : errors)
        sum += e * e;
    return std::sqrt(sum / static_cast<double>(errors.size()));
}

struct BiasBin {
    double lo_m;
    double hi_m;
    std::size_t count = 0;
    double mean_db = 0.0;
    double p25_db = 0.0;
    double p75_db = 0.0;
    /// No error sample fell into [lo, hi); the statistics are meaningless.
    bool empty = true;
};

namespace detail {

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace detail

inline std::vector<double> uniform_edges(double width_m, double max_m)
{
    if (!(width_m > 0.0) || !(max_m > 0.0))
        fail(errc::invalid_argument, "bin width and range must be positive");
    std::vector<double> edges;
    const auto n = static_cast<std::size_t>(std::ceil(max_m / width_m - 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
        edges.push_back(static_cast<double>(i) * width_m);
    return edges;
}

/// Mean and interquartile range of epsilon per distance bin [lo, hi), per
/// model. Errors outside the outermost edges are ignored.
inline std::map<std::string, std::vector<BiasBin>> distance_bias(std::span<const ErrorSample> errors,
                                                                 std::span<const double> edges)
{
    if (errors.empty())
        fail(errc::empty_input, "no error samples");
    if (edges.size() < 2)
        fail(errc::invalid_argument, "need at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            fail(errc::invalid_argument, "bin edges must be strictly increasing");

    std::map<std::string, std::vector<std::vector<double>>> grouped;
    for (const auto& e : errors) {
        auto& bins = grouped[e.model_name];
        if (bins.empty())
            bins.resize(edges.size() - 1);
        const auto it = std::upper_bound(edges.begin(), edges.end(), e.distance_m);
        if (it == edges.begin() || it == edges.end())
            continue;
        bins[static_cast<std::size_t>(it - edges.begin()) - 1].push_back(e.epsilon_db);
    }

    std::map<std::string, std::vector<BiasBin>> out;
    for (auto& [name, bins] : grouped) {
        auto& series = out[name];
        for (std::size_t i = 0; i < bins.size(); ++i) {
            BiasBin b{edges[i], edges[i + 1]};
            auto& v = bins[i];
            if (!v.empty()) {
                std::sort(v.begin(), v.end());
                double sum = 0.0;
                for (const double x : v)
                    sum += x;
                b.count = v.size();
                b.mean_db = sum / static_cast<double>(v.size());
                b.p25_db = detail::quantile_sorted(v, 0.25);
                b.p75_db = detail::quantile_sorted(v, 0.75);
                b.empty = false;
            }
            series.push_back(b);
        }
    }
    return out;
}

struct ModelEvaluation {
    std::string name;
    double rmse_db = 0.0;
    double mean_error_db = 0.0;
    std::size_t count = 0;
    /// Links evaluated outside the model's published validity window.
    std::size_t out_of_range = 0;
    std::vector<std::string> warnings;
    std::vector<BiasBin> bias;
};

struct EvalReport {
    std::vector<ModelEvaluation> models;
    std::vector<ErrorSample> errors;

    [[nodiscard]] const ModelEvaluation* find(const std::string& name) const
    {
        for (const auto& m : models)
            if (m.name == name)
                return &m;
        return nullptr;
    }
};

/// Runs every catalog model against every observation and reports RMSE of
/// epsilon = RPP_measured - RPP_predicted plus its distance-binned bias.
inline EvalReport evaluate_observations(std::span<const Observation> observations,
                                        const models::Catalog& catalog, const models::Environment& env,
                                        std::span<const double> bias_edges)
{
    if (observations.empty())
        fail(errc::empty_input, "no samples to evaluate");
    if (catalog.models.empty())
        fail(errc::empty_input, "catalog has no enabled models");
    env.validate();

    EvalReport report;
    report.errors.reserve(observations.size() * catalog.models.size());
    for (const auto& model : catalog.models) {
        ModelEvaluation eval;
        eval.name = model.name();
        std::vector<double> eps;
        eps.reserve(observations.size());
        std::set<std::string> distinct_warnings;
        for (const auto& o : observations) {
            const auto link = o.link();
            const double predicted = predicted_rpp(models::predict(model, link, env), o.budget);
            const double e = o.rpp_dbm - predicted;
            eps.push_back(e);
            report.errors.push_back({model.name(), o.distance_m, e});
            const auto warnings = models::check_validity(model, link, env);
            if (!warnings.empty()) {
                ++eval.out_of_range;
                for (const auto& w : warnings)
                    distinct_warnings.insert(model.name() + ": " + w.parameter + " outside [" +
                                             std::to_string(w.lo) + ", " + std::to_string(w.hi) + "]");
            }
        }
        eval.count = eps.size();
        eval.rmse_db = rmse(eps);
        double sum = 0.0;
        for (const double e : eps)
            sum += e;
        eval.mean_error_db = sum / static_cast<double>(eps.size());
        eval.warnings.assign(distinct_warnings.begin(), distinct_warnings.end());
        report.models.push_back(std::move(eval));
    }

    if (!bias_edges.empty()) {
        const auto bias = distance_bias(report.errors, bias_edges);
        for (auto& m : report.models)
            if (const auto it = bias.find(m.name); it != bias.end())
                m.bias = it->second;
    }
    return report;
}

inline EvalReport evaluate_models(const std::vector<Sample>& samples, const GatewayRegistry& gateways,
                                  const LinkBudget& budget, const models::Catalog& catalog,
                                  const models::Environment& env, std::span<const double> bias_edges)
{
    if (samples.empty())
        fail(errc::empty_input, "no samples to evaluate");
    const auto obs = make_observations(samples, gateways, budget, env.h_sensor_m);
    return evaluate_observations(obs, catalog, env, bias_edges);
}

struct ProgressionPoint {
    double max_distance_m;
    std::optional<models::LdplParams> params;
    std::size_t sample_count = 0;
    std::size_t bin_count = 0;
    /// Set when the sub-sample could not be fitted (too few distinct bins).
    std::string skipped;
};

/// Refits the log-distance model on the links no longer than each D.
template <std::ranges::forward_range R>
    requires fitting::DistanceLossPoint<std::ranges::range_value_t<R>>
std::vector<ProgressionPoint> coefficient_progression(const R& points, std::span<const double> max_distances,
                                                      const fitting::FitOptions& options = {})
{
    std::vector<ProgressionPoint> out;
    for (const double max_d : max_distances) {
        std::vector<fitting::PathLossPoint> subset;
        for (const auto& p : points)
            if (p.distance_m <= max_d)
                subset.push_back({p.distance_m, p.pl_db});
        ProgressionPoint pt;
        pt.max_distance_m = max_d;
        pt.sample_count = subset.size();
        try {
            if (subset.empty())
                fail(errc::degenerate_input, "no samples within " + std::to_string(max_d) + " m");
            const auto fit = fitting::fit_ldpl(subset, options);
            pt.params = fit.params;
            pt.bin_count = fit.bins.size();
        } catch (const error& e) {
            if (e.code() != errc::degenerate_input && e.code() != errc::empty_input)
                throw;
            pt.skipped = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

struct ConvergenceOptions {
    fitting::FitOptions fit;
    std::size_t repeats = 20;
    std::uint64_t seed = 20210927;
    /// Score each fit on its own subset instead of the full population.
    bool rmse_on_subset = false;
};

struct Spread {
    double mean = 0.0;
    double std = 0.0;
};

struct ConvergencePoint {
    std::size_t subset_size;
    std::size_t repeats;
    Spread rmse_db;
    Spread n;
    Spread pl_d0_db;
};

namespace detail {

inline Spread spread(const std::vector<double>& v)
{
    double mean = 0.0;
    for (const double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (const double x : v)
        var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

inline double ldpl_rmse(std::span<const fitting::PathLossPoint> points, const models::LdplParams& p)
{
    double sum = 0.0;
    for (const auto& pt : points) {
        const double r = pt.pl_db - models::ldpl_db(p, pt.distance_m);
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(points.size()));
}

} // namespace detail

/// For each subset size k: draw k points uniformly without replacement,
/// fit, and score the fit. Repeat r uses its own generator seeded from
/// (seed, k, r), so results do not depend on scheduling.
template <std::ranges::forward_range R>
    requires fitting::DistanceLossPoint<std::ranges::range_value_t<R>>
std::vector<ConvergencePoint> rmse_convergence(const R& points, std::span<const std::size_t> subset_sizes,
                                               const ConvergenceOptions& options = {})
{
    std::vector<fitting::PathLossPoint> population;
    for (const auto& p : points)
        population.push_back({p.distance_m, p.pl_db});
    if (population.empty())
        fail(errc::empty_input, "no samples for convergence analysis");
    if (options.repeats == 0)
        fail(errc::invalid_argument, "repeats must be positive");
    for (const auto k : subset_sizes)
        if (k > population.size())
            fail(errc::size_exceeds_population, "subset size " + std::to_string(k) + " exceeds population " +
                                                    std::to_string(population.size()));

    struct Trial {
        double rmse;
        models::LdplParams params;
    };
    auto run_trial = [&](std::size_t k, std::size_t r) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        std::vector<fitting::PathLossPoint> subset;
        subset.reserve(k);
        std::sample(population.begin(), population.end(), std::back_inserter(subset), k, rng);
        const auto fit = fitting::fit_ldpl(subset, options.fit);
        const auto& scored = options.rmse_on_subset ? subset : population;
        return Trial{detail::ldpl_rmse(scored, fit.params), fit.params};
    };

    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::vector<ConvergencePoint> out;
    for (const auto k : subset_sizes) {
        std::vector<Trial> trials(options.repeats);
        for (std::size_t start = 0; start < options.repeats; start += workers) {
            std::vector<std::future<Trial>> batch;
            const std::size_t end = std::min(options.repeats, start + workers);
            for (std::size_t r = start; r < end; ++r)
                batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_trial, k, r));
            for (std::size_t r = start; r < end; ++r)
                trials[r] = batch[r - start].get();
        }
        std::vector<double> rmses;
        std::vector<double> ns;
        std::vector<double> pls;
        for (const auto& t : trials) {
            rmses.push_back(t.rmse);
            ns.push_back(t.params.n);
            pls.push_back(t.params.pl_d0);
        }
        out.push_back({k, options.repeats, detail::spread(rmses), detail::spread(ns), detail::spread(pls)});
    }
    return out;
}

struct GatewayHistogram {
    std::size_t packets = 0;
    /// Number of distinct receiving gateways -> share of packets.
    std::map<std::size_t, double> share;
    double mean_receptions = 0.0;
    double share_multi = 0.0;
};

inline GatewayHistogram gateway_reception_histogram(const std::vector<Sample>& samples)
{
    std::map<std::string, std::set<std::string>> receivers;
    for (const auto& s : samples)
        receivers[s.packet_id].insert(s.gateway_id);

    GatewayHistogram h;
    h.packets = receivers.size();
    if (h.packets == 0)
        return h;
    std::map<std::size_t, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& [id, gws] : receivers) {
        ++counts[gws.size()];
        total += gws.size();
    }
    const auto packets = static_cast<double>(h.packets);
    for (const auto& [c, n] : counts) {
        h.share[c] = static_cast<double>(n) / packets;
        if (c >= 2)
            h.share_multi += static_cast<double>(n) / packets;
    }
    h.mean_receptions = static_cast<double>(total) / packets;
    return h;
}

/// Demodulation floors in dBm per spreading factor (125 kHz).
using SensitivityTable = std::map<int, double>;

inline SensitivityTable default_sensitivity()
{
    return {{7, -123.0}, {8, -126.0}, {9, -129.0}, {10, -132.0}, {11, -134.5}, {12, -137.0}};
}

struct SfFeasibility {
    std::size_t packets = 0;
    /// Share of packets whose strongest reception clears the floor of each SF.
    std::map<int, double> share_by_sf;
    double share_sf7 = 0.0;
};

/// Uses the best RPP of each packet across all gateways that received it.
inline SfFeasibility sf_feasibility(const std::vector<Sample>& samples, const SensitivityTable& floors)
{
    for (int sf = 7; sf <= 12; ++sf)
        if (!floors.count(sf))
            fail(errc::invalid_argument, "sensitivity table lacks SF" + std::to_string(sf));

    std::map<std::string, double> best;
    for (const auto& s : samples) {
        const auto [it, inserted] = best.emplace(s.packet_id, s.rpp_dbm);
        if (!inserted)
            it->second = std::max(it->second, s.rpp_dbm);
    }
    SfFeasibility out;
    out.packets = best.size();
    for (const auto& [sf, floor_dbm] : floors) {
        std::size_t ok = 0;
        for (const auto& [id, rpp] : best)
            if (rpp >= floor_dbm)
                ++ok;
        out.share_by_sf[sf] = out.packets ? static_cast<double>(ok) / static_cast<double>(out.packets) : 0.0;
    }
    out.share_sf7 = out.share_by_sf.at(7);
    return out;
}

} // namespace lorapl::analysis
