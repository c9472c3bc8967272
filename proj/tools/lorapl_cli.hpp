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
#include "lorapl/catalog.hpp"
#include "lorapl/config.hpp"
#include "lorapl/csv.hpp"
#include "lorapl/filters.hpp"
#include "lorapl/fitting.hpp"
#include "lorapl/snap.hpp"
#include "lorapl/snap_http.hpp"
#include "lorapl/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace lorapl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_environment = 2;

namespace detail {

inline std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io, "cannot write '" + path.string() + "'");
    return out;
}

inline void write_json(const fs::path& path, const json& doc)
{
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    if (!out)
        fail(errc::io, "write failed for '" + path.string() + "'");
}

inline std::string num(double v) { return csv::format_double(v); }

struct Inputs {
    std::vector<Sample> samples;
    std::vector<csv::RowReject> rejects;
    std::optional<GatewayRegistry> gateways;
};

inline Inputs load_inputs(const config::RunConfig& cfg, bool with_gateways)
{
    Inputs in;
    auto parsed = csv::load_samples(cfg.samples, cfg.columns);
    in.samples = std::move(parsed.rows);
    in.rejects = std::move(parsed.rejects);
    if (with_gateways)
        in.gateways.emplace(csv::load_gateways(cfg.gateways));
    return in;
}

inline models::Catalog load_catalog(const config::RunConfig& cfg)
{
    return cfg.catalog.empty() ? models::default_catalog() : models::load_catalog(cfg.catalog);
}

inline void write_sample_rows(std::ostream& out, const std::vector<Sample>& samples,
                              const std::vector<std::string>& extra_header,
                              const std::vector<std::vector<std::string>>& extra)
{
    std::ostringstream body;
    csv::write_samples(body, samples);
    std::istringstream lines(body.str());
    std::string line;
    std::size_t row = 0;
    bool header = true;
    while (std::getline(lines, line)) {
        out << line;
        if (header) {
            for (const auto& h : extra_header)
                out << ',' << h;
            header = false;
        } else {
            for (const auto& v : extra[row])
                out << ',' << csv::quote(v);
            ++row;
        }
        out << '\n';
    }
}

inline json fit_json(const fitting::FitResult& fit) { return fit.to_json(); }

inline void write_fit_artifacts(const fs::path& dir, const fitting::FitResult& fit)
{
    write_json(dir / "fit.json", fit_json(fit));
    auto ecdf = open_out(dir / "ecdf.csv");
    ecdf << "residual_db,probability\n";
    for (const auto& p : fitting::residual_ecdf(fit.residuals))
        ecdf << num(p.value) << ',' << num(p.probability) << '\n';
    auto bins = open_out(dir / "bins.csv");
    bins << "center_m,mean_log10_distance,mean_pl_db,count\n";
    for (const auto& b : fit.bins)
        bins << num(b.center_m) << ',' << num(b.mean_log10_distance) << ',' << num(b.mean_pl_db) << ','
             << b.count << '\n';
}

inline json eval_json(const analysis::EvalReport& report)
{
    json models = json::array();
    for (const auto& m : report.models)
        models.push_back({{"model", m.name},
                          {"rmse_db", m.rmse_db},
                          {"mean_error_db", m.mean_error_db},
                          {"count", m.count},
                          {"out_of_range", m.out_of_range},
                          {"warnings", m.warnings}});
    return models;
}

inline void write_eval_artifacts(const fs::path& dir, const analysis::EvalReport& report)
{
    auto table = open_out(dir / "model_rmse.csv");
    table << "model,rmse_db,mean_error_db,count,out_of_range\n";
    for (const auto& m : report.models)
        table << csv::quote(m.name) << ',' << num(m.rmse_db) << ',' << num(m.mean_error_db) << ',' << m.count
              << ',' << m.out_of_range << '\n';
    auto bias = open_out(dir / "distance_bias.csv");
    bias << "model,lo_m,hi_m,count,mean_db,p25_db,p75_db,empty\n";
    for (const auto& m : report.models)
        for (const auto& b : m.bias) {
            bias << csv::quote(m.name) << ',' << num(b.lo_m) << ',' << num(b.hi_m) << ',' << b.count << ',';
            if (b.empty)
                bias << ",,,true\n";
            else
                bias << num(b.mean_db) << ',' << num(b.p25_db) << ',' << num(b.p75_db) << ",false\n";
        }
    write_json(dir / "eval_summary.json", {{"models", eval_json(report)}});
}

inline json progression_json(const std::vector<analysis::ProgressionPoint>& prog)
{
    json rows = json::array();
    for (const auto& p : prog) {
        json row = {{"max_distance_m", p.max_distance_m}, {"sample_count", p.sample_count}, {"bin_count", p.bin_count}};
        if (p.params) {
            row["n"] = p.params->n;
            row["pl_d0"] = p.params->pl_d0;
            row["sigma"] = p.params->sigma;
        } else {
            row["skipped"] = p.skipped;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_progression(const fs::path& dir, const std::vector<analysis::ProgressionPoint>& prog)
{
    auto out = open_out(dir / "progression.csv");
    out << "max_distance_m,n,pl_d0_db,sigma_db,sample_count,bin_count,skipped\n";
    for (const auto& p : prog) {
        out << num(p.max_distance_m) << ',';
        if (p.params)
            out << num(p.params->n) << ',' << num(p.params->pl_d0) << ',' << num(p.params->sigma);
        else
            out << ",,";
        out << ',' << p.sample_count << ',' << p.bin_count << ',' << csv::quote(p.skipped) << '\n';
    }
}

inline json convergence_json(const std::vector<analysis::ConvergencePoint>& conv)
{
    json rows = json::array();
    for (const auto& c : conv)
        rows.push_back({{"subset_size", c.subset_size},
                        {"repeats", c.repeats},
                        {"rmse_mean_db", c.rmse_db.mean},
                        {"rmse_std_db", c.rmse_db.std},
                        {"n_mean", c.n.mean},
                        {"n_std", c.n.std},
                        {"pl_d0_mean_db", c.pl_d0_db.mean},
                        {"pl_d0_std_db", c.pl_d0_db.std}});
    return rows;
}

inline void write_convergence(const fs::path& dir, const std::vector<analysis::ConvergencePoint>& conv)
{
    auto out = open_out(dir / "convergence.csv");
    out << "subset_size,repeats,rmse_mean_db,rmse_std_db,n_mean,n_std,pl_d0_mean_db,pl_d0_std_db\n";
    for (const auto& c : conv)
        out << c.subset_size << ',' << c.repeats << ',' << num(c.rmse_db.mean) << ',' << num(c.rmse_db.std) << ','
            << num(c.n.mean) << ',' << num(c.n.std) << ',' << num(c.pl_d0_db.mean) << ',' << num(c.pl_d0_db.std)
            << '\n';
}

/// Explicit sizes must fit the population; the default ladder is cut at it.
inline std::vector<std::size_t> subset_sizes(const config::RunConfig& cfg, std::size_t population)
{
    if (!cfg.subset_sizes.empty())
        return cfg.subset_sizes;
    std::vector<std::size_t> sizes;
    for (const std::size_t k : {1000, 2000, 5000, 10'000, 20'000, 30'000, 50'000, 75'000, 100'000})
        if (k <= population)
            sizes.push_back(k);
    if (sizes.empty() && population >= 2)
        sizes.push_back(population);
    return sizes;
}

inline json histogram_json(const analysis::GatewayHistogram& h)
{
    json share = json::object();
    for (const auto& [k, v] : h.share)
        share[std::to_string(k)] = v;
    return {{"packets", h.packets},
            {"share_by_gateway_count", share},
            {"mean_receptions", h.mean_receptions},
            {"share_multi_gateway", h.share_multi}};
}

inline json sf_json(const analysis::SfFeasibility& f)
{
    json share = json::object();
    for (const auto& [sf, v] : f.share_by_sf)
        share["SF" + std::to_string(sf)] = v;
    return {{"packets", f.packets}, {"share_by_sf", share}, {"share_sf7", f.share_sf7}};
}

inline json ingest_json(const Inputs& in)
{
    std::set<std::string> packets;
    std::map<std::string, std::size_t> per_gateway;
    std::size_t unknown = 0;
    for (const auto& s : in.samples) {
        packets.insert(s.packet_id);
        ++per_gateway[s.gateway_id];
        if (in.gateways && !in.gateways->contains(s.gateway_id))
            ++unknown;
    }
    json doc = {{"rows", in.samples.size() + in.rejects.size()},
                {"valid", in.samples.size()},
                {"rejected", in.rejects.size()},
                {"packets", packets.size()},
                {"samples_per_gateway", per_gateway}};
    if (in.gateways) {
        doc["gateways"] = in.gateways->size();
        doc["unknown_gateway_samples"] = unknown;
    }
    return doc;
}

struct Provider {
    std::unique_ptr<snap::SnapProvider> base;
    std::unique_ptr<snap::RecordingProvider> recorder;

    [[nodiscard]] const snap::SnapProvider& get() const { return recorder ? *recorder : *base; }
};

inline Provider make_provider(const config::RunConfig& cfg)
{
    Provider p;
    if (cfg.snap == "identity") {
        p.base = std::make_unique<snap::IdentityProvider>();
    } else if (cfg.snap.rfind("fixture:", 0) == 0) {
        p.base = std::make_unique<snap::FixtureProvider>(snap::FixtureProvider::from_file(cfg.snap.substr(8)));
    } else {
        snap::OsrmOptions o;
        o.retries = cfg.snap_retries;
        o.timeout_s = cfg.snap_timeout_s;
        o.max_in_flight = cfg.snap_max_in_flight;
        p.base = std::make_unique<snap::OsrmProvider>(cfg.snap.substr(5), o);
        p.recorder = std::make_unique<snap::RecordingProvider>(*p.base);
    }
    return p;
}

inline filters::FilterResult run_filter(const config::RunConfig& cfg, const Inputs& in, const fs::path& dir,
                                        bool write_files)
{
    const auto provider = make_provider(cfg);
    auto result = filters::apply_filters(in.samples, *in.gateways, cfg.filter_config(), provider.get());
    if (!write_files)
        return result;

    write_json(dir / "filter_report.json", result.report.to_json());
    {
        auto out = open_out(dir / "clean_samples.csv");
        csv::write_samples(out, result.clean);
    }
    {
        std::vector<Sample> rows;
        std::vector<std::vector<std::string>> extra;
        for (const auto& r : result.rejected) {
            rows.push_back(r.sample);
            extra.push_back({std::string(filters::to_string(r.reason)), r.detail});
        }
        auto out = open_out(dir / "filter_rejects.csv");
        write_sample_rows(out, rows, {"reason", "detail"}, extra);
    }
    {
        std::vector<Sample> rows;
        std::vector<std::vector<std::string>> extra;
        for (const auto& q : result.quarantined) {
            rows.push_back(q.sample);
            extra.push_back({q.error});
        }
        auto out = open_out(dir / "quarantine.csv");
        write_sample_rows(out, rows, {"error"}, extra);
    }
    if (provider.recorder)
        write_json(dir / "snap_cache.json", provider.recorder->to_fixture());
    return result;
}

} // namespace detail

/// Runs one subcommand. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 invalid input or configuration, 2 I/O or
/// snap provider failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr)
{
    CLI::App app{"LoRa path-loss measurement toolkit", "lorapl"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file; flags override it");

    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    static constexpr Flag flags[] = {
        {"--samples", "samples", "sample CSV"},
        {"--gateways", "gateways", "gateway CSV"},
        {"--catalog", "catalog", "model catalog JSON (built-in catalog if omitted)"},
        {"--out", "out", "output directory"},
        {"--seed", "seed", "seed for subsampling and synthesis"},
        {"--snap", "snap", "identity | fixture:<path> | live:<url>"},
        {"--max-offset-m", "max_offset_m", "largest accepted snap offset"},
        {"--min-satellites", "min_satellites", "fewest accepted GNSS satellites"},
        {"--max-altitude-m", "max_altitude_m", "highest plausible sensor altitude"},
        {"--bin-width-m", "bin_width_m", "distance bin width of the fit"},
        {"--d0-m", "d0_m", "reference distance of the fit"},
        {"--subset-sizes", "subset_sizes", "comma-separated subset sizes for convergence"},
        {"--repeats", "repeats", "draws per subset size"},
        {"--count", "synth.count", "number of synthetic samples"},
    };
    std::vector<std::pair<CLI::Option*, std::string>> given;
    std::vector<std::string> values(std::size(flags));
    for (std::size_t i = 0; i < std::size(flags); ++i)
        given.emplace_back(app.add_option(flags[i].name, values[i], flags[i].help), flags[i].key);
    bool weighted = false;
    bool rmse_on_subset = false;
    app.add_flag("--weighted", weighted, "weight bins by sample count");
    app.add_flag("--rmse-on-subset", rmse_on_subset, "score convergence fits on their own subset");

    const char* names[][2] = {
        {"ingest", "parse and validate samples"},
        {"filter", "apply the post-processing chain"},
        {"fit", "fit the log-distance model"},
        {"eval", "score every catalog model"},
        {"progression", "refit with growing maximum distance"},
        {"convergence", "fit spread across random subsets"},
        {"synth", "generate a synthetic campaign"},
        {"report", "filter, fit, evaluate and summarise in one JSON"},
    };
    for (const auto& [name, help] : names)
        app.add_subcommand(name, help)->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "lorapl: " << e.what() << '\n';
        return exit_validation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        config::RunConfig cfg;
        if (!config_path.empty())
            config::apply_file(cfg, config_path);
        for (std::size_t i = 0; i < given.size(); ++i)
            if (given[i].first->count() > 0)
                config::set(cfg, given[i].second, values[i]);
        if (weighted)
            cfg.fit.weighted = true;
        if (rmse_on_subset)
            cfg.rmse_on_subset = true;

        config::Needs needs;
        needs.samples = command != "synth";
        needs.gateways = command != "ingest" && command != "synth";
        needs.filter = command == "filter" || command == "report";
        config::validate(cfg, needs);

        const fs::path dir = cfg.out;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            fail(errc::io, "cannot create output directory '" + cfg.out + "': " + ec.message());

        if (command == "synth") {
            auto layout = cfg.gateways.empty() ? synth::default_layout() : csv::load_gateways(cfg.gateways);
            const auto campaign = synth::generate(cfg.synth_config(std::move(layout)));
            {
                auto f = detail::open_out(dir / "samples.csv");
                csv::write_samples(f, campaign.samples);
            }
            auto g = detail::open_out(dir / "gateways.csv");
            csv::write_gateways(g, campaign.gateways);
            out << "synth: " << campaign.samples.size() << " samples -> " << dir.string() << '\n';
            return exit_ok;
        }

        if (command == "ingest") {
            const auto in = detail::load_inputs(cfg, !cfg.gateways.empty());
            detail::write_json(dir / "ingest_summary.json", detail::ingest_json(in));
            auto f = detail::open_out(dir / "rejects.csv");
            csv::write_rejects(f, in.rejects);
            out << "ingest: " << in.samples.size() << " valid, " << in.rejects.size() << " rejected\n";
            return exit_ok;
        }

        // Everything below needs a catalog or gateways; load them before any
        // heavy work so a broken input fails fast.
        const auto catalog = detail::load_catalog(cfg);
        const auto in = detail::load_inputs(cfg, true);
        if (!in.rejects.empty())
            err << "lorapl: skipped " << in.rejects.size() << " malformed sample rows\n";

        if (command == "filter") {
            const auto r = detail::run_filter(cfg, in, dir, true);
            out << "filter: " << r.report.input << " -> " << r.report.output << " ("
                << r.report.quarantined << " quarantined)\n";
            return exit_ok;
        }

        if (command == "report") {
            const auto filtered = detail::run_filter(cfg, in, dir, false);
            const auto obs = analysis::make_observations(filtered.clean, *in.gateways, cfg.budget, cfg.env.h_sensor_m);
            const auto fit = fitting::fit_ldpl(obs, cfg.fit_options());
            const auto eval = analysis::evaluate_observations(obs, catalog, cfg.env, cfg.bias_edges());
            const auto prog = analysis::coefficient_progression(obs, cfg.progression_distances(), cfg.fit_options());
            const auto sizes = detail::subset_sizes(cfg, obs.size());
            const auto conv = analysis::rmse_convergence(obs, sizes, cfg.convergence_options());
            const json doc = {
                {"ingest", detail::ingest_json(in)},
                {"filter", filtered.report.to_json()},
                {"fit", detail::fit_json(fit)},
                {"eval", detail::eval_json(eval)},
                {"progression", detail::progression_json(prog)},
                {"convergence", detail::convergence_json(conv)},
                {"gateways", detail::histogram_json(analysis::gateway_reception_histogram(filtered.clean))},
                {"sf_feasibility", detail::sf_json(analysis::sf_feasibility(filtered.clean, cfg.sensitivity))},
            };
            detail::write_json(dir / "report.json", doc);
            out << "report: " << dir.string() << "/report.json\n";
            return exit_ok;
        }

        const auto obs = analysis::make_observations(in.samples, *in.gateways, cfg.budget, cfg.env.h_sensor_m);
        if (command == "fit") {
            const auto fit = fitting::fit_ldpl(obs, cfg.fit_options());
            detail::write_fit_artifacts(dir, fit);
            out << "fit: n=" << fit.params.n << " pl_d0=" << fit.params.pl_d0 << " sigma=" << fit.params.sigma << '\n';
        } else if (command == "eval") {
            const auto eval = analysis::evaluate_observations(obs, catalog, cfg.env, cfg.bias_edges());
            detail::write_eval_artifacts(dir, eval);
            for (const auto& m : eval.models)
                out << m.name << ": rmse " << m.rmse_db << " dB\n";
        } else if (command == "progression") {
            detail::write_progression(dir, analysis::coefficient_progression(obs, cfg.progression_distances(),
                                                                             cfg.fit_options()));
        } else if (command == "convergence") {
            const auto sizes = detail::subset_sizes(cfg, obs.size());
            detail::write_convergence(dir, analysis::rmse_convergence(obs, sizes, cfg.convergence_options()));
        }
        return exit_ok;
    } catch (const error& e) {
        err << "lorapl " << command << ": " << e.what() << '\n';
        return e.is_environmental() ? exit_environment : exit_validation;
    } catch (const fs::filesystem_error& e) {
        err << "lorapl " << command << ": io: " << e.what() << '\n';
        return exit_environment;
    } catch (const std::exception& e) {
        err << "lorapl " << command << ": " << e.what() << '\n';
        return exit_validation;
    }
}

} // namespace lorapl::cli
