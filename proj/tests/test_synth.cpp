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

#include <catch_amalgamated.hpp>

#include "lorapl/analysis.hpp"
#include "lorapl/csv.hpp"
#include "lorapl/filters.hpp"
#include "lorapl/fitting.hpp"
#include "lorapl/synth.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace lorapl;
using Catch::Matchers::WithinAbs;

namespace {

synth::SynthConfig base_config()
{
    synth::SynthConfig cfg;
    cfg.gateways = synth::default_layout();
    return cfg;
}

std::string as_csv(const synth::Campaign& c)
{
    std::ostringstream out;
    csv::write_samples(out, c.samples);
    csv::write_gateways(out, c.gateways);
    return out.str();
}

filters::FilterConfig permissive()
{
    filters::FilterConfig f;
    f.max_altitude_m = 1000.0;
    return f;
}

} // namespace

TEST_CASE("noiseless FSPL corpus reproduces FSPL", "[synth]")
{
    auto cfg = base_config();
    cfg.ground_truth = models::ModelSpec("fspl", models::Fspl{});
    cfg.sigma_db = 0.0;
    cfg.count = 2000;
    const auto c = synth::generate(cfg);
    REQUIRE(c.samples.size() == 2000);
    const GatewayRegistry reg(c.gateways);
    const auto obs = analysis::make_observations(c.samples, reg, cfg.budget, cfg.env.h_sensor_m);
    for (const auto& o : obs) {
        CHECK_THAT(o.pl_db, WithinAbs(oracle::free_space_db(o.distance_m, cfg.env.freq_mhz), 1e-6));
        CHECK(o.distance_m > 49.0);
        CHECK(o.distance_m < 13'001.0);
    }
}

TEST_CASE("generation is deterministic per seed", "[synth]")
{
    auto cfg = base_config();
    cfg.count = 500;
    const auto a = as_csv(synth::generate(cfg));
    CHECK(a == as_csv(synth::generate(cfg)));
    cfg.seed = 2;
    CHECK(a != as_csv(synth::generate(cfg)));
}

TEST_CASE("generated samples are valid records", "[synth]")
{
    auto cfg = base_config();
    cfg.count = 200;
    cfg.start = std::chrono::sys_days{std::chrono::year{2021} / 12 / 31} + std::chrono::hours{23};
    const auto c = synth::generate(cfg);
    for (const auto& s : c.samples)
        CHECK_NOTHROW(s.validate());
    CHECK(c.samples[0].timestamp == "2021-12-31T23:00:00Z");
    CHECK(c.samples[60].timestamp == "2022-01-01T00:00:00Z");

    // round trip through CSV keeps every value
    std::ostringstream out;
    csv::write_samples(out, c.samples);
    std::istringstream in(out.str());
    const auto parsed = csv::parse_samples(in);
    REQUIRE(parsed.rejects.empty());
    REQUIRE(parsed.rows.size() == c.samples.size());
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        CHECK(parsed.rows[i].pos == c.samples[i].pos);
        CHECK(parsed.rows[i].rpp_dbm == c.samples[i].rpp_dbm);
    }
}

TEST_CASE("fit recovers the ground truth", "[synth]")
{
    auto cfg = base_config();
    cfg.count = 50'000;
    cfg.seed = 11;
    const auto c = synth::generate(cfg);
    const auto obs = analysis::make_observations(c.samples, GatewayRegistry(c.gateways), cfg.budget, 2.0);
    const auto fit = fitting::fit_ldpl(obs);
    CHECK_THAT(fit.params.n, WithinAbs(2.0, 0.05));
    CHECK_THAT(fit.params.pl_d0, WithinAbs(130.0, 0.5));
    CHECK_THAT(fit.params.sigma, WithinAbs(8.0, 0.2));
}

TEST_CASE("BelowFspl stage on synthetic corpora", "[synth]")
{
    SECTION("nothing is rejected without shadowing above FSPL")
    {
        auto cfg = base_config();
        cfg.sigma_db = 0.0;
        cfg.count = 3000;
        const auto c = synth::generate(cfg);
        const auto r = filters::apply_filters(c.samples, GatewayRegistry(c.gateways), permissive(),
                                              snap::IdentityProvider{});
        CHECK(r.report.below_fspl == 0);
        CHECK(r.report.output == 3000);
    }
    SECTION("rejection share matches the normal tail")
    {
        auto cfg = base_config();
        cfg.ground_truth = models::ModelSpec("low", models::LdplParams{2.0, 95.0, 1000.0, 0.0});
        cfg.count = 50'000;
        cfg.seed = 12;
        const auto c = synth::generate(cfg);
        const auto r = filters::apply_filters(c.samples, GatewayRegistry(c.gateways), permissive(),
                                              snap::IdentityProvider{});
        const double expected = oracle::normal_cdf(-(95.0 - oracle::free_space_db(1000.0, 868.1)), 8.0);
        CHECK_THAT(expected, WithinAbs(0.31834719680332646, 1e-9));
        const double share = static_cast<double>(r.report.below_fspl) / 50'000.0;
        CHECK_THAT(share, WithinAbs(expected, 0.01));
        CHECK(r.report.reconciles());
    }
}

TEST_CASE("synth configuration is validated", "[synth]")
{
    auto cfg = base_config();
    cfg.count = 0;
    CHECK_THROWS_AS(synth::generate(cfg), error);
    cfg = base_config();
    cfg.gateways.clear();
    CHECK_THROWS_AS(synth::generate(cfg), error);
    cfg = base_config();
    cfg.distances.min_m = 500.0;
    cfg.distances.max_m = 100.0;
    CHECK_THROWS_AS(synth::generate(cfg), error);
    cfg = base_config();
    cfg.sigma_db = -1.0;
    CHECK_THROWS_AS(synth::generate(cfg), error);
}
