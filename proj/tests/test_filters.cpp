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

#include "lorapl/filters.hpp"
#include "oracles.hpp"

#include <random>

using namespace lorapl;
using namespace lorapl::filters;
using Catch::Matchers::WithinAbs;

namespace {

const Gateway gw{"gw1", geo::GeoPoint(50.73, 7.10), 30.0, 3.0};

FilterConfig config()
{
    FilterConfig c;
    c.max_altitude_m = 200.0;
    return c;
}

/// Sample `north_m` due north of the gateway whose measured path loss is
/// FSPL(distance) + `excess_db`.
Sample sample_at(const std::string& id, double north_m, double excess_db, int sats = 9, double alt = 60.0)
{
    const double lat = oracle::lat_north_of(gw.pos.lat(), north_m);
    const double pl = oracle::free_space_db(north_m, 868.1) + excess_db;
    return {id, "2020-05-01T08:00:00Z", gw.gateway_id, geo::GeoPoint(lat, gw.pos.lon(), alt), sats,
            17.0 - pl, 12, std::nullopt};
}

/// Fixture that moves each listed position `offset_m` further north.
snap::FixtureProvider shifting_fixture(const std::vector<Sample>& samples, double offset_m)
{
    nlohmann::json points = nlohmann::json::object();
    for (const auto& s : samples)
        points[snap::fixture_key(s.pos)] = {{"lat", oracle::lat_north_of(s.pos.lat(), offset_m)}, {"lon", s.pos.lon()}};
    return snap::FixtureProvider(nlohmann::json{{"precision", 6}, {"points", points}});
}

/// Snaps to a position `offset` meters north unless the id says otherwise.
class ScriptedProvider final : public snap::SnapProvider {
public:
    std::map<std::string, double> offsets;  // fixture key -> meters north
    std::size_t in_flight = 1;

    [[nodiscard]] geo::GeoPoint nearest(const geo::GeoPoint& p) const override
    {
        const auto it = offsets.find(snap::fixture_key(p));
        if (it == offsets.end())
            fail(errc::provider_unavailable, "scripted miss");
        return {oracle::lat_north_of(p.lat(), it->second), p.lon()};
    }
    [[nodiscard]] std::size_t max_in_flight() const noexcept override { return in_flight; }
};

} // namespace

TEST_CASE("each stage rejects its own failure mode", "[filters]")
{
    const GatewayRegistry reg({gw});

    SECTION("fewer than five satellites")
    {
        const auto r = apply_filters({sample_at("a", 2000, 10, 4)}, reg, config(), snap::IdentityProvider{});
        CHECK(r.report.low_satellites == 1);
        CHECK(r.clean.empty());
        CHECK(r.rejected.at(0).reason == RejectReason::LowSatellites);
    }
    SECTION("five satellites pass")
    {
        const auto r = apply_filters({sample_at("a", 2000, 10, 5)}, reg, config(), snap::IdentityProvider{});
        CHECK(r.report.output == 1);
    }
    SECTION("25 m snap offset")
    {
        const std::vector<Sample> s = {sample_at("a", 2000, 10)};
        const auto r = apply_filters(s, reg, config(), shifting_fixture(s, 25.0));
        CHECK(r.report.snap_offset == 1);
    }
    SECTION("15 m snap offset is kept and the snapped position adopted")
    {
        const std::vector<Sample> s = {sample_at("a", 2000, 10)};
        const auto r = apply_filters(s, reg, config(), shifting_fixture(s, 15.0));
        REQUIRE(r.clean.size() == 1);
        CHECK_THAT(*r.clean[0].snap_offset_m, WithinAbs(15.0, 0.01));
        CHECK_THAT(geo::haversine_distance(gw.pos, r.clean[0].pos), WithinAbs(2015.0, 0.01));
        CHECK(r.clean[0].pos.alt() == 60.0);
    }
    SECTION("altitude above the city maximum")
    {
        const auto r = apply_filters({sample_at("a", 2000, 10, 9, 250.0)}, reg, config(), snap::IdentityProvider{});
        CHECK(r.report.altitude == 1);
    }
    SECTION("path loss one dB either side of free space")
    {
        const auto r = apply_filters({sample_at("below", 2000, -1.0), sample_at("above", 2000, 1.0)}, reg, config(),
                                     snap::IdentityProvider{});
        CHECK(r.report.below_fspl == 1);
        REQUIRE(r.clean.size() == 1);
        CHECK(r.clean[0].packet_id == "above");
        CHECK(r.rejected.at(0).sample.packet_id == "below");
    }
    SECTION("sample on top of the gateway")
    {
        Sample s = sample_at("zero", 2000, 10);
        s.pos = gw.pos.with_alt(60.0);
        const auto r = apply_filters({s}, reg, config(), snap::IdentityProvider{});
        CHECK(r.report.below_fspl == 1);
    }
}

TEST_CASE("stage-4 distance uses the snapped position", "[filters]")
{
    // 0.05 dB above FSPL at the raw 200 m position, below it once snapped 18 m further out.
    const GatewayRegistry reg({gw});
    const std::vector<Sample> s = {sample_at("near", 200, 0.05)};
    const auto r = apply_filters(s, reg, config(), shifting_fixture(s, 18.0));
    const double d_snapped = 218.0;
    const double measured = oracle::free_space_db(200, 868.1) + 0.05;
    REQUIRE(measured < oracle::free_space_db(d_snapped, 868.1));
    CHECK(r.report.below_fspl == 1);
}

TEST_CASE("a sample failing several stages is counted once, at the first", "[filters]")
{
    const GatewayRegistry reg({gw});
    const std::vector<Sample> s = {sample_at("a", 2000, -5.0, 3, 900.0)};
    const auto r = apply_filters(s, reg, config(), shifting_fixture(s, 40.0));
    CHECK(r.report.low_satellites == 1);
    CHECK(r.report.rejected() == 1);
}

TEST_CASE("adversarial mix reconciles and is idempotent", "[filters]")
{
    const GatewayRegistry reg({gw});
    ScriptedProvider provider;
    provider.in_flight = 3;
    std::vector<Sample> samples;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(100.0, 12'000.0);
    std::uniform_real_distribution<double> excess(-3.0, 40.0);
    std::uniform_int_distribution<int> sats(2, 12);
    std::uniform_real_distribution<double> alt(0.0, 260.0);
    std::uniform_real_distribution<double> offset(0.0, 35.0);
    for (int i = 0; i < 2000; ++i) {
        auto s = sample_at("p" + std::to_string(i), dist(rng), excess(rng), sats(rng), alt(rng));
        if (i % 50 != 0)
            provider.offsets[snap::fixture_key(s.pos)] = offset(rng);
        samples.push_back(s);
    }

    const auto first = apply_filters(samples, reg, config(), provider);
    const auto& rep = first.report;
    CHECK(rep.input == samples.size());
    CHECK(rep.reconciles());
    CHECK(rep.input == rep.output + rep.low_satellites + rep.snap_offset + rep.altitude + rep.below_fspl + rep.quarantined);
    CHECK(rep.low_satellites > 0);
    CHECK(rep.snap_offset > 0);
    CHECK(rep.altitude > 0);
    CHECK(rep.below_fspl > 0);
    CHECK(rep.quarantined > 0);
    CHECK(first.rejected.size() == rep.rejected());
    CHECK(first.quarantined.size() == rep.quarantined);

    // same result with a single snapping worker
    provider.in_flight = 1;
    const auto serial = apply_filters(samples, reg, config(), provider);
    CHECK(serial.report.output == rep.output);
    REQUIRE(serial.clean.size() == first.clean.size());
    for (std::size_t i = 0; i < serial.clean.size(); ++i)
        CHECK(serial.clean[i].pos == first.clean[i].pos);

    // clean output carries its snap offset and is not re-snapped
    const auto second = apply_filters(first.clean, reg, config(), snap::FixtureProvider(nlohmann::json{{"points", nlohmann::json::object()}}));
    CHECK(second.report.output == first.clean.size());
    CHECK(second.report.rejected() == 0);
    CHECK(second.report.quarantined == 0);

    const auto json = rep.to_json();
    CHECK(json["reconciles"] == true);
    CHECK(json["stages"].size() == 4);
    CHECK(json["stages"][0]["reached_stage"] == rep.input);
}

TEST_CASE("configuration and registry errors", "[filters]")
{
    const GatewayRegistry reg({gw});
    FilterConfig no_alt;
    try {
        (void)apply_filters({sample_at("a", 2000, 10)}, reg, no_alt, snap::IdentityProvider{});
        FAIL("expected validation error");
    } catch (const error& e) {
        CHECK(e.code() == errc::invalid_argument);
    }

    Sample stranger = sample_at("a", 2000, 10);
    stranger.gateway_id = "gw-unknown";
    try {
        (void)apply_filters({stranger}, reg, config(), snap::IdentityProvider{});
        FAIL("expected UnknownGateway");
    } catch (const error& e) {
        CHECK(e.code() == errc::unknown_gateway);
    }
}
