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

#include "lorapl/geo.hpp"
#include "lorapl/records.hpp"
#include "oracles.hpp"

#include <random>

using lorapl::geo::GeoPoint;
using lorapl::geo::haversine_distance;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GeoPoint random_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> lat(-89.0, 89.0);
    std::uniform_real_distribution<double> lon(-180.0, 180.0);
    return {lat(rng), lon(rng)};
}

} // namespace

TEST_CASE("GeoPoint rejects out-of-range coordinates", "[geo]")
{
    CHECK_THROWS_AS(GeoPoint(90.5, 0.0), lorapl::error);
    CHECK_THROWS_AS(GeoPoint(0.0, -180.01), lorapl::error);
    CHECK_THROWS_AS(GeoPoint(std::nan(""), 0.0), lorapl::error);
    CHECK_NOTHROW(GeoPoint(-90.0, 180.0, 12.0));
}

TEST_CASE("haversine distance matches the law-of-cosines oracle", "[geo]")
{
    CHECK(haversine_distance({50.73, 7.10}, {50.73, 7.10}) == 0.0);

    const double one_degree = haversine_distance({50.0, 7.0}, {51.0, 7.0});
    CHECK_THAT(one_degree, WithinAbs(oracle::law_of_cosines_m(50.0, 7.0, 51.0, 7.0), 1e-3));
    CHECK_THAT(one_degree, WithinAbs(111'195.0, 1.0));

    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_point(rng);
        const auto b = random_point(rng);
        const double oracle_m = oracle::law_of_cosines_m(a.lat(), a.lon(), b.lat(), b.lon());
        // law of cosines loses precision below a few meters; random pairs are far apart
        CHECK_THAT(haversine_distance(a, b), WithinRel(oracle_m, 1e-9));
    }
}

TEST_CASE("haversine is symmetric and satisfies the triangle inequality", "[geo]")
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_point(rng);
        const auto b = random_point(rng);
        const auto c = random_point(rng);
        REQUIRE(haversine_distance(a, b) == haversine_distance(b, a));
        REQUIRE(haversine_distance(a, b) >= 0.0);
        const double ac = haversine_distance(a, c);
        REQUIRE(ac <= (haversine_distance(a, b) + haversine_distance(b, c)) * (1.0 + 1e-6));
    }
}

TEST_CASE("destination point round-trips through haversine", "[geo]")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> bearing(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> dist(1.0, 20'000.0);
    const GeoPoint start(50.73, 7.10, 55.0);
    for (int i = 0; i < 500; ++i) {
        const double d = dist(rng);
        const auto p = lorapl::geo::destination_point(start, bearing(rng), d);
        REQUIRE_THAT(haversine_distance(start, p), WithinRel(d, 1e-9));
        REQUIRE(p.alt() == start.alt());
    }
}

TEST_CASE("link geometry", "[geo]")
{
    const lorapl::Gateway gw{"gw", GeoPoint(50.73, 7.10), 30.0, 3.0};

    SECTION("coincident positions are a ZeroDistance error")
    {
        try {
            (void)lorapl::link_geometry(GeoPoint(50.73, 7.10), gw, 2.0);
            FAIL("expected ZeroDistance");
        } catch (const lorapl::error& e) {
            CHECK(e.code() == lorapl::errc::zero_distance);
        }
    }

    SECTION("1 km due north")
    {
        const GeoPoint sensor(oracle::lat_north_of(50.73, 1000.0), 7.10);
        const auto link = lorapl::link_geometry(sensor, gw, 2.0);
        CHECK_THAT(link.distance_m, WithinAbs(1000.0, 1e-6));
        CHECK(link.h_gw_m == 30.0);
        CHECK(link.h_sensor_m == 2.0);
    }

    SECTION("altitude does not enter the link distance")
    {
        const GeoPoint low(50.74, 7.10, 0.0);
        const GeoPoint high(50.74, 7.10, 500.0);
        CHECK(lorapl::link_geometry(low, gw, 2.0).distance_m == lorapl::link_geometry(high, gw, 2.0).distance_m);
    }

    SECTION("non-positive heights are rejected")
    {
        CHECK_THROWS_AS(lorapl::geo::link_geometry(GeoPoint(50.74, 7.1), gw.pos, 0.0, 2.0), lorapl::error);
    }
}
