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

// Live nearest-street client for an OSRM-compatible HTTP service. Kept in its
// own header so only code that talks to the network pulls in the HTTP client.

#include "lorapl/error.hpp"
#include "lorapl/snap.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <thread>

namespace lorapl::snap {

struct OsrmOptions {
    int retries = 3;
    double timeout_s = 5.0;
    std::size_t max_in_flight = 4;
    std::string profile = "driving";
    std::chrono::milliseconds backoff{200};
};

class OsrmProvider final : public SnapProvider {
public:
    /// `base_url` is scheme://host[:port][/prefix].
    explicit OsrmProvider(std::string base_url, OsrmOptions options = {})
        : options_(std::move(options))
    {
        const auto scheme_end = base_url.find("://");
        const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        while (base_url.size() > host_start && base_url.back() == '/')
            base_url.pop_back();
        const auto path_start = base_url.find('/', host_start);
        if (path_start == std::string::npos) {
            origin_ = base_url;
        } else {
            origin_ = base_url.substr(0, path_start);
            prefix_ = base_url.substr(path_start);
        }
        if (origin_.size() <= host_start)
            fail(errc::invalid_argument, "snap URL has no host: '" + base_url + "'");
        if (options_.retries < 0 || options_.max_in_flight == 0 || !(options_.timeout_s > 0.0))
            fail(errc::invalid_argument, "invalid snap client options");
    }

    [[nodiscard]] std::string request_path(const GeoPoint& pos) const
    {
        char coords[96];
        std::snprintf(coords, sizeof coords, "%.7f,%.7f", pos.lon(), pos.lat());
        return prefix_ + "/nearest/v1/" + options_.profile + "/" + coords + "?number=1";
    }

    [[nodiscard]] GeoPoint nearest(const GeoPoint& pos) const override
    {
        const auto path = request_path(pos);
        std::string last_error;
        for (int attempt = 0; attempt <= options_.retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(options_.backoff * attempt);

            httplib::Client client(origin_);
            const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::duration<double>(options_.timeout_s));
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);

            const auto res = client.Get(path);
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            return parse_response(res->status, res->body, pos);
        }
        fail(errc::provider_unavailable, origin_ + path + " failed after " +
                                             std::to_string(options_.retries + 1) +
                                             " attempt(s): " + last_error);
    }

    [[nodiscard]] std::size_t max_in_flight() const noexcept override { return options_.max_in_flight; }

    /// Extracts waypoints[0].location ([lon, lat]) from a nearest response.
    static GeoPoint parse_response(int status, const std::string& body, const GeoPoint& query)
    {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception&) {
            fail(errc::provider_unavailable, "HTTP " + std::to_string(status) + ": body is not JSON");
        }
        if (doc.value("code", std::string()) != "Ok" || !doc.contains("waypoints") ||
            doc.at("waypoints").empty())
            fail(errc::provider_unavailable,
                 "no street near " + fixture_key(query) + " (code " + doc.value("code", std::string("?")) + ")");
        const auto& loc = doc.at("waypoints").at(0).at("location");
        return GeoPoint(loc.at(1).get<double>(), loc.at(0).get<double>(), query.alt());
    }

private:
    OsrmOptions options_;
    std::string origin_;
    std::string prefix_;
};

} // namespace lorapl::snap
