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
#include "lorapl/records.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace lorapl::csv {

/// Splits one CSV record. Double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_line(std::string_view line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    return fields;
}

inline std::string quote(std::string_view field)
{
    if (field.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

/// Shortest text that reads back to exactly the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

template <class T>
std::optional<T> parse_number(std::string_view text)
{
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        return std::nullopt;
    return value;
}

/// Maps logical sample fields to header names in the input file. The default
/// is the identity mapping; a published dump with different headers is
/// ingested by overriding entries.
struct ColumnMapping {
    std::map<std::string, std::string> columns = {
        {"packet_id", "packet_id"}, {"timestamp", "timestamp"}, {"gateway_id", "gateway_id"},
        {"lat", "lat"},             {"lon", "lon"},             {"alt_m", "alt_m"},
        {"satellites", "satellites"}, {"rpp_dbm", "rpp_dbm"},   {"sf", "sf"},
        {"snap_offset_m", "snap_offset_m"},
    };

    [[nodiscard]] const std::string& header_for(const std::string& field) const
    {
        return columns.at(field);
    }
};

struct RowReject {
    std::size_t line = 0;
    std::string reason;
    std::string text;
};

template <class T>
struct ParseResult {
    std::vector<T> rows;
    std::vector<RowReject> rejects;
};

namespace detail {

class HeaderIndex {
public:
    explicit HeaderIndex(const std::vector<std::string>& header)
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            index_[header[i]] = i;
    }

    [[nodiscard]] std::optional<std::size_t> find(const std::string& name) const
    {
        const auto it = index_.find(name);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

private:
    std::map<std::string, std::size_t> index_;
};

inline bool read_header(std::istream& in, std::vector<std::string>& header)
{
    std::string line;
    if (!std::getline(in, line))
        return false;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    header = split_line(line);
    return true;
}

inline bool blank(const std::string& line)
{
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace detail

/// Reads samples.csv. Rows that cannot be turned into a valid Sample are
/// returned in `rejects` with their 1-based line number.
inline ParseResult<Sample> parse_samples(std::istream& in, const ColumnMapping& mapping = {})
{
    std::vector<std::string> header;
    if (!detail::read_header(in, header))
        fail(errc::schema, "samples input has no header line");
    const detail::HeaderIndex index(header);

    static constexpr const char* required[] = {"packet_id", "timestamp", "gateway_id", "lat",
                                               "lon",       "satellites", "rpp_dbm",   "sf"};
    std::map<std::string, std::size_t> col;
    std::string missing;
    for (const char* field : required) {
        const auto& name = mapping.header_for(field);
        if (const auto i = index.find(name))
            col[field] = *i;
        else
            missing += (missing.empty() ? "" : ", ") + name;
    }
    if (!missing.empty())
        fail(errc::schema, "samples input is missing required column(s): " + missing);
    for (const char* field : {"alt_m", "snap_offset_m"})
        if (const auto i = index.find(mapping.header_for(field)))
            col[field] = *i;

    ParseResult<Sample> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line))
            continue;
        const auto fields = split_line(line);
        auto reject = [&](std::string reason) {
            out.rejects.push_back({line_no, std::move(reason), line});
        };
        auto field = [&](const char* name) -> std::string_view {
            const auto it = col.find(name);
            if (it == col.end() || it->second >= fields.size())
                return {};
            return fields[it->second];
        };
        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, got " +
                   std::to_string(fields.size()));
            continue;
        }

        const auto lat = parse_number<double>(field("lat"));
        const auto lon = parse_number<double>(field("lon"));
        const auto sats = parse_number<int>(field("satellites"));
        const auto rpp = parse_number<double>(field("rpp_dbm"));
        const auto sf = parse_number<int>(field("sf"));
        if (!lat || !lon) {
            reject("unparseable lat/lon");
            continue;
        }
        if (!sats || !rpp || !sf) {
            reject("unparseable satellites/rpp_dbm/sf");
            continue;
        }
        std::optional<double> alt;
        if (const auto text = field("alt_m"); !text.empty()) {
            alt = parse_number<double>(text);
            if (!alt) {
                reject("unparseable alt_m");
                continue;
            }
        }
        std::optional<double> offset;
        if (const auto text = field("snap_offset_m"); !text.empty()) {
            offset = parse_number<double>(text);
            if (!offset) {
                reject("unparseable snap_offset_m");
                continue;
            }
        }

        try {
            Sample s{std::string(field("packet_id")), std::string(field("timestamp")),
                     std::string(field("gateway_id")), GeoPoint(*lat, *lon, alt), *sats, *rpp, *sf,
                     offset};
            s.validate();
            out.rows.push_back(std::move(s));
        } catch (const error& e) {
            reject(e.what());
        }
    }
    return out;
}

/// Reads gateways.csv. The registry is configuration, so any bad row is a
/// hard error rather than a reject.
inline std::vector<Gateway> parse_gateways(std::istream& in)
{
    std::vector<std::string> header;
    if (!detail::read_header(in, header))
        fail(errc::schema, "gateways input has no header line");
    const detail::HeaderIndex index(header);
    std::map<std::string, std::size_t> col;
    for (const char* field : {"gateway_id", "lat", "lon", "height_m", "gain_dbi"}) {
        const auto i = index.find(field);
        if (!i)
            fail(errc::schema, std::string("gateways input is missing column '") + field + "'");
        col[field] = *i;
    }

    std::vector<Gateway> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line))
            continue;
        const auto fields = split_line(line);
        const auto where = "gateways line " + std::to_string(line_no);
        if (fields.size() != header.size())
            fail(errc::schema, where + ": wrong field count");
        const auto lat = parse_number<double>(fields[col["lat"]]);
        const auto lon = parse_number<double>(fields[col["lon"]]);
        const auto height = parse_number<double>(fields[col["height_m"]]);
        const auto gain = parse_number<double>(fields[col["gain_dbi"]]);
        if (!lat || !lon || !height || !gain)
            fail(errc::schema, where + ": unparseable number");
        try {
            Gateway gw{fields[col["gateway_id"]], GeoPoint(*lat, *lon), *height, *gain};
            gw.validate();
            out.push_back(std::move(gw));
        } catch (const error& e) {
            fail(errc::schema, where + ": " + e.what());
        }
    }
    return out;
}

inline void write_samples(std::ostream& out, const std::vector<Sample>& samples)
{
    bool with_offset = false;
    for (const auto& s : samples)
        with_offset = with_offset || s.snap_offset_m.has_value();

    out << "packet_id,timestamp,gateway_id,lat,lon,alt_m,satellites,rpp_dbm,sf";
    out << (with_offset ? ",snap_offset_m\n" : "\n");
    for (const auto& s : samples) {
        out << quote(s.packet_id) << ',' << quote(s.timestamp) << ',' << quote(s.gateway_id) << ','
            << format_double(s.pos.lat()) << ',' << format_double(s.pos.lon()) << ','
            << (s.pos.alt() ? format_double(*s.pos.alt()) : std::string()) << ',' << s.satellites
            << ',' << format_double(s.rpp_dbm) << ',' << s.sf;
        if (with_offset)
            out << ',' << (s.snap_offset_m ? format_double(*s.snap_offset_m) : std::string());
        out << '\n';
    }
}

inline void write_gateways(std::ostream& out, const std::vector<Gateway>& gateways)
{
    out << "gateway_id,lat,lon,height_m,gain_dbi\n";
    for (const auto& gw : gateways)
        out << quote(gw.gateway_id) << ',' << format_double(gw.pos.lat()) << ','
            << format_double(gw.pos.lon()) << ',' << format_double(gw.height_m) << ','
            << format_double(gw.gain_dbi) << '\n';
}

inline void write_rejects(std::ostream& out, const std::vector<RowReject>& rejects)
{
    out << "line,reason,text\n";
    for (const auto& r : rejects)
        out << r.line << ',' << quote(r.reason) << ',' << quote(r.text) << '\n';
}

inline ParseResult<Sample> load_samples(const std::string& path, const ColumnMapping& mapping = {})
{
    std::ifstream in(path);
    if (!in)
        fail(errc::io, "cannot open samples file '" + path + "'");
    return parse_samples(in, mapping);
}

inline std::vector<Gateway> load_gateways(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(errc::io, "cannot open gateways file '" + path + "'");
    return parse_gateways(in);
}

} // namespace lorapl::csv
