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

#include <fstream>
#include <istream>
#include <string>
#include <vector>

namespace lorapl::models {

struct Catalog {
    std::vector<ModelSpec> models;
    /// Records present in the file but marked disabled, e.g. placeholders
    /// whose coefficients must be supplied by the user.
    std::vector<std::string> disabled;
};

namespace detail {

inline double param(const nlohmann::json& params, const char* key, const std::string& model)
{
    if (!params.contains(key) || !params.at(key).is_number())
        fail(errc::schema, "model '" + model + "' is missing numeric parameter '" + key + "'");
    return params.at(key).get<double>();
}

inline double param_or(const nlohmann::json& params, const char* key, double fallback)
{
    if (params.contains(key) && params.at(key).is_number())
        return params.at(key).get<double>();
    return fallback;
}

} // namespace detail

inline ModelSpec model_from_json(const nlohmann::json& record)
{
    if (!record.is_object() || !record.contains("name") || !record.contains("variant"))
        fail(errc::schema, "catalog record needs 'name' and 'variant'");
    const auto name = record.at("name").get<std::string>();
    const auto variant = record.at("variant").get<std::string>();
    const nlohmann::json params = record.value("params", nlohmann::json::object());
    const double sigma = detail::param_or(params, "sigma", 0.0);

    if (variant == "fspl")
        return {name, Fspl{}, sigma};
    if (variant == "ldpl") {
        LdplParams p;
        p.n = detail::param(params, "n", name);
        p.pl_d0 = detail::param(params, "pl_d0", name);
        p.d0 = detail::param_or(params, "d0", 1000.0);
        p.sigma = sigma;
        return {name, p};
    }
    if (variant == "dual_slope") {
        DualSlopeParams p;
        p.n1 = detail::param(params, "n1", name);
        p.n2 = detail::param(params, "n2", name);
        p.pl_d0 = detail::param(params, "pl_d0", name);
        p.d0 = detail::param_or(params, "d0", 1000.0);
        p.d_break = detail::param(params, "d_break", name);
        p.sigma = sigma;
        return {name, p};
    }
    if (variant == "okumura_hata")
        return {name, OkumuraHata{}, sigma};
    if (variant == "cost_hata")
        return {name, CostHata{}, sigma};
    if (variant == "egli")
        return {name, Egli{}, sigma};
    if (variant == "ecc33")
        return {name, Ecc33{}, sigma};
    if (variant == "winner_plus_uma_nlos")
        return {name, WinnerPlusUmaNlos{}, sigma};
    fail(errc::schema, "model '" + name + "' has unknown variant '" + variant + "'");
}

inline nlohmann::json to_json(const ModelSpec& spec)
{
    nlohmann::json params = nlohmann::json::object();
    std::string variant;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Fspl>)
                variant = "fspl";
            else if constexpr (std::is_same_v<T, LdplParams>) {
                variant = "ldpl";
                params = {{"n", m.n}, {"pl_d0", m.pl_d0}, {"d0", m.d0}};
            } else if constexpr (std::is_same_v<T, DualSlopeParams>) {
                variant = "dual_slope";
                params = {{"n1", m.n1}, {"n2", m.n2}, {"pl_d0", m.pl_d0}, {"d0", m.d0},
                          {"d_break", m.d_break}};
            } else if constexpr (std::is_same_v<T, OkumuraHata>)
                variant = "okumura_hata";
            else if constexpr (std::is_same_v<T, CostHata>)
                variant = "cost_hata";
            else if constexpr (std::is_same_v<T, Egli>)
                variant = "egli";
            else if constexpr (std::is_same_v<T, Ecc33>)
                variant = "ecc33";
            else
                variant = "winner_plus_uma_nlos";
        },
        spec.model());
    if (spec.shadowing_sigma() > 0.0)
        params["sigma"] = spec.shadowing_sigma();
    return {{"name", spec.name()}, {"variant", variant}, {"params", params}};
}

/// Parses a catalog document: a JSON array of {name, variant, params}
/// records, or an object with a "models" array. Records with
/// "disabled": true are listed but not instantiated.
inline Catalog parse_catalog(const nlohmann::json& doc)
{
    const nlohmann::json* list = &doc;
    if (doc.is_object() && doc.contains("models"))
        list = &doc.at("models");
    if (!list->is_array())
        fail(errc::schema, "catalog must be a JSON array of model records");

    Catalog out;
    for (const auto& record : *list) {
        if (record.value("disabled", false)) {
            out.disabled.push_back(record.value("name", std::string("<unnamed>")));
            continue;
        }
        out.models.push_back(model_from_json(record));
    }
    for (std::size_t i = 0; i < out.models.size(); ++i)
        for (std::size_t j = i + 1; j < out.models.size(); ++j)
            if (out.models[i].name() == out.models[j].name())
                fail(errc::schema, "duplicate model name '" + out.models[i].name() + "'");
    return out;
}

inline Catalog load_catalog(std::istream& in)
{
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(errc::schema, std::string("catalog is not valid JSON: ") + e.what());
    }
    return parse_catalog(doc);
}

inline Catalog load_catalog(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(errc::io, "cannot open catalog '" + path + "'");
    return load_catalog(in);
}

/// Baseline, published log-distance fits and the closed-form empirical models.
inline Catalog default_catalog()
{
    Catalog c;
    c.models.emplace_back("FSPL", Fspl{});
    c.models.emplace_back("LDPL-Oulu", LdplParams{2.65, 132.25, 1000.0, 0.0});
    c.models.emplace_back("LDPL-Bonn", LdplParams{1.58, 132.41, 1000.0, 9.9});
    c.models.emplace_back("Winner+", WinnerPlusUmaNlos{});
    c.models.emplace_back("Okumura-Hata", OkumuraHata{});
    c.models.emplace_back("COST-231-Hata", CostHata{});
    c.models.emplace_back("Egli", Egli{});
    c.models.emplace_back("ECC-33", Ecc33{});
    c.disabled = {"LDPL-Dortmund", "DualSlope-Ghent", "LDPL-Beirut"};
    return c;
}

} // namespace lorapl::models
