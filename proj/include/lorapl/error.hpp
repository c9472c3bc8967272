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

#include <stdexcept>
#include <string>
#include <string_view>

namespace lorapl {

enum class errc {
    invalid_argument,
    zero_distance,
    schema,
    provider_unavailable,
    unknown_gateway,
    empty_input,
    degenerate_input,
    size_exceeds_population,
    io,
};

constexpr std::string_view to_string(errc code) noexcept
{
    switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::zero_distance: return "ZeroDistance";
    case errc::schema: return "SchemaError";
    case errc::provider_unavailable: return "ProviderUnavailable";
    case errc::unknown_gateway: return "UnknownGateway";
    case errc::empty_input: return "EmptyInput";
    case errc::degenerate_input: return "DegenerateInput";
    case errc::size_exceeds_population: return "SizeExceedsPopulation";
    case errc::io: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] errc code() const noexcept { return code_; }

    /// Provider outages and filesystem failures are environmental; everything
    /// else means the input or configuration is wrong.
    [[nodiscard]] bool is_environmental() const noexcept
    {
        return code_ == errc::io || code_ == errc::provider_unavailable;
    }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what)
{
    throw error(code, what);
}

} // namespace lorapl
