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

#include <cmath>

namespace lorapl {

/// Static terms of the uplink budget. Defaults describe a 14 dBm sensor with
/// an enclosure antenna and a 3 dBi gateway antenna.
struct LinkBudget {
    double tx_power_dbm = 14.0;
    double tx_gain_dbi = 0.0;
    double rx_gain_dbi = 3.0;
    double fixed_losses_db = 0.0;

    void validate() const
    {
        if (!std::isfinite(tx_power_dbm) || !std::isfinite(tx_gain_dbi) ||
            !std::isfinite(rx_gain_dbi) || !std::isfinite(fixed_losses_db))
            fail(errc::invalid_argument, "link budget terms must be finite");
    }

    /// Everything except the path loss: RPP = eirp_net - PL.
    [[nodiscard]] double net_gain_dbm() const noexcept
    {
        return tx_power_dbm + tx_gain_dbi + rx_gain_dbi - fixed_losses_db;
    }

    /// The same budget with the receive gain of a concrete gateway.
    [[nodiscard]] LinkBudget for_gateway(const Gateway& gw) const noexcept
    {
        LinkBudget b = *this;
        b.rx_gain_dbi = gw.gain_dbi;
        return b;
    }
};

inline double path_loss_from_rpp(double rpp_dbm, const LinkBudget& budget) noexcept
{
    return budget.net_gain_dbm() - rpp_dbm;
}

/// Received packet power implied by a path loss.
inline double predicted_rpp(double pl_db, const LinkBudget& budget) noexcept
{
    return budget.net_gain_dbm() - pl_db;
}

/// Path loss observed by `sample`; the receiving gateway's own antenna gain
/// replaces the budget's default receive gain.
inline double measured_path_loss(const Sample& sample, const Gateway& gw, const LinkBudget& budget) noexcept
{
    return path_loss_from_rpp(sample.rpp_dbm, budget.for_gateway(gw));
}

} // namespace lorapl
