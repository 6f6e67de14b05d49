/*
   Copyright 2026 The spinmem authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "spinmem/errors.hpp"
#include "spinmem/spectrum.hpp"

// Decomposition of measured spin noise areas from a matched pair of probe
// states. The back-action part scales with eps_z while the rest does not:
//
//   BANA = (A_sq - A_coh) / (eps_z - 1)
//   RSN  = (eps_z*A_coh - A_sq) / (eps_z - 1)      (so BANA + RSN == A_coh)
//
// and from a coherent-probe BANA plus the shot noise level the projection
// noise area follows as 2*sqrt(pi * gamma_Hz * BANA * SNL).

namespace spinmem::spectral {

struct AreaEstimate {
    double value = 0.0;
    double se = 0.0;
};

struct NoiseAreas {
    AreaEstimate a_total;      ///< total atomic area with the coherent probe, s^-2
    AreaEstimate snl;          ///< shot noise level, s^-1
    AreaEstimate bana;         ///< back-action noise area, s^-2
    AreaEstimate rsn;          ///< residual spin noise area, s^-2
    AreaEstimate pna_inferred; ///< projection noise area from the square-root identity
    double eps_z = 0.0;        ///< anti-squeezing factor used for the split
};

/// Splits a coherent/squeezed area pair. eps_z must exceed 1 by at least 0.1
/// or the estimator variance blows up. An eps_z uncertainty, when known, is
/// propagated linearly.
inline NoiseAreas decompose(AreaEstimate a_coh, AreaEstimate a_sq, double eps_z,
                            double eps_z_se = 0.0) {
    if (!(eps_z - 1.0 >= 0.1))
        throw Error(Errc::eps_too_close_to_one, "need eps_z - 1 >= 0.1 for a stable split");
    NoiseAreas n;
    n.eps_z = eps_z;
    n.a_total = a_coh;
    const double d = eps_z - 1.0;
    n.bana.value = (a_sq.value - a_coh.value) / d;
    n.rsn.value = (eps_z * a_coh.value - a_sq.value) / d;
    const double var_pair = (a_sq.se * a_sq.se + a_coh.se * a_coh.se) / (d * d);
    n.bana.se = std::sqrt(var_pair + std::pow(n.bana.value / d * eps_z_se, 2));
    n.rsn.se = std::sqrt((eps_z * eps_z * a_coh.se * a_coh.se + a_sq.se * a_sq.se) / (d * d) +
                         std::pow(n.bana.value / d * eps_z_se, 2));
    return n;
}

/// Projection noise area from a measured BANA and shot noise level.
/// The BANA must refer to a coherent probe (eps_z = 1), i.e. be the value
/// produced by decompose().
inline AreaEstimate infer_pna_from_measurement(const NoiseAreas& n, AreaEstimate snl,
                                               double gamma_Hz) {
    if (!(n.bana.value > 0.0))
        throw Error(Errc::non_positive_input, "bana must be > 0 to infer the projection area");
    if (!(snl.value > 0.0)) throw Error(Errc::non_positive_input, "snl must be > 0");
    if (!(gamma_Hz > 0.0)) throw Error(Errc::non_positive_input, "gamma_Hz must be > 0");
    AreaEstimate out;
    out.value = 2.0 * std::sqrt(std::numbers::pi * gamma_Hz * n.bana.value * snl.value);
    // d(out)/d(bana) = out/(2 bana), d(out)/d(snl) = out/(2 snl)
    const double rel2 = 0.25 * (std::pow(n.bana.se / n.bana.value, 2) +
                                std::pow(snl.se / std::max(snl.value, 1e-300), 2));
    out.se = out.value * std::sqrt(rel2);
    return out;
}

inline nlohmann::json to_json(const NoiseAreas& n) {
    return nlohmann::json{
        {"convention", convention_tag},
        {"a_total", n.a_total.value},
        {"a_total_se", n.a_total.se},
        {"snl", n.snl.value},
        {"snl_se", n.snl.se},
        {"bana", n.bana.value},
        {"bana_se", n.bana.se},
        {"rsn", n.rsn.value},
        {"rsn_se", n.rsn.se},
        {"pna_inferred", n.pna_inferred.value},
        {"pna_inferred_se", n.pna_inferred.se},
        {"eps_z", n.eps_z},
    };
}

} // namespace spinmem::spectral
