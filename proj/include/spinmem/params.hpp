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

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmem/errors.hpp"

namespace spinmem {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Experiment parameters
// ---------------------------------------------------------------------------
//
// Frequency convention used throughout: every public frequency is an ordinary
// frequency in Hz. gamma_Hz is the half width at half maximum of the spin
// resonance; the decay rate entering the equations of motion is the angular
// rate 2*pi*gamma_Hz (and likewise for the precession frequency). Power
// spectral densities are two-sided densities over ordinary frequency, so a
// white process with delta correlation strength c has a flat density of c.

struct ExperimentParams {
    double coupling_a = 0.0;   ///< dimensionless light-atom coupling
    double flux_Sx = 0.0;      ///< classical Stokes flux, photons/s
    double spin_Jx = 0.0;      ///< macroscopic longitudinal spin (number-like)
    double larmor_Hz = 0.0;    ///< precession frequency, Hz
    double gamma_Hz = 0.0;     ///< transverse decay, HWHM in Hz
    double eps_y = 1.0;        ///< input noise factor of the detected quadrature
    double eps_z = 1.0;        ///< input noise factor of the back-action quadrature
    double tech_noise_k = 0.0; ///< extra classical Langevin force density, >= 0

    double gamma_angular() const { return two_pi * gamma_Hz; }
    double larmor_angular() const { return two_pi * larmor_Hz; }

    /// Quantum Langevin force density per transverse channel (two-sided,
    /// over Hz). The technical contribution tech_noise_k adds on top.
    double langevin_density() const { return gamma_angular() * spin_Jx; }

    /// Flat shot floor of the detected flux for this eps_y.
    double shot_floor() const { return eps_y * flux_Sx / 2.0; }

    bool operator==(const ExperimentParams&) const = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ValidationContext {
    analytic,    // closed-form evaluation: narrowband violation is an error
    time_domain, // simulation: narrowband violation is only a warning
};

struct Violation {
    Errc code;
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }

    std::string summary() const {
        std::string s;
        for (const auto& v : errors) {
            if (!s.empty()) s += "; ";
            s += std::string(errc_name(v.code)) + " [" + v.field + "]: " + v.message;
        }
        return s;
    }
};

/// Checks every invariant and reports the complete list of violations.
inline ValidationReport validate(const ExperimentParams& p,
                                 ValidationContext ctx = ValidationContext::analytic) {
    ValidationReport r;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            r.errors.push_back({Errc::non_positive_parameter, name, "must be finite and > 0"});
    };
    positive(p.flux_Sx, "flux_Sx");
    positive(p.spin_Jx, "spin_Jx");
    positive(p.gamma_Hz, "gamma_Hz");
    positive(p.larmor_Hz, "larmor_Hz");
    positive(p.eps_y, "eps_y");
    positive(p.eps_z, "eps_z");
    if (!(p.tech_noise_k >= 0.0) || !std::isfinite(p.tech_noise_k))
        r.errors.push_back({Errc::non_positive_parameter, "tech_noise_k", "must be finite and >= 0"});
    if (!std::isfinite(p.coupling_a))
        r.errors.push_back({Errc::non_positive_parameter, "coupling_a", "must be finite"});

    if (p.gamma_Hz > 0.0 && p.larmor_Hz > 0.0 && !(p.gamma_Hz < p.larmor_Hz)) {
        if (ctx == ValidationContext::analytic)
            r.errors.push_back({Errc::narrowband_violated, "gamma_Hz",
                                "narrowband regime requires gamma_Hz < larmor_Hz"});
        else
            r.warnings.push_back("narrowband regime gamma_Hz < larmor_Hz does not hold; "
                                 "analytic comparisons will be unreliable");
    }
    if (p.eps_y > 0.0 && p.eps_z > 0.0 && p.eps_y * p.eps_z < 1.0)
        r.warnings.push_back("eps_y*eps_z < 1: below the minimum-uncertainty product "
                             "(unphysical optical state, accepted for testing)");
    return r;
}

/// Allocation-free happy path mirroring validate()'s error conditions.
inline bool params_ok(const ExperimentParams& p, ValidationContext ctx) {
    auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!(pos(p.flux_Sx) && pos(p.spin_Jx) && pos(p.gamma_Hz) && pos(p.larmor_Hz) &&
          pos(p.eps_y) && pos(p.eps_z)))
        return false;
    if (!(p.tech_noise_k >= 0.0) || !std::isfinite(p.tech_noise_k)) return false;
    if (!std::isfinite(p.coupling_a)) return false;
    if (ctx == ValidationContext::analytic && !(p.gamma_Hz < p.larmor_Hz)) return false;
    return true;
}

inline void validate_or_throw(const ExperimentParams& p,
                              ValidationContext ctx = ValidationContext::analytic) {
    if (params_ok(p, ctx)) return;
    auto r = validate(p, ctx);
    throw Error(r.errors.front().code, r.summary());
}

// ---------------------------------------------------------------------------
// Width/rate unit conversions
// ---------------------------------------------------------------------------

enum class WidthConvention {
    hwhm_Hz,        // canonical internal form of gamma_Hz
    fwhm_Hz,        // full width, 2*gamma
    angular_rad_s,  // decay rate in the equations of motion, 2*pi*gamma
    lifetime_s,     // 1/(2*pi*gamma)
};

inline WidthConvention width_convention_from_string(const std::string& s) {
    if (s == "HWHM-Hz") return WidthConvention::hwhm_Hz;
    if (s == "FWHM-Hz") return WidthConvention::fwhm_Hz;
    if (s == "angular-rad/s") return WidthConvention::angular_rad_s;
    if (s == "lifetime-s") return WidthConvention::lifetime_s;
    throw Error(Errc::unknown_convention, "unknown width convention '" + s + "'");
}

inline const char* to_string(WidthConvention c) {
    switch (c) {
        case WidthConvention::hwhm_Hz: return "HWHM-Hz";
        case WidthConvention::fwhm_Hz: return "FWHM-Hz";
        case WidthConvention::angular_rad_s: return "angular-rad/s";
        case WidthConvention::lifetime_s: return "lifetime-s";
    }
    return "?";
}

/// Exact algebraic conversion between width conventions.
inline double unit_convert(double value, WidthConvention from, WidthConvention to) {
    double hwhm = 0.0;
    switch (from) {
        case WidthConvention::hwhm_Hz: hwhm = value; break;
        case WidthConvention::fwhm_Hz: hwhm = value / 2.0; break;
        case WidthConvention::angular_rad_s: hwhm = value / two_pi; break;
        case WidthConvention::lifetime_s:
            if (value == 0.0) throw Error(Errc::non_positive_input, "lifetime must be nonzero");
            hwhm = 1.0 / (two_pi * value);
            break;
    }
    switch (to) {
        case WidthConvention::hwhm_Hz: return hwhm;
        case WidthConvention::fwhm_Hz: return 2.0 * hwhm;
        case WidthConvention::angular_rad_s: return two_pi * hwhm;
        case WidthConvention::lifetime_s:
            if (hwhm == 0.0) throw Error(Errc::non_positive_input, "width must be nonzero");
            return 1.0 / (two_pi * hwhm);
    }
    return hwhm;
}

// ---------------------------------------------------------------------------
// JSON serialization (strict: unknown keys are an error)
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ExperimentParams& p) {
    return nlohmann::json{
        {"coupling_a", p.coupling_a}, {"flux_Sx", p.flux_Sx},
        {"spin_Jx", p.spin_Jx},       {"larmor_Hz", p.larmor_Hz},
        {"gamma_Hz", p.gamma_Hz},     {"eps_y", p.eps_y},
        {"eps_z", p.eps_z},           {"tech_noise_k", p.tech_noise_k},
    };
}

inline ExperimentParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::bad_config, "params must be a JSON object");
    static const std::array<const char*, 8> known = {
        "coupling_a", "flux_Sx", "spin_Jx", "larmor_Hz",
        "gamma_Hz",   "eps_y",   "eps_z",   "tech_noise_k"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto* k : known) ok = ok || (it.key() == k);
        if (!ok) throw Error(Errc::bad_config, "unknown params key '" + it.key() + "'");
    }
    auto need = [&](const char* key) -> double {
        if (!j.contains(key)) throw Error(Errc::bad_config, std::string("missing params key '") + key + "'");
        if (!j.at(key).is_number()) throw Error(Errc::bad_config, std::string("params key '") + key + "' must be a number");
        return j.at(key).get<double>();
    };
    ExperimentParams p;
    p.coupling_a = need("coupling_a");
    p.flux_Sx = need("flux_Sx");
    p.spin_Jx = need("spin_Jx");
    p.larmor_Hz = need("larmor_Hz");
    p.gamma_Hz = need("gamma_Hz");
    p.eps_y = need("eps_y");
    p.eps_z = need("eps_z");
    p.tech_noise_k = j.contains("tech_noise_k") ? need("tech_noise_k") : 0.0;
    return p;
}

// ---------------------------------------------------------------------------
// Parameter fingerprint (FNV-1a over the raw field bytes, fixed order)
// ---------------------------------------------------------------------------

inline std::uint64_t params_hash(const ExperimentParams& p) {
    const double fields[8] = {p.coupling_a, p.flux_Sx, p.spin_Jx, p.larmor_Hz,
                              p.gamma_Hz,   p.eps_y,   p.eps_z,   p.tech_noise_k};
    std::uint64_t h = 1469598103934665603ULL;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(fields);
    for (std::size_t i = 0; i < sizeof(fields); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string params_hash_hex(const ExperimentParams& p) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(params_hash(p)));
    return std::string(buf);
}

/// Desk-scale parameter set used by the canned reproductions: back-action
/// about 5.6x the projection noise with the squeezed probe, all three
/// spectral contributions visible, minutes-scale ensembles.
inline ExperimentParams default_params() {
    ExperimentParams p;
    p.coupling_a = 4e-10;
    p.flux_Sx = 1e12;
    p.spin_Jx = 1e10;
    p.larmor_Hz = 2400.0;
    p.gamma_Hz = 80.0;
    p.eps_y = 0.5;
    p.eps_z = 7.0;
    p.tech_noise_k = 0.0;
    return p;
}

} // namespace spinmem
