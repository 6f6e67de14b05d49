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
#include <complex>
#include <numbers>

#include "spinmem/errors.hpp"
#include "spinmem/params.hpp"

// Closed-form frequency-domain results for the driven, damped collective
// spin and the detected polarization flux.
//
// Conventions (fixed project-wide):
//  * inputs are white with two-sided over-Hz densities
//        S_y:  eps_y * S_x / 2        S_z:  eps_z * S_x / 2
//        F_y, F_z: 2*pi*gamma_Hz*J_x + tech_noise_k   (each channel)
//  * transfer denominators are evaluated with angular rates, so the output
//    of spectrum_phi is again a two-sided density over ordinary frequency;
//  * "areas" are integrals of density over ordinary frequency (s^-2), for
//    the single resonance at +larmor_Hz. The variance budget doubles them
//    to account for the mirror resonance at negative frequency.

namespace spinmem::analytic {

/// Complex response of J_y and J_z to each white input at one frequency.
/// Denominator (Omega - omega) - i*Gamma uses angular rates; magnitudes peak
/// at f = larmor_Hz with on-resonance S_z->J_z gain a*J_x/(2*Gamma_angular).
struct SpinTransfer {
    std::complex<double> jy_from_sz, jy_from_fy, jy_from_fz;
    std::complex<double> jz_from_sz, jz_from_fy, jz_from_fz;
};

inline SpinTransfer spin_transfer(const ExperimentParams& p, double freq_Hz) {
    validate_or_throw(p, ValidationContext::analytic);
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> den =
        std::complex<double>(p.larmor_angular() - two_pi * freq_Hz, -p.gamma_angular());
    SpinTransfer t;
    t.jy_from_sz = -i * p.coupling_a * p.spin_Jx / (2.0 * den);
    t.jy_from_fy = -i / (2.0 * den);
    t.jy_from_fz = -1.0 / (2.0 * den);
    t.jz_from_sz = p.coupling_a * p.spin_Jx / (2.0 * den);
    t.jz_from_fy = 1.0 / (2.0 * den);
    t.jz_from_fz = -i / (2.0 * den);
    return t;
}

/// Numerator of the atomic Lorentzian when the denominator is written in
/// Hz^2, i.e. phi(f) = floor + num / ((larmor_Hz - f)^2 + gamma_Hz^2).
/// Split by physical origin; units s^-1 * Hz^2.
struct LorentzNumerator {
    double backaction = 0.0;
    double projection = 0.0;
    double technical = 0.0;

    double total() const { return backaction + projection + technical; }
};

inline LorentzNumerator lorentz_numerator(const ExperimentParams& p) {
    const double pref = 0.25 * p.coupling_a * p.coupling_a * p.flux_Sx * p.flux_Sx /
                        (two_pi * two_pi);
    LorentzNumerator n;
    n.backaction = pref * (p.coupling_a * p.coupling_a * p.spin_Jx * p.spin_Jx *
                           p.eps_z * p.flux_Sx / 2.0);
    n.projection = pref * 2.0 * p.langevin_density();
    n.technical = pref * 2.0 * p.tech_noise_k;
    return n;
}

/// Two-sided output density at one frequency: shot floor plus the atomic
/// Lorentzian (back-action + projection + technical terms).
inline double spectrum_phi(const ExperimentParams& p, double freq_Hz) {
    validate_or_throw(p, ValidationContext::analytic);
    const double df = p.larmor_Hz - freq_Hz;
    const double den = df * df + p.gamma_Hz * p.gamma_Hz;
    return p.shot_floor() + lorentz_numerator(p).total() / den;
}

// --- Single-peak areas over ordinary frequency -----------------------------

/// Back-action noise area, s^-2. Scales as a^4 J_x^2 eps_z (S_x/2)^3 / Gamma.
inline double bana_closed_form(const ExperimentParams& p) {
    validate_or_throw(p, ValidationContext::analytic);
    return std::numbers::pi * lorentz_numerator(p).backaction / p.gamma_Hz;
}

/// Projection noise area, s^-2. Equals a^2 J_x (S_x/2)^2: no Gamma, no eps_z.
inline double pna_closed_form(const ExperimentParams& p) {
    validate_or_throw(p, ValidationContext::analytic);
    return std::numbers::pi * lorentz_numerator(p).projection / p.gamma_Hz;
}

/// Technical noise area, s^-2. Zero for tech_noise_k = 0.
inline double tna_closed_form(const ExperimentParams& p) {
    validate_or_throw(p, ValidationContext::analytic);
    return std::numbers::pi * lorentz_numerator(p).technical / p.gamma_Hz;
}

/// Projection noise area inferred from a coherent-probe back-action area and
/// the shot noise level: 2*sqrt(pi * gamma_Hz * bana * snl). Exact identity
/// with the closed forms when bana was taken at eps_z = 1.
inline double infer_pna(double bana, double snl, double gamma_Hz) {
    if (!(bana > 0.0)) throw Error(Errc::non_positive_input, "bana must be > 0");
    if (!(snl > 0.0)) throw Error(Errc::non_positive_input, "snl must be > 0");
    if (!(gamma_Hz > 0.0)) throw Error(Errc::non_positive_input, "gamma_Hz must be > 0");
    return 2.0 * std::sqrt(std::numbers::pi * gamma_Hz * bana * snl);
}

/// Fraction of a Lorentzian of half-width gamma captured by a window
/// [center - w_lo, center + w_hi]; used to tail-correct finite-window areas.
inline double lorentz_window_fraction(double w_lo, double w_hi, double gamma_Hz) {
    return (std::atan(w_hi / gamma_Hz) + std::atan(w_lo / gamma_Hz)) / std::numbers::pi;
}

// --- Steady-state variance budget of J_z ------------------------------------

/// Contributions to <J_z^2> in steady state. Both mirror resonances are
/// counted, so with coupling off and no technical force the quantum part is
/// exactly J_x/2.
struct VarianceBudget {
    double var_quantum = 0.0;
    double var_backaction = 0.0;
    double var_technical = 0.0;

    double total() const { return var_quantum + var_backaction + var_technical; }
};

inline VarianceBudget variance_budget(const ExperimentParams& p) {
    if (p.spin_Jx == 0.0) {
        // no atoms: nothing precesses, nothing fluctuates
        ExperimentParams q = p;
        q.spin_Jx = 1.0;
        validate_or_throw(q, ValidationContext::analytic);
        return {};
    }
    validate_or_throw(p, ValidationContext::analytic);
    VarianceBudget v;
    v.var_quantum = p.spin_Jx / 2.0;
    const double q_ba = p.coupling_a * p.coupling_a * p.spin_Jx * p.spin_Jx *
                        p.eps_z * p.flux_Sx / 2.0;
    v.var_backaction = q_ba / (4.0 * p.gamma_angular());
    v.var_technical = p.tech_noise_k / (2.0 * p.gamma_angular());
    return v;
}

} // namespace spinmem::analytic
