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
#include <cstdint>
#include <string>
#include <vector>

#include "spinmem/errors.hpp"
#include "spinmem/params.hpp"
#include "spinmem/rng.hpp"
#include "spinmem/trajectory.hpp"

// Time-domain Monte Carlo engine for the transverse spin Langevin system
//
//   dJ_y = (-W J_z - G J_y) dt + a J_x S_z dt + dW_y
//   dJ_z = ( W J_y - G J_z) dt               + dW_z
//
// with angular rates W = 2*pi*larmor_Hz, G = 2*pi*gamma_Hz, white Langevin
// forces of density G*J_x + tech_noise_k per channel, the back-action drive
// S_z of density eps_z*S_x/2, and detected output
//
//   sy_out = S_y_in + a S_x J_z,   S_y_in white of density eps_y*S_x/2.
//
// Per-step white noise samples carry variance density/dt (the step average
// of the continuous process), so estimated spectra are densities over Hz.

namespace spinmem::sde {

enum class Frame { lab, rotating };
enum class Integrator { exact, euler };
enum class InitialSpin { deterministic, thermal };

struct SimConfig {
    double duration_s = 1.0;
    double dt_s = 1e-5;
    std::uint64_t seed = 1;
    Frame frame = Frame::lab;
    InitialSpin initial_spin = InitialSpin::thermal;
    Integrator integrator = Integrator::exact;

    // diagnostics: start from a chosen deterministic state and/or switch all
    // stochastic inputs off (pure damped precession)
    double initial_jy = 0.0;
    double initial_jz = 0.0;
    bool disable_noise = false;
};

// RNG channel layout, one Philox block per (step, channel)
namespace channel {
inline constexpr std::uint32_t transverse_1 = 0; // F_y / first exact-noise component
inline constexpr std::uint32_t transverse_2 = 1; // F_z / second exact-noise component
inline constexpr std::uint32_t probe_sz = 2;     // back-action drive (Euler path)
inline constexpr std::uint32_t probe_sy = 3;     // detected shot noise
inline constexpr std::uint32_t init_jy = 4;      // thermal initial condition
inline constexpr std::uint32_t init_jz = 5;
} // namespace channel

/// Full validation of a (params, config) pair. Errors abort a simulation;
/// warnings (short duration, narrowband violation) are advisory.
inline ValidationReport check_config(const ExperimentParams& p, const SimConfig& c) {
    ExperimentParams pv = p;
    if (pv.spin_Jx == 0.0) pv.spin_Jx = 1.0; // J_x = 0 is a supported degenerate input
    ValidationReport r = validate(pv, ValidationContext::time_domain);

    if (!(c.dt_s > 0.0))
        r.errors.push_back({Errc::non_positive_parameter, "dt_s", "must be > 0"});
    if (!(c.duration_s > 0.0))
        r.errors.push_back({Errc::non_positive_parameter, "duration_s", "must be > 0"});
    if (r.errors.empty()) {
        const double dt_max = (c.frame == Frame::lab) ? 1.0 / (50.0 * p.larmor_Hz)
                                                      : 1.0 / (50.0 * p.gamma_Hz);
        if (c.dt_s > dt_max * (1.0 + 1e-12))
            r.errors.push_back({Errc::step_too_large, "dt_s",
                                (c.frame == Frame::lab)
                                    ? "lab frame requires dt <= 1/(50*larmor_Hz)"
                                    : "rotating frame requires dt <= 1/(50*gamma_Hz)"});
        if (c.frame == Frame::lab && c.integrator == Integrator::euler) {
            // explicit Euler on the precessing pair grows unless damping wins
            const double wa = p.larmor_angular(), ga = p.gamma_angular();
            if (c.dt_s > 2.0 * ga / (wa * wa))
                r.errors.push_back({Errc::step_too_large, "dt_s",
                                    "Euler is unstable here: need dt <= 2*Gamma_ang/Omega_ang^2; "
                                    "use the exact integrator or a smaller step"});
        }
        if (c.duration_s * p.gamma_Hz < 10.0)
            r.warnings.push_back("duration < 10/gamma_Hz: spectrum estimates will not be "
                                 "stationary-quality (DurationTooShort)");
        if (c.dt_s * 2.0 > 1.0 / (p.larmor_Hz + 10.0 * p.gamma_Hz) && c.frame == Frame::rotating)
            r.warnings.push_back("rotating frame: Nyquist band does not cover larmor_Hz + 10*gamma_Hz; "
                                 "sy_out spectra will alias the resonance");
    }
    return r;
}

namespace detail {

struct NoiseDensities {
    double transverse; // Langevin force density per channel (G*J_x + k_tech)
    double backaction; // density of a*J_x*S_z acting on J_y
    double shot;       // density of S_y_in
};

inline NoiseDensities densities(const ExperimentParams& p) {
    NoiseDensities d;
    d.transverse = p.langevin_density() + p.tech_noise_k;
    const double aj = p.coupling_a * p.spin_Jx;
    d.backaction = aj * aj * p.eps_z * p.flux_Sx / 2.0;
    d.shot = p.eps_y * p.flux_Sx / 2.0;
    return d;
}

/// Exact one-step update for the lab-frame linear system: mean propagator
/// e^{A dt} = e^{-G dt} R(W dt) and the exact covariance of the accumulated
/// noise over one step (anisotropic because the back-action drive acts on
/// J_y only), lower-triangular factored for sampling.
struct ExactLabStep {
    double m00, m01, m10, m11; // propagator
    double l11, l21, l22;      // Cholesky factor of the step covariance

    ExactLabStep(const ExperimentParams& p, double dt, const NoiseDensities& d,
                 bool noise_on) {
        const double ga = p.gamma_angular(), wa = p.larmor_angular();
        const double decay = std::exp(-ga * dt);
        const double c = std::cos(wa * dt), s = std::sin(wa * dt);
        m00 = decay * c;
        m01 = -decay * s;
        m10 = decay * s;
        m11 = decay * c;
        if (!noise_on) {
            l11 = l21 = l22 = 0.0;
            return;
        }
        const double d1 = d.transverse + d.backaction; // J_y channel
        const double d2 = d.transverse;                // J_z channel
        const double mean = 0.5 * (d1 + d2), aniso = 0.5 * (d1 - d2);
        const double beta = 2.0 * ga, alpha = 2.0 * wa;
        const double i0 = -std::expm1(-beta * dt) / beta;
        const double e = std::exp(-beta * dt);
        const double den = alpha * alpha + beta * beta;
        const double c2 = (beta - e * (beta * std::cos(alpha * dt) - alpha * std::sin(alpha * dt))) / den;
        const double s2 = (alpha - e * (beta * std::sin(alpha * dt) + alpha * std::cos(alpha * dt))) / den;
        const double q11 = mean * i0 + aniso * c2;
        const double q12 = aniso * s2;
        const double q22 = mean * i0 - aniso * c2;
        l11 = std::sqrt(std::max(q11, 0.0));
        l21 = (l11 > 0.0) ? q12 / l11 : 0.0;
        l22 = std::sqrt(std::max(q22 - l21 * l21, 0.0));
    }
};

} // namespace detail

/// One realization with an explicit realization index (ensemble member).
/// Draws are keyed by (seed, realization, step, channel): the stream is
/// independent of execution order and disjoint across realizations.
inline Trajectory simulate_realization(const ExperimentParams& p, const SimConfig& c,
                                       std::uint32_t realization) {
    {
        auto rep = check_config(p, c);
        if (!rep.ok()) throw Error(rep.errors.front().code, rep.summary());
    }
    const std::size_t n = static_cast<std::size_t>(std::llround(c.duration_s / c.dt_s));
    if (n < 2) throw Error(Errc::non_positive_parameter, "duration_s/dt_s must give >= 2 samples");

    Trajectory t;
    t.dt_s = c.dt_s;
    t.seed = c.seed;
    t.jy.resize(n);
    t.jz.resize(n);
    t.sy_out.resize(n);

    const NoiseStream rng(c.seed, realization);
    const bool noise_on = !c.disable_noise;
    const double a_sx = p.coupling_a * p.flux_Sx;
    const auto d = detail::densities(p);
    // per-step variance of step-averaged white noise is density/dt
    const double sy_sd = noise_on ? std::sqrt(d.shot / c.dt_s) : 0.0;

    // no atoms: spin stays at zero, output is pure shot noise
    if (p.spin_Jx == 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            t.sy_out[i] = sy_sd * rng.normal(i, channel::probe_sy);
        return t;
    }

    double jy0 = 0.0, jz0 = 0.0;
    if (c.initial_spin == InitialSpin::thermal && noise_on) {
        const double sd = std::sqrt(p.spin_Jx / 2.0);
        jy0 = sd * rng.normal(0, channel::init_jy);
        jz0 = sd * rng.normal(0, channel::init_jz);
    } else {
        jy0 = c.initial_jy;
        jz0 = c.initial_jz;
    }

    if (c.frame == Frame::lab) {
        double jy = jy0, jz = jz0;
        if (c.integrator == Integrator::exact) {
            const detail::ExactLabStep st(p, c.dt_s, d, noise_on);
            for (std::size_t i = 0; i < n; ++i) {
                t.jy[i] = jy;
                t.jz[i] = jz;
                t.sy_out[i] = sy_sd * rng.normal(i, channel::probe_sy) + a_sx * jz;
                const double n1 = noise_on ? rng.normal(i, channel::transverse_1) : 0.0;
                const double n2 = noise_on ? rng.normal(i, channel::transverse_2) : 0.0;
                const double ny = st.l11 * n1;
                const double nz = st.l21 * n1 + st.l22 * n2;
                const double jy_next = st.m00 * jy + st.m01 * jz + ny;
                const double jz_next = st.m10 * jy + st.m11 * jz + nz;
                jy = jy_next;
                jz = jz_next;
            }
        } else {
            const double ga = p.gamma_angular(), wa = p.larmor_angular();
            const double force_sd = noise_on ? std::sqrt(d.transverse * c.dt_s) : 0.0;
            const double sz_sd = noise_on ? std::sqrt(p.eps_z * p.flux_Sx / (2.0 * c.dt_s)) : 0.0;
            const double ajx = p.coupling_a * p.spin_Jx;
            for (std::size_t i = 0; i < n; ++i) {
                t.jy[i] = jy;
                t.jz[i] = jz;
                t.sy_out[i] = sy_sd * rng.normal(i, channel::probe_sy) + a_sx * jz;
                const double sz = sz_sd * rng.normal(i, channel::probe_sz);
                const double jy_next = jy + (-wa * jz - ga * jy + ajx * sz) * c.dt_s +
                                       force_sd * rng.normal(i, channel::transverse_1);
                const double jz_next = jz + (wa * jy - ga * jz) * c.dt_s +
                                       force_sd * rng.normal(i, channel::transverse_2);
                jy = jy_next;
                jz = jz_next;
            }
        }
    } else {
        // rotating frame: complex envelope c = J_+ e^{-iWt}; the narrow-band
        // model is integrated exactly (circular noise, half the back-action
        // density per quadrature), then the carrier is restored per sample.
        const double ga = p.gamma_angular(), wa = p.larmor_angular();
        const double kc = d.transverse + 0.5 * d.backaction;
        double cy = jy0, cz = jz0;
        double decay, sd;
        if (c.integrator == Integrator::exact) {
            decay = std::exp(-ga * c.dt_s);
            sd = noise_on ? std::sqrt(kc * -std::expm1(-2.0 * ga * c.dt_s) / (2.0 * ga)) : 0.0;
        } else {
            decay = 1.0 - ga * c.dt_s;
            sd = noise_on ? std::sqrt(kc * c.dt_s) : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = wa * (static_cast<double>(i) * c.dt_s);
            const double cph = std::cos(phase), sph = std::sin(phase);
            const double jy_i = cy * cph - cz * sph;
            const double jz_i = cy * sph + cz * cph;
            t.jy[i] = jy_i;
            t.jz[i] = jz_i;
            t.sy_out[i] = sy_sd * rng.normal(i, channel::probe_sy) + a_sx * jz_i;
            cy = decay * cy + sd * (noise_on ? rng.normal(i, channel::transverse_1) : 0.0);
            cz = decay * cz + sd * (noise_on ? rng.normal(i, channel::transverse_2) : 0.0);
        }
    }
    return t;
}

/// Single realization (ensemble member 0).
inline Trajectory simulate(const ExperimentParams& p, const SimConfig& c) {
    return simulate_realization(p, c, 0);
}

/// n independent realizations; member r uses the counter block (seed, r),
/// so the result is identical however the loop is scheduled.
inline std::vector<Trajectory> simulate_ensemble(const ExperimentParams& p, const SimConfig& c,
                                                 std::size_t n_realizations) {
    if (n_realizations < 1) throw Error(Errc::empty_input, "need n_realizations >= 1");
    std::vector<Trajectory> out;
    out.reserve(n_realizations);
    for (std::size_t r = 0; r < n_realizations; ++r)
        out.push_back(simulate_realization(p, c, static_cast<std::uint32_t>(r)));
    return out;
}

// ---------------------------------------------------------------------------
// Free-decay autocorrelation (coupling off)
// ---------------------------------------------------------------------------

struct DecayAutocorrelation {
    std::vector<double> lag_s;    ///< requested lags snapped to the sample grid
    std::vector<double> corr_zz;  ///< <J_z(t) J_z(t+tau)>
    std::vector<double> corr_zy;  ///< <J_z(t) J_y(t+tau)>
    std::vector<double> envelope; ///< hypot of the quadrature pair
};

/// Empirical stationary autocorrelation of J_z for the freely decaying spin.
/// The envelope decays as exp(-2*pi*gamma_Hz * tau) from a lag-0 value of
/// J_x/2. Requires coupling_a = 0; always simulates from a thermal state.
inline DecayAutocorrelation decay_autocorrelation(const ExperimentParams& p, SimConfig c,
                                                  const std::vector<double>& lags_s,
                                                  std::uint32_t realization = 0) {
    if (p.coupling_a != 0.0)
        throw Error(Errc::bad_config, "decay_autocorrelation requires coupling_a = 0");
    if (lags_s.empty()) throw Error(Errc::empty_input, "no lags requested");
    c.initial_spin = InitialSpin::thermal;
    const Trajectory t = simulate_realization(p, c, realization);
    const std::size_t n = t.size();

    DecayAutocorrelation out;
    for (double lag : lags_s) {
        const auto steps = static_cast<std::size_t>(std::llround(lag / c.dt_s));
        if (steps + n / 4 > n || n < 1000)
            throw Error(Errc::insufficient_data,
                        "trajectory too short for lag " + std::to_string(lag) + " s");
        double szz = 0.0, szy = 0.0;
        const std::size_t m = n - steps;
        for (std::size_t i = 0; i < m; ++i) {
            szz += t.jz[i] * t.jz[i + steps];
            szy += t.jz[i] * t.jy[i + steps];
        }
        out.lag_s.push_back(static_cast<double>(steps) * c.dt_s);
        out.corr_zz.push_back(szz / static_cast<double>(m));
        out.corr_zy.push_back(szy / static_cast<double>(m));
        out.envelope.push_back(std::hypot(out.corr_zz.back(), out.corr_zy.back()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SimConfig& c) {
    nlohmann::json j{
        {"duration_s", c.duration_s},
        {"dt_s", c.dt_s},
        {"seed", c.seed},
        {"frame", c.frame == Frame::lab ? "lab" : "rotating"},
        {"initial_spin", c.initial_spin == InitialSpin::thermal ? "thermal" : "deterministic"},
        {"integrator", c.integrator == Integrator::exact ? "exact" : "euler"},
    };
    if (c.disable_noise) j["disable_noise"] = true;
    if (c.initial_jy != 0.0) j["initial_jy"] = c.initial_jy;
    if (c.initial_jz != 0.0) j["initial_jz"] = c.initial_jz;
    return j;
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::bad_config, "sim config must be a JSON object");
    SimConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const auto& v = it.value();
        if (k == "duration_s") c.duration_s = v.get<double>();
        else if (k == "dt_s") c.dt_s = v.get<double>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else if (k == "frame") {
            const std::string s = v.get<std::string>();
            if (s == "lab") c.frame = Frame::lab;
            else if (s == "rotating") c.frame = Frame::rotating;
            else throw Error(Errc::bad_config, "frame must be 'lab' or 'rotating'");
        } else if (k == "initial_spin") {
            const std::string s = v.get<std::string>();
            if (s == "thermal") c.initial_spin = InitialSpin::thermal;
            else if (s == "deterministic") c.initial_spin = InitialSpin::deterministic;
            else throw Error(Errc::bad_config, "initial_spin must be 'thermal' or 'deterministic'");
        } else if (k == "integrator") {
            const std::string s = v.get<std::string>();
            if (s == "exact") c.integrator = Integrator::exact;
            else if (s == "euler") c.integrator = Integrator::euler;
            else throw Error(Errc::bad_config, "integrator must be 'exact' or 'euler'");
        } else if (k == "disable_noise") c.disable_noise = v.get<bool>();
        else if (k == "initial_jy") c.initial_jy = v.get<double>();
        else if (k == "initial_jz") c.initial_jz = v.get<double>();
        else throw Error(Errc::bad_config, "unknown sim config key '" + k + "'");
    }
    return c;
}

} // namespace spinmem::sde
