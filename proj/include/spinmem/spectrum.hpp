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
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmem/errors.hpp"
#include "spinmem/io.hpp"

namespace spinmem {

/// Convention tag stamped on every serialized spectrum and area record.
inline constexpr const char* convention_tag = "area-over-Hz,two-sided";

/// Two-sided power spectral density over ordinary frequency. For sampled
/// real signals the grid covers [0, Nyquist]; the density values are
/// two-sided, so total power is twice the integral over the stored band.
struct Spectrum {
    std::vector<double> freq_Hz;
    std::vector<double> psd;    ///< s^-1 (flux squared per Hz)
    std::vector<double> psd_se; ///< standard error per bin (empty if unknown)
    double rbw_Hz = 0.0;        ///< resolution bandwidth of the estimate
    std::size_t n_avg = 0;      ///< averaged segments x realizations
    double n_eff = 0.0;         ///< effective independent averages (overlap-corrected)
    std::vector<double> bin_corr; ///< periodogram correlation vs bin lag (from the window)
    std::string params_hash;    ///< fingerprint of the generating parameters

    std::size_t size() const { return freq_Hz.size(); }

    double df() const { return size() > 1 ? freq_Hz[1] - freq_Hz[0] : 0.0; }

    /// Index of the grid point closest to f.
    std::size_t index_of(double f) const {
        if (freq_Hz.empty()) throw Error(Errc::empty_input, "empty spectrum");
        if (f <= freq_Hz.front()) return 0;
        if (f >= freq_Hz.back()) return freq_Hz.size() - 1;
        const double step = df();
        auto i = static_cast<std::size_t>(std::llround((f - freq_Hz.front()) / step));
        return i < freq_Hz.size() ? i : freq_Hz.size() - 1;
    }

    /// Grid regularity invariant: equally spaced to 1 part in 1e9.
    bool grid_uniform() const {
        if (size() < 2) return true;
        const double step = df();
        for (std::size_t i = 1; i < size(); ++i) {
            const double d = freq_Hz[i] - freq_Hz[i - 1];
            if (std::abs(d - step) > 1e-9 * std::abs(step)) return false;
        }
        return true;
    }
};

inline nlohmann::json to_json(const Spectrum& s) {
    nlohmann::json j{
        {"convention", convention_tag}, {"params_hash", s.params_hash},
        {"rbw_Hz", s.rbw_Hz},           {"n_avg", s.n_avg},
        {"n_eff", s.n_eff},             {"freq_Hz", s.freq_Hz},
        {"psd", s.psd},
    };
    if (!s.bin_corr.empty()) j["bin_corr"] = s.bin_corr;
    if (!s.psd_se.empty()) j["psd_se"] = s.psd_se;
    return j;
}

inline Spectrum spectrum_from_json(const nlohmann::json& j) {
    Spectrum s;
    if (!j.is_object() || !j.contains("freq_Hz") || !j.contains("psd"))
        throw Error(Errc::bad_config, "spectrum JSON needs freq_Hz and psd arrays");
    s.freq_Hz = j.at("freq_Hz").get<std::vector<double>>();
    s.psd = j.at("psd").get<std::vector<double>>();
    if (j.contains("psd_se")) s.psd_se = j.at("psd_se").get<std::vector<double>>();
    if (j.contains("rbw_Hz")) s.rbw_Hz = j.at("rbw_Hz").get<double>();
    if (j.contains("n_avg")) s.n_avg = j.at("n_avg").get<std::size_t>();
    if (j.contains("n_eff")) s.n_eff = j.at("n_eff").get<double>();
    if (j.contains("bin_corr")) s.bin_corr = j.at("bin_corr").get<std::vector<double>>();
    if (j.contains("params_hash")) s.params_hash = j.at("params_hash").get<std::string>();
    if (s.freq_Hz.size() != s.psd.size())
        throw Error(Errc::bad_config, "freq_Hz and psd length mismatch");
    if (!s.psd_se.empty() && s.psd_se.size() != s.psd.size())
        throw Error(Errc::bad_config, "psd_se length mismatch");
    return s;
}

inline std::string spectrum_csv(const Spectrum& s) {
    std::string out = "# spinmem spectrum; convention=" + std::string(convention_tag) +
                      "; params_hash=" + s.params_hash + "; rbw_Hz=" + io::fmt(s.rbw_Hz) +
                      "; n_avg=" + std::to_string(s.n_avg) + "\n";
    out += s.psd_se.empty() ? "freq_Hz,psd\n" : "freq_Hz,psd,psd_se\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += io::fmt(s.freq_Hz[i]);
        out += ',';
        out += io::fmt(s.psd[i]);
        if (!s.psd_se.empty()) {
            out += ',';
            out += io::fmt(s.psd_se[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace spinmem
