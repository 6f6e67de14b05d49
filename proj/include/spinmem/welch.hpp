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
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "spinmem/errors.hpp"
#include "spinmem/fft.hpp"
#include "spinmem/spectrum.hpp"
#include "spinmem/trajectory.hpp"

// Welch-averaged PSD estimation. Normalization: |DFT(w*x)|^2 * dt / sum(w^2),
// so white noise of per-sample variance s^2 at step dt estimates a flat
// two-sided density of exactly s^2*dt, independent of the window.

namespace spinmem::spectral {

enum class Window { hann, rectangular };

inline Window window_from_string(const std::string& s) {
    if (s == "hann") return Window::hann;
    if (s == "rectangular" || s == "rect") return Window::rectangular;
    throw Error(Errc::bad_config, "unknown window '" + s + "'");
}

inline const char* to_string(Window w) {
    return w == Window::hann ? "hann" : "rectangular";
}

struct WelchConfig {
    std::size_t segment_length = 4096; ///< power of two
    Window window = Window::hann;
    double overlap = 0.5; ///< fraction of segment_length shared by neighbours
};

namespace detail {

inline std::vector<double> window_coefficients(Window w, std::size_t n) {
    std::vector<double> c(n, 1.0);
    if (w == Window::hann)
        for (std::size_t i = 0; i < n; ++i)
            c[i] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n)));
    return c;
}

/// Deterministic pairwise sum of rows[lo, hi) into `out` (fixed association,
/// so results do not depend on how the rows were produced).
inline void pairwise_sum_rows(const std::vector<std::vector<double>>& rows, std::size_t lo,
                              std::size_t hi, std::vector<double>& out) {
    if (hi - lo == 1) {
        out = rows[lo];
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> right;
    pairwise_sum_rows(rows, lo, mid, out);
    pairwise_sum_rows(rows, mid, hi, right);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += right[i];
}

} // namespace detail

inline std::size_t segments_per_record(std::size_t n_samples, const WelchConfig& cfg) {
    if (cfg.segment_length > n_samples) return 0;
    const auto hop_f = static_cast<double>(cfg.segment_length) * (1.0 - cfg.overlap);
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hop_f)));
    return (n_samples - cfg.segment_length) / hop + 1;
}

/// Segment-averaged periodogram of one record, bins 0..L/2 on [0, Nyquist].
inline std::vector<double> mean_periodogram(const std::vector<double>& x, double dt,
                                            const WelchConfig& cfg) {
    const std::size_t L = cfg.segment_length;
    if (L < 2 || (L & (L - 1)) != 0)
        throw Error(Errc::bad_config, "segment_length must be a power of two >= 2");
    if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0))
        throw Error(Errc::bad_config, "overlap must be in [0, 1)");
    if (x.empty()) throw Error(Errc::empty_input, "empty record");
    if (L > x.size())
        throw Error(Errc::segment_too_long, "segment_length exceeds record length");

    const auto win = detail::window_coefficients(cfg.window, L);
    double wsq = 0.0;
    for (double w : win) wsq += w * w;
    const double norm = dt / wsq;

    const auto hop_f = static_cast<double>(L) * (1.0 - cfg.overlap);
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hop_f)));
    const std::size_t nseg = (x.size() - L) / hop + 1;

    Fft fft(L);
    std::vector<std::complex<double>> buf(L);
    std::vector<double> acc(L / 2 + 1, 0.0);
    for (std::size_t s = 0; s < nseg; ++s) {
        const double* seg = x.data() + s * hop;
        for (std::size_t i = 0; i < L; ++i) buf[i] = {seg[i] * win[i], 0.0};
        fft.forward(buf);
        for (std::size_t b = 0; b <= L / 2; ++b) acc[b] += std::norm(buf[b]) * norm;
    }
    for (auto& v : acc) v /= static_cast<double>(nseg);
    return acc;
}

/// Combines per-record mean periodograms (all from records of equal length
/// and step) into one Spectrum with across-record standard errors.
inline Spectrum combine_periodograms(const std::vector<std::vector<double>>& rows,
                                     std::size_t segments_per_row, double dt,
                                     const WelchConfig& cfg,
                                     const std::string& hash = {}) {
    if (rows.empty()) throw Error(Errc::empty_input, "no periodograms to combine");
    const std::size_t nbins = rows.front().size();
    const std::size_t L = cfg.segment_length;

    Spectrum s;
    detail::pairwise_sum_rows(rows, 0, rows.size(), s.psd);
    const double r = static_cast<double>(rows.size());
    for (auto& v : s.psd) v /= r;

    if (rows.size() >= 2) {
        std::vector<std::vector<double>> sq(rows.size(), std::vector<double>(nbins));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t b = 0; b < nbins; ++b) {
                const double d = rows[i][b] - s.psd[b];
                sq[i][b] = d * d;
            }
        detail::pairwise_sum_rows(sq, 0, sq.size(), s.psd_se);
        for (auto& v : s.psd_se) v = std::sqrt(v / (r * (r - 1.0)));
    }

    const double df = 1.0 / (static_cast<double>(L) * dt);
    s.freq_Hz.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) s.freq_Hz[b] = static_cast<double>(b) * df;

    const auto win = detail::window_coefficients(cfg.window, L);
    double wsum = 0.0, wsq = 0.0;
    for (double w : win) { wsum += w; wsq += w * w; }
    s.rbw_Hz = wsq / (wsum * wsum * dt); // equivalent noise bandwidth of the window
    s.n_avg = rows.size() * segments_per_row;

    // overlapped segments within one record are correlated; the effective
    // number of independent averages follows from the window overlap
    // correlation c = [sum w(n) w(n+hop)]^2 / [sum w^2]^2
    const auto hop_f = static_cast<double>(L) * (1.0 - cfg.overlap);
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(hop_f)));
    double wlag = 0.0;
    for (std::size_t i = 0; i + hop < L; ++i) wlag += win[i] * win[i + hop];
    const double c = (wlag * wlag) / (wsq * wsq);
    const double k = static_cast<double>(segments_per_row);
    const double var_factor = k > 1.0 ? 1.0 + 2.0 * c * (k - 1.0) / k : 1.0;
    s.n_eff = static_cast<double>(s.n_avg) / var_factor;

    // neighbouring periodogram bins are correlated through the window:
    // rho_amp(d) = |sum w^2 e^{-i 2 pi d n / L}| / sum w^2, power corr = rho^2
    for (std::size_t d = 1; d <= 4; ++d) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            const double ang = -two_pi * static_cast<double>(d) * static_cast<double>(i) /
                               static_cast<double>(L);
            re += win[i] * win[i] * std::cos(ang);
            im += win[i] * win[i] * std::sin(ang);
        }
        const double rho = std::sqrt(re * re + im * im) / wsq;
        s.bin_corr.push_back(rho * rho);
    }
    while (!s.bin_corr.empty() && s.bin_corr.back() < 1e-6) s.bin_corr.pop_back();
    s.params_hash = hash;
    return s;
}

/// Welch estimate across an ensemble: every trajectory contributes a
/// segment-averaged periodogram of its detected output.
inline Spectrum estimate_psd(const std::vector<Trajectory>& trajs, const WelchConfig& cfg,
                             const std::string& hash = {}) {
    if (trajs.empty()) throw Error(Errc::empty_input, "no trajectories");
    std::vector<std::vector<double>> rows;
    rows.reserve(trajs.size());
    for (const auto& t : trajs) rows.push_back(mean_periodogram(t.sy_out, t.dt_s, cfg));
    return combine_periodograms(rows, segments_per_record(trajs.front().size(), cfg),
                                trajs.front().dt_s, cfg, hash);
}

} // namespace spinmem::spectral
