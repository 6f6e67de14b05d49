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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmem/analytic.hpp"
#include "spinmem/errors.hpp"
#include "spinmem/spectrum.hpp"

// Weighted nonlinear least squares of floor + L/((f-f0)^2 + g^2) against an
// averaged spectrum. Periodogram bins are chi-squared distributed with
// relative sigma 1/sqrt(n_avg), so weights follow the model PSD (two passes:
// data-weighted, then model-weighted).

namespace spinmem::spectral {

struct LorentzianFit {
    double floor = 0.0;     ///< s^-1
    double center_Hz = 0.0;
    double hwhm_Hz = 0.0;
    double area = 0.0;      ///< s^-2, full-line area pi*height*hwhm over Hz
    /// covariance of (floor, center_Hz, hwhm_Hz, area), row-major
    std::array<double, 16> covariance{};
    double chi2 = 0.0;
    std::size_t dof = 0;
    std::size_t n_bins = 0;

    double floor_se() const { return std::sqrt(std::max(covariance[0], 0.0)); }
    double center_se() const { return std::sqrt(std::max(covariance[5], 0.0)); }
    double hwhm_se() const { return std::sqrt(std::max(covariance[10], 0.0)); }
    double area_se() const { return std::sqrt(std::max(covariance[15], 0.0)); }
    double height() const { return hwhm_Hz > 0 ? area / (std::numbers::pi * hwhm_Hz) : 0.0; }
    double reduced_chi2() const { return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0; }
};

struct FitWindow {
    double f_lo = 0.0;
    double f_hi = 0.0;
};

namespace detail {

/// Solve a 4x4 system in-place (partial pivoting). Returns false if singular.
inline bool solve4(std::array<double, 16>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r * 4 + col]) > std::abs(a[piv * 4 + col])) piv = r;
        if (a[piv * 4 + col] == 0.0) return false;
        if (piv != col) {
            for (int k = 0; k < 4; ++k) std::swap(a[col * 4 + k], a[piv * 4 + k]);
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a[col * 4 + col];
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r * 4 + col] * inv;
            if (f == 0.0) continue;
            for (int k = col; k < 4; ++k) a[r * 4 + k] -= f * a[col * 4 + k];
            b[r] -= f * b[col];
        }
    }
    for (int col = 0; col < 4; ++col) b[col] /= a[col * 4 + col];
    return true;
}

inline bool invert4(const std::array<double, 16>& m, std::array<double, 16>& inv) {
    for (int col = 0; col < 4; ++col) {
        std::array<double, 16> a = m;
        std::array<double, 4> e{};
        e[col] = 1.0;
        if (!solve4(a, e)) return false;
        for (int r = 0; r < 4; ++r) inv[r * 4 + col] = e[r];
    }
    return true;
}

struct LmResult {
    std::array<double, 4> p; // B, L, f0, g
    std::array<double, 16> cov;
    double chi2;
    bool converged;
};

inline LmResult levenberg_marquardt(const std::vector<double>& f, const std::vector<double>& y,
                                    const std::vector<double>& sigma, std::array<double, 4> p) {
    const std::size_t n = f.size();
    auto model = [](const std::array<double, 4>& q, double fi) {
        const double d = fi - q[2];
        return q[0] + q[1] / (d * d + q[3] * q[3]);
    };
    auto chi2_of = [&](const std::array<double, 4>& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (y[i] - model(q, f[i])) / sigma[i];
            c += r * r;
        }
        return c;
    };

    double lambda = 1e-3;
    double chi2 = chi2_of(p);
    bool converged = false;
    for (int iter = 0; iter < 400; ++iter) {
        // normal equations from the analytic Jacobian
        std::array<double, 16> jtj{};
        std::array<double, 4> jtr{};
        for (std::size_t i = 0; i < n; ++i) {
            const double d = f[i] - p[2];
            const double den = d * d + p[3] * p[3];
            const double w = 1.0 / (sigma[i] * sigma[i]);
            const std::array<double, 4> j = {
                1.0,
                1.0 / den,
                p[1] * 2.0 * d / (den * den),
                -p[1] * 2.0 * p[3] / (den * den),
            };
            const double r = y[i] - model(p, f[i]);
            for (int a = 0; a < 4; ++a) {
                jtr[a] += w * j[a] * r;
                for (int b = 0; b < 4; ++b) jtj[a * 4 + b] += w * j[a] * j[b];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 60 && !stepped; ++attempt) {
            std::array<double, 16> a = jtj;
            for (int k = 0; k < 4; ++k) a[k * 4 + k] *= (1.0 + lambda);
            std::array<double, 4> delta = jtr;
            if (!solve4(a, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::array<double, 4> cand = {p[0] + delta[0], p[1] + delta[1], p[2] + delta[2],
                                          p[3] + delta[3]};
            if (!(cand[3] > 0.0) || !std::isfinite(cand[3]) || !std::isfinite(cand[2])) {
                lambda *= 10.0;
                continue;
            }
            const double c2 = chi2_of(cand);
            if (std::isfinite(c2) && c2 <= chi2) {
                const double drop = chi2 - c2;
                p = cand;
                chi2 = c2;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (drop <= 1e-12 * (chi2 + 1e-300) || drop < 1e-300) {
                    converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) {
            // cannot improve further in any damping direction: stationary
            converged = true;
        }
        if (converged) break;
    }

    LmResult res;
    res.p = p;
    res.chi2 = chi2;
    res.converged = converged;
    // covariance from the undamped normal matrix at the optimum
    std::array<double, 16> jtj{};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = f[i] - p[2];
        const double den = d * d + p[3] * p[3];
        const double w = 1.0 / (sigma[i] * sigma[i]);
        const std::array<double, 4> j = {
            1.0, 1.0 / den, p[1] * 2.0 * d / (den * den), -p[1] * 2.0 * p[3] / (den * den)};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) jtj[a * 4 + b] += w * j[a] * j[b];
    }
    if (!invert4(jtj, res.cov)) res.converged = false;
    return res;
}

} // namespace detail

/// Direct-summation cross-check: (psd - floor) summed over the window,
/// divided by the captured Lorentzian fraction of that window.
inline double area_direct_sum(const Spectrum& s, FitWindow w, double floor, double center_Hz,
                              double hwhm_Hz) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.freq_Hz[i] >= w.f_lo && s.freq_Hz[i] <= w.f_hi) sum += s.psd[i] - floor;
    const double frac =
        analytic::lorentz_window_fraction(center_Hz - w.f_lo, w.f_hi - center_Hz, hwhm_Hz);
    return sum * s.df() / frac;
}

inline LorentzianFit fit_lorentzian(const Spectrum& s, FitWindow w) {
    if (!s.grid_uniform()) throw Error(Errc::bad_config, "spectrum grid is not uniform");
    std::vector<double> f, y;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.freq_Hz[i] >= w.f_lo && s.freq_Hz[i] <= w.f_hi) {
            f.push_back(s.freq_Hz[i]);
            y.push_back(s.psd[i]);
        }
    const std::size_t n = f.size();
    if (n < 20) throw Error(Errc::insufficient_data, "fit window has fewer than 20 bins");

    // peak detection on lightly smoothed data, before any fitting
    std::vector<double> sm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min(i + 2, n - 1);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += y[k];
        sm[i] = acc / static_cast<double>(hi - lo + 1);
    }
    std::vector<double> sorted = sm;
    std::sort(sorted.begin(), sorted.end());
    const double floor0 = sorted[n / 4]; // lower-quartile level
    std::size_t ipk = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (sm[i] > sm[ipk]) ipk = i;
    const double height0 = sm[ipk] - floor0;
    const double n_eff = s.n_eff > 0.0 ? s.n_eff
                         : (s.n_avg > 0 ? static_cast<double>(s.n_avg) : 1e12);
    const double floor_noise = floor0 / std::sqrt(n_eff);
    if (!(height0 > 3.0 * floor_noise))
        throw Error(Errc::peak_not_found, "no peak above 3x the floor noise in the window");

    // half-maximum crossings give the initial width
    const double half = floor0 + height0 / 2.0;
    std::size_t l = ipk, r = ipk;
    while (l > 0 && sm[l] > half) --l;
    while (r + 1 < n && sm[r] > half) ++r;
    double g0 = std::max((f[r] - f[l]) / 2.0, s.df());
    std::array<double, 4> init = {floor0, height0 * g0 * g0, f[ipk], g0};

    // per-bin sigma follows the model; two passes, data-weighted then
    // model-weighted, with bounded restarts on failure
    detail::LmResult res{};
    bool ok = false;
    for (int restart = 0; restart < 4 && !ok; ++restart) {
        std::array<double, 4> p0 = init;
        if (restart > 0) {
            const double scale = (restart == 1) ? 0.5 : (restart == 2 ? 2.0 : 4.0);
            p0[3] = init[3] * scale;
            p0[1] = init[1] * scale * scale;
        }
        std::vector<double> sigma(n);
        for (std::size_t i = 0; i < n; ++i)
            sigma[i] = std::max(y[i], 1e-300) / std::sqrt(n_eff);
        res = detail::levenberg_marquardt(f, y, sigma, p0);
        if (!res.converged) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = f[i] - res.p[2];
            const double m = res.p[0] + res.p[1] / (d * d + res.p[3] * res.p[3]);
            sigma[i] = std::max(m, 1e-300) / std::sqrt(n_eff);
        }
        res = detail::levenberg_marquardt(f, y, sigma, res.p);
        ok = res.converged && res.p[3] > 0.0;
    }
    if (!ok) throw Error(Errc::no_convergence, "Lorentzian fit did not converge");

    // correlated neighbouring bins carry less information than the diagonal
    // normal matrix claims; widen the covariance with the sandwich
    // A^-1 (J' W C W J) A^-1 built from the spectrum's correlation kernel
    if (!s.bin_corr.empty()) {
        std::vector<double> sigma(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = f[i] - res.p[2];
            const double m = res.p[0] + res.p[1] / (d * d + res.p[3] * res.p[3]);
            sigma[i] = std::max(m, 1e-300) / std::sqrt(n_eff);
        }
        auto jac = [&](std::size_t i, std::array<double, 4>& j) {
            const double d = f[i] - res.p[2];
            const double den = d * d + res.p[3] * res.p[3];
            j = {1.0, 1.0 / den, res.p[1] * 2.0 * d / (den * den),
                 -res.p[1] * 2.0 * res.p[3] / (den * den)};
        };
        std::array<double, 16> a{}, b{};
        std::array<double, 4> ji{}, jk{};
        for (std::size_t i = 0; i < n; ++i) {
            jac(i, ji);
            const double wi = 1.0 / (sigma[i] * sigma[i]);
            for (int r = 0; r < 4; ++r)
                for (int c2 = 0; c2 < 4; ++c2) {
                    a[r * 4 + c2] += wi * ji[r] * ji[c2];
                    b[r * 4 + c2] += wi * ji[r] * ji[c2];
                }
            for (std::size_t lag = 1; lag <= s.bin_corr.size() && i + lag < n; ++lag) {
                jac(i + lag, jk);
                const double cross = s.bin_corr[lag - 1] / (sigma[i] * sigma[i + lag]);
                for (int r = 0; r < 4; ++r)
                    for (int c2 = 0; c2 < 4; ++c2)
                        b[r * 4 + c2] += cross * (ji[r] * jk[c2] + jk[r] * ji[c2]);
            }
        }
        std::array<double, 16> a_inv{};
        if (detail::invert4(a, a_inv)) {
            std::array<double, 16> t{};
            for (int r = 0; r < 4; ++r)
                for (int c2 = 0; c2 < 4; ++c2) {
                    double acc = 0.0;
                    for (int k = 0; k < 4; ++k) acc += a_inv[r * 4 + k] * b[k * 4 + c2];
                    t[r * 4 + c2] = acc;
                }
            for (int r = 0; r < 4; ++r)
                for (int c2 = 0; c2 < 4; ++c2) {
                    double acc = 0.0;
                    for (int k = 0; k < 4; ++k) acc += t[r * 4 + k] * a_inv[k * 4 + c2];
                    res.cov[r * 4 + c2] = acc;
                }
        }
    }

    LorentzianFit out;
    out.floor = res.p[0];
    out.center_Hz = res.p[2];
    out.hwhm_Hz = res.p[3];
    out.area = std::numbers::pi * res.p[1] / res.p[3];
    out.chi2 = res.chi2;
    out.n_bins = n;
    out.dof = n - 4;

    // covariance of (B, L, f0, g) -> (floor, center, hwhm, area)
    const double dAdL = std::numbers::pi / res.p[3];
    const double dAdg = -std::numbers::pi * res.p[1] / (res.p[3] * res.p[3]);
    const double T[4][4] = {
        {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, dAdL, 0, dAdg}};
    std::array<double, 16> tmp{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) tmp[i * 4 + j] += T[i][k] * res.cov[k * 4 + j];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += tmp[i * 4 + k] * T[j][k];
            out.covariance[i * 4 + j] = acc;
        }
    return out;
}

inline nlohmann::json to_json(const LorentzianFit& x) {
    return nlohmann::json{
        {"convention", convention_tag},
        {"floor", x.floor},
        {"floor_se", x.floor_se()},
        {"center_Hz", x.center_Hz},
        {"center_se", x.center_se()},
        {"hwhm_Hz", x.hwhm_Hz},
        {"hwhm_se", x.hwhm_se()},
        {"area", x.area},
        {"area_se", x.area_se()},
        {"covariance", x.covariance},
        {"chi2", x.chi2},
        {"dof", x.dof},
        {"n_bins", x.n_bins},
    };
}

inline LorentzianFit fit_from_json(const nlohmann::json& j) {
    LorentzianFit x;
    x.floor = j.at("floor").get<double>();
    x.center_Hz = j.at("center_Hz").get<double>();
    x.hwhm_Hz = j.at("hwhm_Hz").get<double>();
    x.area = j.at("area").get<double>();
    if (j.contains("covariance")) {
        auto v = j.at("covariance").get<std::vector<double>>();
        if (v.size() != 16) throw Error(Errc::bad_config, "covariance must have 16 entries");
        std::copy(v.begin(), v.end(), x.covariance.begin());
    }
    if (j.contains("chi2")) x.chi2 = j.at("chi2").get<double>();
    if (j.contains("dof")) x.dof = j.at("dof").get<std::size_t>();
    if (j.contains("n_bins")) x.n_bins = j.at("n_bins").get<std::size_t>();
    return x;
}

} // namespace spinmem::spectral
