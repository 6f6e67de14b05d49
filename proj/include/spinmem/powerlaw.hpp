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
#include <vector>

#include "spinmem/errors.hpp"

namespace spinmem {

/// Weighted straight-line fit y = intercept + slope*x with per-point sigma.
/// Zero/absent sigmas mean an unweighted fit; the parameter errors are then
/// scaled by the residual scatter.
struct LineFit {
    double slope = 0.0, slope_se = 0.0;
    double intercept = 0.0, intercept_se = 0.0;
    double chi2 = 0.0;
    std::size_t dof = 0;

    double reduced_chi2() const { return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0; }
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& sigma = {}) {
    const std::size_t n = x.size();
    if (n != y.size() || (!sigma.empty() && sigma.size() != n))
        throw Error(Errc::bad_config, "fit_line: length mismatch");
    if (n < 2) throw Error(Errc::insufficient_data, "fit_line needs >= 2 points");
    bool weighted = !sigma.empty();
    if (weighted)
        for (double s : sigma)
            if (!(s > 0.0)) { weighted = false; break; }

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det == 0.0) throw Error(Errc::insufficient_data, "fit_line: degenerate abscissae");

    LineFit r;
    r.slope = (sw * swxy - swx * swy) / det;
    r.intercept = (swxx * swy - swx * swxy) / det;
    r.dof = n - 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = y[i] - (r.intercept + r.slope * x[i]);
        const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
        r.chi2 += w * res * res;
    }
    double var_scale = 1.0;
    if (!weighted) var_scale = r.dof > 0 ? r.chi2 / static_cast<double>(r.dof) : 0.0;
    r.slope_se = std::sqrt(var_scale * sw / det);
    r.intercept_se = std::sqrt(var_scale * swxx / det);
    return r;
}

/// Power-law fit y = A * x^p via weighted least squares on log y vs log x.
/// Point sigmas are absolute errors on y; sigma(log y) = sigma_y / y.
struct PowerLawFit {
    double exponent = 0.0, exponent_se = 0.0;
    double prefactor = 0.0, prefactor_se = 0.0;
    double chi2 = 0.0;
    std::size_t dof = 0;
    std::size_t n_used = 0;

    double reduced_chi2() const { return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0; }
};

inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& sigma_y = {}) {
    if (x.size() != y.size()) throw Error(Errc::bad_config, "fit_power_law: length mismatch");
    std::vector<double> lx, ly, ls;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        if (!sigma_y.empty()) ls.push_back(sigma_y[i] / y[i]);
    }
    if (lx.size() < 2) throw Error(Errc::insufficient_data, "fit_power_law needs >= 2 usable points");
    const LineFit lf = fit_line(lx, ly, ls);
    PowerLawFit r;
    r.exponent = lf.slope;
    r.exponent_se = lf.slope_se;
    r.prefactor = std::exp(lf.intercept);
    r.prefactor_se = r.prefactor * lf.intercept_se;
    r.chi2 = lf.chi2;
    r.dof = lf.dof;
    r.n_used = lx.size();
    return r;
}

/// Proportionality fit y = m*x (no intercept) with per-point sigma; used for
/// collinearity checks of area-versus-spin data across decay rates.
struct ProportionalFit {
    double slope = 0.0, slope_se = 0.0;
    double chi2 = 0.0;
    std::size_t dof = 0;

    double reduced_chi2() const { return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0; }
};

inline ProportionalFit fit_proportional(const std::vector<double>& x, const std::vector<double>& y,
                                        const std::vector<double>& sigma) {
    const std::size_t n = x.size();
    if (n != y.size() || n != sigma.size())
        throw Error(Errc::bad_config, "fit_proportional: length mismatch");
    if (n < 2) throw Error(Errc::insufficient_data, "fit_proportional needs >= 2 points");
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0.0)) throw Error(Errc::bad_config, "fit_proportional needs sigma > 0");
        const double w = 1.0 / (sigma[i] * sigma[i]);
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    ProportionalFit r;
    r.slope = sxy / sxx;
    r.slope_se = std::sqrt(1.0 / sxx);
    r.dof = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = (y[i] - r.slope * x[i]) / sigma[i];
        r.chi2 += res * res;
    }
    return r;
}

} // namespace spinmem
