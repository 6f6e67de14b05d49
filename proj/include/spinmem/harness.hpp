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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinmem/analytic.hpp"
#include "spinmem/errors.hpp"
#include "spinmem/io.hpp"
#include "spinmem/lorentz.hpp"
#include "spinmem/noise_areas.hpp"
#include "spinmem/pool.hpp"
#include "spinmem/powerlaw.hpp"
#include "spinmem/sde.hpp"
#include "spinmem/welch.hpp"

// End-to-end orchestration: seeded ensembles -> Welch spectra -> Lorentzian
// fits -> area decomposition -> scaling regressions. All parallel loops fill
// per-index slots and reduce in index order, so file outputs are identical
// for any worker count.

namespace spinmem::harness {

struct EnsembleSpec {
    sde::SimConfig sim;
    std::size_t realizations = 100;
    spectral::WelchConfig welch;
    double fit_halfwidth_gammas = 10.0; ///< fit window half-width in units of gamma
};

/// Per-realization segment-averaged periodograms (parallel over members).
inline std::vector<std::vector<double>> periodogram_rows(const ExperimentParams& p,
                                                         const EnsembleSpec& spec,
                                                         unsigned threads) {
    if (spec.realizations < 1) throw Error(Errc::empty_input, "need >= 1 realization");
    std::vector<std::vector<double>> rows(spec.realizations);
    parallel_for(spec.realizations, threads, [&](std::size_t r) {
        const Trajectory t =
            sde::simulate_realization(p, spec.sim, static_cast<std::uint32_t>(r));
        rows[r] = spectral::mean_periodogram(t.sy_out, t.dt_s, spec.welch);
    });
    return rows;
}

inline Spectrum combine_rows(const std::vector<std::vector<double>>& rows,
                             const ExperimentParams& p, const EnsembleSpec& spec) {
    const auto n = static_cast<std::size_t>(std::llround(spec.sim.duration_s / spec.sim.dt_s));
    return spectral::combine_periodograms(rows, spectral::segments_per_record(n, spec.welch),
                                          spec.sim.dt_s, spec.welch, params_hash_hex(p));
}

/// Ensemble-averaged output spectrum.
inline Spectrum measure_spectrum(const ExperimentParams& p, const EnsembleSpec& spec,
                                 unsigned threads) {
    return combine_rows(periodogram_rows(p, spec, threads), p, spec);
}

inline spectral::FitWindow default_fit_window(const ExperimentParams& p, double halfwidth_gammas) {
    return {p.larmor_Hz - halfwidth_gammas * p.gamma_Hz,
            p.larmor_Hz + halfwidth_gammas * p.gamma_Hz};
}

/// Simulate, average and fit one probe configuration.
inline spectral::LorentzianFit measure_fit(const ExperimentParams& p, const EnsembleSpec& spec,
                                           unsigned threads) {
    const Spectrum s = measure_spectrum(p, spec, threads);
    return spectral::fit_lorentzian(s, default_fit_window(p, spec.fit_halfwidth_gammas));
}

/// Matched coherent/squeezed measurement split into noise areas. The
/// coherent run uses eps_y = eps_z = 1; the squeezed run uses the eps values
/// carried by `p`. Seeds for the two runs are derived from (sim.seed, salt).
inline spectral::NoiseAreas measure_pair(const ExperimentParams& p, const EnsembleSpec& spec,
                                         unsigned threads, std::uint64_t salt = 0,
                                         double eps_z_se = 0.0) {
    ExperimentParams coh = p;
    coh.eps_y = 1.0;
    coh.eps_z = 1.0;
    EnsembleSpec spec_coh = spec, spec_sq = spec;
    spec_coh.sim.seed = mix_seed(spec.sim.seed, 2 * salt);
    spec_sq.sim.seed = mix_seed(spec.sim.seed, 2 * salt + 1);

    const auto fit_coh = measure_fit(coh, spec_coh, threads);
    const auto fit_sq = measure_fit(p, spec_sq, threads);
    auto areas = spectral::decompose({fit_coh.area, fit_coh.area_se()},
                                     {fit_sq.area, fit_sq.area_se()}, p.eps_z, eps_z_se);
    areas.snl = {p.flux_Sx / 2.0, 0.0};
    areas.pna_inferred = spectral::infer_pna_from_measurement(areas, areas.snl, p.gamma_Hz);
    return areas;
}

// ---------------------------------------------------------------------------
// Scaling sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { flux_Sx, spin_Jx, gamma_Hz };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::flux_Sx: return "flux_Sx";
        case SweepAxis::spin_Jx: return "spin_Jx";
        case SweepAxis::gamma_Hz: return "gamma_Hz";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "flux_Sx") return SweepAxis::flux_Sx;
    if (s == "spin_Jx") return SweepAxis::spin_Jx;
    if (s == "gamma_Hz") return SweepAxis::gamma_Hz;
    throw Error(Errc::bad_config, "unknown sweep axis '" + s + "'");
}

struct SweepPlan {
    ExperimentParams base;
    SweepAxis axis = SweepAxis::flux_Sx;
    std::vector<double> values;
    EnsembleSpec ensemble;
    double eps_z_se = 0.0;
    bool dry_run = false; ///< substitute closed-form areas for simulation
};

struct SweepPoint {
    double x = 0.0;
    bool ok = false;
    std::string message;
    spectral::NoiseAreas areas;
};

struct ScalingResult {
    SweepAxis axis;
    std::vector<SweepPoint> points;
    PowerLawFit bana_fit;
    PowerLawFit pna_fit; ///< regression of the inferred projection area
};

inline ExperimentParams with_axis_value(const ExperimentParams& base, SweepAxis axis, double v) {
    ExperimentParams p = base;
    switch (axis) {
        case SweepAxis::flux_Sx: p.flux_Sx = v; break;
        case SweepAxis::spin_Jx: p.spin_Jx = v; break;
        case SweepAxis::gamma_Hz: p.gamma_Hz = v; break;
    }
    return p;
}

inline void validate_plan(const SweepPlan& plan) {
    if (plan.values.size() < 4)
        throw Error(Errc::bad_config, "sweep grid needs >= 4 points for exponent regression");
    for (std::size_t i = 1; i < plan.values.size(); ++i)
        if (!(plan.values[i] > plan.values[i - 1]))
            throw Error(Errc::bad_config, "sweep grid must be strictly increasing");
    for (double v : plan.values) {
        const auto p = with_axis_value(plan.base, plan.axis, v);
        const auto rep = validate(p, ValidationContext::analytic);
        if (!rep.ok())
            throw Error(rep.errors.front().code,
                        "grid point " + io::fmt(v) + " invalid: " + rep.summary());
    }
    if (!(plan.base.eps_z - 1.0 >= 0.1))
        throw Error(Errc::eps_too_close_to_one, "sweep needs a squeezed probe with eps_z >= 1.1");
}

inline ScalingResult run_sweep(const SweepPlan& plan, unsigned threads = 0) {
    validate_plan(plan);
    ScalingResult out;
    out.axis = plan.axis;
    out.points.resize(plan.values.size());

    for (std::size_t i = 0; i < plan.values.size(); ++i) {
        SweepPoint& pt = out.points[i];
        pt.x = plan.values[i];
        const auto p = with_axis_value(plan.base, plan.axis, plan.values[i]);
        try {
            if (plan.dry_run) {
                ExperimentParams coh = p;
                coh.eps_z = 1.0;
                const double a_coh = analytic::bana_closed_form(coh) +
                                     analytic::pna_closed_form(coh) +
                                     analytic::tna_closed_form(coh);
                const double a_sq = analytic::bana_closed_form(p) +
                                    analytic::pna_closed_form(p) + analytic::tna_closed_form(p);
                pt.areas = spectral::decompose({a_coh, 0.0}, {a_sq, 0.0}, p.eps_z, 0.0);
                pt.areas.snl = {p.flux_Sx / 2.0, 0.0};
                pt.areas.pna_inferred =
                    spectral::infer_pna_from_measurement(pt.areas, pt.areas.snl, p.gamma_Hz);
            } else {
                pt.areas = measure_pair(p, plan.ensemble, threads, i, plan.eps_z_se);
            }
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.message = e.what();
        }
    }

    std::vector<double> x, bana, bana_se, pna, pna_se;
    for (const auto& pt : out.points) {
        if (!pt.ok) continue;
        x.push_back(pt.x);
        bana.push_back(pt.areas.bana.value);
        bana_se.push_back(pt.areas.bana.se);
        pna.push_back(pt.areas.pna_inferred.value);
        pna_se.push_back(pt.areas.pna_inferred.se);
    }
    if (x.size() < 4)
        throw Error(Errc::insufficient_data, "fewer than 4 sweep points succeeded");
    const bool weighted = !plan.dry_run;
    out.bana_fit = fit_power_law(x, bana, weighted ? bana_se : std::vector<double>{});
    out.pna_fit = fit_power_law(x, pna, weighted ? pna_se : std::vector<double>{});
    return out;
}

// ---------------------------------------------------------------------------
// Canned reproductions
// ---------------------------------------------------------------------------

struct SpectrumPairResult {
    Spectrum coherent;
    Spectrum squeezed;
    spectral::LorentzianFit fit_coherent;
    spectral::LorentzianFit fit_squeezed;
    double wing_band_lo_Hz = 0.0, wing_band_hi_Hz = 0.0;
    double wing_ratio = 0.0, wing_ratio_se = 0.0, wing_ratio_expected = 0.0;
    double floor_ratio = 0.0; ///< fitted-floor ratio, for reference
    double peak_area_ratio = 0.0, peak_area_ratio_se = 0.0, peak_area_ratio_expected = 0.0;
};

namespace detail {
/// Mean and standard error of per-realization band means over [lo, hi].
inline std::pair<double, double> band_level(const std::vector<std::vector<double>>& rows,
                                            double df, double lo, double hi) {
    const std::size_t b_lo = static_cast<std::size_t>(std::ceil(lo / df));
    const std::size_t b_hi = std::min(static_cast<std::size_t>(std::floor(hi / df)),
                                      rows.front().size() - 1);
    if (b_hi <= b_lo + 8) throw Error(Errc::bad_config, "wing band too narrow");
    std::vector<double> means(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double acc = 0.0;
        for (std::size_t b = b_lo; b <= b_hi; ++b) acc += rows[r][b];
        means[r] = acc / static_cast<double>(b_hi - b_lo + 1);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    const double se = means.size() > 1
                          ? std::sqrt(var / (static_cast<double>(means.size()) *
                                             (static_cast<double>(means.size()) - 1.0)))
                          : 0.0;
    return {m, se};
}
} // namespace detail

/// Squeezed-versus-coherent morphology: the wings drop by eps_y while the
/// atomic peak grows with eps_z. The wing level is a far-band average taken
/// where every Lorentzian tail is negligible; the step size must leave that
/// band headroom above the resonance.
inline SpectrumPairResult reproduce_fig2(const ExperimentParams& coh, const ExperimentParams& sq,
                                         const EnsembleSpec& spec, unsigned threads) {
    if (!(sq.eps_y < 1.0 && sq.eps_z > 1.0))
        throw Error(Errc::bad_config, "squeezed case needs eps_y < 1 < eps_z");
    const double nyquist = 0.5 / spec.sim.dt_s;
    SpectrumPairResult r;
    r.wing_band_lo_Hz = 0.45 * nyquist;
    r.wing_band_hi_Hz = 0.90 * nyquist;
    if (r.wing_band_lo_Hz < coh.larmor_Hz + 25.0 * coh.gamma_Hz)
        throw Error(Errc::bad_config,
                    "wing band overlaps the resonance tails; use a smaller dt_s");

    EnsembleSpec spec_coh = spec, spec_sq = spec;
    spec_coh.sim.seed = mix_seed(spec.sim.seed, 100);
    spec_sq.sim.seed = mix_seed(spec.sim.seed, 101);

    const auto rows_coh = periodogram_rows(coh, spec_coh, threads);
    const auto rows_sq = periodogram_rows(sq, spec_sq, threads);
    r.coherent = combine_rows(rows_coh, coh, spec_coh);
    r.squeezed = combine_rows(rows_sq, sq, spec_sq);
    r.fit_coherent =
        spectral::fit_lorentzian(r.coherent, default_fit_window(coh, spec.fit_halfwidth_gammas));
    r.fit_squeezed =
        spectral::fit_lorentzian(r.squeezed, default_fit_window(sq, spec.fit_halfwidth_gammas));

    const auto [wing_coh, wing_coh_se] =
        detail::band_level(rows_coh, r.coherent.df(), r.wing_band_lo_Hz, r.wing_band_hi_Hz);
    const auto [wing_sq, wing_sq_se] =
        detail::band_level(rows_sq, r.squeezed.df(), r.wing_band_lo_Hz, r.wing_band_hi_Hz);
    r.wing_ratio = wing_sq / wing_coh;
    r.wing_ratio_se = r.wing_ratio * std::hypot(wing_sq_se / wing_sq, wing_coh_se / wing_coh);
    r.wing_ratio_expected = sq.eps_y / coh.eps_y;
    r.floor_ratio = r.fit_squeezed.floor / r.fit_coherent.floor;

    r.peak_area_ratio = r.fit_squeezed.area / r.fit_coherent.area;
    r.peak_area_ratio_se =
        r.peak_area_ratio * std::hypot(r.fit_squeezed.area_se() / r.fit_squeezed.area,
                                       r.fit_coherent.area_se() / r.fit_coherent.area);
    r.peak_area_ratio_expected =
        analytic::lorentz_numerator(sq).total() / analytic::lorentz_numerator(coh).total();
    return r;
}

struct GammaScanRow {
    double gamma_Hz = 0.0;
    bool ok = false;
    std::string message;
    spectral::NoiseAreas areas;
};

struct GammaScanResult {
    std::vector<GammaScanRow> rows;
    PowerLawFit bana_fit; ///< back-action area versus gamma (expect slope -1)
};

/// Back-action and residual noise areas across a decay-rate grid. With a
/// technical force the residual exceeds the projection area at small gamma
/// and levels onto it as gamma grows.
inline GammaScanResult reproduce_fig3(const ExperimentParams& base,
                                      const std::vector<double>& gamma_grid_Hz,
                                      const EnsembleSpec& spec, unsigned threads,
                                      bool dry_run = false) {
    if (gamma_grid_Hz.size() < 2)
        throw Error(Errc::bad_config, "gamma grid needs >= 2 points");
    for (std::size_t i = 1; i < gamma_grid_Hz.size(); ++i)
        if (!(gamma_grid_Hz[i] > gamma_grid_Hz[i - 1]))
            throw Error(Errc::bad_config, "gamma grid must be strictly increasing");
    if (!(gamma_grid_Hz.back() >= 4.0 * gamma_grid_Hz.front()))
        throw Error(Errc::bad_config, "gamma grid must span at least a factor of 4");

    GammaScanResult out;
    out.rows.resize(gamma_grid_Hz.size());
    for (std::size_t i = 0; i < gamma_grid_Hz.size(); ++i) {
        auto& row = out.rows[i];
        row.gamma_Hz = gamma_grid_Hz[i];
        ExperimentParams p = base;
        p.gamma_Hz = gamma_grid_Hz[i];
        try {
            if (dry_run) {
                ExperimentParams coh = p;
                coh.eps_z = 1.0;
                const double a_coh = analytic::bana_closed_form(coh) +
                                     analytic::pna_closed_form(coh) +
                                     analytic::tna_closed_form(coh);
                const double a_sq = analytic::bana_closed_form(p) +
                                    analytic::pna_closed_form(p) + analytic::tna_closed_form(p);
                row.areas = spectral::decompose({a_coh, 0.0}, {a_sq, 0.0}, p.eps_z);
                row.areas.snl = {p.flux_Sx / 2.0, 0.0};
                row.areas.pna_inferred =
                    spectral::infer_pna_from_measurement(row.areas, row.areas.snl, p.gamma_Hz);
            } else {
                row.areas = measure_pair(p, spec, threads, 1000 + i);
            }
            row.ok = true;
        } catch (const std::exception& e) {
            row.message = e.what();
        }
    }

    std::vector<double> x, y, se;
    for (const auto& row : out.rows)
        if (row.ok) {
            x.push_back(row.gamma_Hz);
            y.push_back(row.areas.bana.value);
            se.push_back(row.areas.bana.se);
        }
    if (x.size() < 2) throw Error(Errc::insufficient_data, "too few usable gamma points");
    out.bana_fit = fit_power_law(x, y, dry_run ? std::vector<double>{} : se);
    return out;
}

struct SpinScanPoint {
    double spin_Jx = 0.0;
    double gamma_Hz = 0.0;
    bool ok = false;
    std::string message;
    spectral::NoiseAreas areas;
};

struct SpinScanResult {
    std::vector<SpinScanPoint> points;
    ProportionalFit joint_fit; ///< inferred projection area vs J_x, both gammas pooled
};

/// Inferred projection area versus spin size at two decay rates; the points
/// should fall on one proportional line.
inline SpinScanResult reproduce_fig4(const ExperimentParams& base,
                                     const std::vector<double>& jx_grid,
                                     const std::pair<double, double>& gamma_pair_Hz,
                                     const EnsembleSpec& spec, unsigned threads,
                                     bool dry_run = false) {
    if (jx_grid.size() < 2) throw Error(Errc::bad_config, "spin grid needs >= 2 points");
    SpinScanResult out;
    const double gammas[2] = {gamma_pair_Hz.first, gamma_pair_Hz.second};
    std::size_t salt = 2000;
    for (double g : gammas) {
        for (double jx : jx_grid) {
            SpinScanPoint pt;
            pt.spin_Jx = jx;
            pt.gamma_Hz = g;
            ExperimentParams p = base;
            p.spin_Jx = jx;
            p.gamma_Hz = g;
            try {
                if (dry_run) {
                    ExperimentParams coh = p;
                    coh.eps_z = 1.0;
                    const double a_coh = analytic::bana_closed_form(coh) +
                                         analytic::pna_closed_form(coh) +
                                         analytic::tna_closed_form(coh);
                    const double a_sq = analytic::bana_closed_form(p) +
                                        analytic::pna_closed_form(p) +
                                        analytic::tna_closed_form(p);
                    pt.areas = spectral::decompose({a_coh, 0.0}, {a_sq, 0.0}, p.eps_z);
                    pt.areas.snl = {p.flux_Sx / 2.0, 0.0};
                    pt.areas.pna_inferred = spectral::infer_pna_from_measurement(
                        pt.areas, pt.areas.snl, p.gamma_Hz);
                    pt.areas.pna_inferred.se = 1e-6 * pt.areas.pna_inferred.value;
                } else {
                    pt.areas = measure_pair(p, spec, threads, salt);
                }
                pt.ok = true;
            } catch (const std::exception& e) {
                pt.message = e.what();
            }
            ++salt;
            out.points.push_back(pt);
        }
    }

    std::vector<double> x, y, se;
    for (const auto& pt : out.points)
        if (pt.ok) {
            x.push_back(pt.spin_Jx);
            y.push_back(pt.areas.pna_inferred.value);
            se.push_back(pt.areas.pna_inferred.se);
        }
    if (x.size() < 3) throw Error(Errc::insufficient_data, "too few usable spin points");
    out.joint_fit = fit_proportional(x, y, se);
    return out;
}

} // namespace spinmem::harness
