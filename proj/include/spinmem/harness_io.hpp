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

#include <string>
#include <vector>

#include <json.hpp>

#include "spinmem/harness.hpp"

namespace spinmem::harness {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                                const std::string& what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto* k : known) ok = ok || (it.key() == k);
        if (!ok) throw Error(Errc::bad_config, "unknown " + what + " key '" + it.key() + "'");
    }
}

inline nlohmann::json to_json(const spectral::WelchConfig& w) {
    return {{"segment_length", w.segment_length},
            {"window", spectral::to_string(w.window)},
            {"overlap", w.overlap}};
}

inline spectral::WelchConfig welch_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"segment_length", "window", "overlap"}, "welch");
    spectral::WelchConfig w;
    if (j.contains("segment_length")) w.segment_length = j.at("segment_length").get<std::size_t>();
    if (j.contains("window")) w.window = spectral::window_from_string(j.at("window").get<std::string>());
    if (j.contains("overlap")) w.overlap = j.at("overlap").get<double>();
    return w;
}

inline nlohmann::json to_json(const EnsembleSpec& e) {
    return {{"sim", sde::to_json(e.sim)},
            {"realizations", e.realizations},
            {"welch", to_json(e.welch)},
            {"fit_halfwidth_gammas", e.fit_halfwidth_gammas}};
}

inline EnsembleSpec ensemble_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"sim", "realizations", "welch", "fit_halfwidth_gammas"}, "ensemble");
    EnsembleSpec e;
    if (j.contains("sim")) e.sim = sde::sim_config_from_json(j.at("sim"));
    if (j.contains("realizations")) e.realizations = j.at("realizations").get<std::size_t>();
    if (j.contains("welch")) e.welch = welch_from_json(j.at("welch"));
    if (j.contains("fit_halfwidth_gammas"))
        e.fit_halfwidth_gammas = j.at("fit_halfwidth_gammas").get<double>();
    return e;
}

inline nlohmann::json to_json(const SweepPlan& p) {
    return {{"params", spinmem::to_json(p.base)},
            {"axis", to_string(p.axis)},
            {"values", p.values},
            {"ensemble", to_json(p.ensemble)},
            {"eps_z_se", p.eps_z_se},
            {"dry_run", p.dry_run}};
}

inline SweepPlan sweep_plan_from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"params", "axis", "values", "ensemble", "eps_z_se", "dry_run"},
                        "sweep plan");
    SweepPlan p;
    if (!j.contains("params") || !j.contains("axis") || !j.contains("values"))
        throw Error(Errc::bad_config, "sweep plan needs params, axis and values");
    p.base = params_from_json(j.at("params"));
    p.axis = sweep_axis_from_string(j.at("axis").get<std::string>());
    p.values = j.at("values").get<std::vector<double>>();
    if (j.contains("ensemble")) p.ensemble = ensemble_from_json(j.at("ensemble"));
    if (j.contains("eps_z_se")) p.eps_z_se = j.at("eps_z_se").get<double>();
    if (j.contains("dry_run")) p.dry_run = j.at("dry_run").get<bool>();
    return p;
}

inline nlohmann::json areas_row_json(const spectral::NoiseAreas& a) {
    return spectral::to_json(a);
}

inline nlohmann::json to_json(const PowerLawFit& f) {
    return {{"exponent", f.exponent},   {"exponent_se", f.exponent_se},
            {"prefactor", f.prefactor}, {"prefactor_se", f.prefactor_se},
            {"chi2", f.chi2},           {"dof", f.dof},
            {"n_used", f.n_used}};
}

inline nlohmann::json to_json(const ScalingResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : r.points) {
        nlohmann::json row{{"x", pt.x}, {"ok", pt.ok}};
        if (pt.ok) row["areas"] = areas_row_json(pt.areas);
        else row["message"] = pt.message;
        pts.push_back(row);
    }
    return {{"convention", convention_tag},
            {"axis", to_string(r.axis)},
            {"bana_fit", to_json(r.bana_fit)},
            {"pna_fit", to_json(r.pna_fit)},
            {"points", pts}};
}

inline std::string sweep_csv(const ScalingResult& r, const std::string& hash) {
    std::string out = "# spinmem sweep axis=" + std::string(to_string(r.axis)) +
                      "; convention=" + convention_tag + "; params_hash=" + hash + "\n";
    out += "x,bana,bana_se,rsn,rsn_se,pna_inferred,pna_inferred_se,a_total,a_total_se,ok\n";
    for (const auto& pt : r.points) {
        out += io::fmt(pt.x);
        const auto& a = pt.areas;
        for (double v : {a.bana.value, a.bana.se, a.rsn.value, a.rsn.se, a.pna_inferred.value,
                         a.pna_inferred.se, a.a_total.value, a.a_total.se})
            out += "," + io::fmt(pt.ok ? v : std::nan(""));
        out += pt.ok ? ",1\n" : ",0\n";
    }
    return out;
}

inline nlohmann::json to_json(const SpectrumPairResult& r) {
    return {{"convention", convention_tag},
            {"wing_band_lo_Hz", r.wing_band_lo_Hz},
            {"wing_band_hi_Hz", r.wing_band_hi_Hz},
            {"wing_ratio", r.wing_ratio},
            {"wing_ratio_se", r.wing_ratio_se},
            {"wing_ratio_expected", r.wing_ratio_expected},
            {"floor_ratio", r.floor_ratio},
            {"peak_area_ratio", r.peak_area_ratio},
            {"peak_area_ratio_se", r.peak_area_ratio_se},
            {"peak_area_ratio_expected", r.peak_area_ratio_expected},
            {"fit_coherent", spectral::to_json(r.fit_coherent)},
            {"fit_squeezed", spectral::to_json(r.fit_squeezed)}};
}

inline nlohmann::json to_json(const GammaScanResult& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json x{{"gamma_Hz", row.gamma_Hz}, {"ok", row.ok}};
        if (row.ok) x["areas"] = areas_row_json(row.areas);
        else x["message"] = row.message;
        rows.push_back(x);
    }
    return {{"convention", convention_tag}, {"bana_fit", to_json(r.bana_fit)}, {"rows", rows}};
}

inline std::string gamma_scan_csv(const GammaScanResult& r, const std::string& hash) {
    std::string out = "# spinmem fig3; convention=" + std::string(convention_tag) +
                      "; params_hash=" + hash + "\n";
    out += "gamma_Hz,bana,bana_se,rsn,rsn_se,pna_inferred,pna_inferred_se,ok\n";
    for (const auto& row : r.rows) {
        out += io::fmt(row.gamma_Hz);
        const auto& a = row.areas;
        for (double v : {a.bana.value, a.bana.se, a.rsn.value, a.rsn.se, a.pna_inferred.value,
                         a.pna_inferred.se})
            out += "," + io::fmt(row.ok ? v : std::nan(""));
        out += row.ok ? ",1\n" : ",0\n";
    }
    return out;
}

inline nlohmann::json to_json(const SpinScanResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : r.points) {
        nlohmann::json x{{"spin_Jx", pt.spin_Jx}, {"gamma_Hz", pt.gamma_Hz}, {"ok", pt.ok}};
        if (pt.ok) x["areas"] = areas_row_json(pt.areas);
        else x["message"] = pt.message;
        pts.push_back(x);
    }
    return {{"convention", convention_tag},
            {"joint_slope", r.joint_fit.slope},
            {"joint_slope_se", r.joint_fit.slope_se},
            {"joint_chi2", r.joint_fit.chi2},
            {"joint_dof", r.joint_fit.dof},
            {"joint_reduced_chi2", r.joint_fit.reduced_chi2()},
            {"points", pts}};
}

inline std::string spin_scan_csv(const SpinScanResult& r, const std::string& hash) {
    std::string out = "# spinmem fig4; convention=" + std::string(convention_tag) +
                      "; params_hash=" + hash + "\n";
    out += "spin_Jx,gamma_Hz,pna_inferred,pna_inferred_se,bana,bana_se,ok\n";
    for (const auto& pt : r.points) {
        out += io::fmt(pt.spin_Jx) + "," + io::fmt(pt.gamma_Hz);
        const auto& a = pt.areas;
        for (double v : {a.pna_inferred.value, a.pna_inferred.se, a.bana.value, a.bana.se})
            out += "," + io::fmt(pt.ok ? v : std::nan(""));
        out += pt.ok ? ",1\n" : ",0\n";
    }
    return out;
}

} // namespace spinmem::harness
