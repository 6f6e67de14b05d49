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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinmem/harness.hpp"
#include "spinmem/harness_io.hpp"

// Command line front end. Exit codes: 0 success, 1 usage/validation error,
// 2 numerical failure. All file outputs go through atomic writes and are
// byte-identical for any --threads value and for repeated runs.

namespace spinmem::cli {

struct GlobalOpts {
    std::string config;
    std::string out_dir = ".";
    std::string format = "both"; // csv | json | both
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    bool want_csv() const { return format == "csv" || format == "both"; }
    bool want_json() const { return format == "json" || format == "both"; }

    std::filesystem::path path(const std::string& name) const {
        return std::filesystem::path(out_dir) / name;
    }
};

inline nlohmann::json load_config(const GlobalOpts& g) {
    if (g.config.empty()) throw Error(Errc::bad_config, "this subcommand needs --config <file>");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(g.config));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_config, std::string("cannot parse ") + g.config + ": " + e.what());
    }
    return j;
}

/// Seed precedence: --seed flag, then SPINMEM_SEED, then the config value.
inline void apply_seed(sde::SimConfig& sim, const GlobalOpts& g) {
    if (const char* env = std::getenv("SPINMEM_SEED")) {
        char* end = nullptr;
        const auto v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw Error(Errc::bad_config, "SPINMEM_SEED is not an unsigned integer");
        sim.seed = v;
    }
    if (g.seed) sim.seed = *g.seed;
}

inline void emit(const GlobalOpts& g, const std::string& stem, const nlohmann::json* json_doc,
                 const std::string* csv_doc) {
    if (g.want_json() && json_doc)
        io::write_file_atomic(g.path(stem + ".json"), json_doc->dump(2) + "\n");
    if (g.want_csv() && csv_doc) io::write_file_atomic(g.path(stem + ".csv"), *csv_doc);
}

inline void print_warnings(const ValidationReport& rep) {
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

// --- subcommand bodies ------------------------------------------------------

inline void cmd_spectrum(const GlobalOpts& g, double fmin, double fmax, std::size_t npts) {
    const auto cfg = load_config(g);
    const ExperimentParams p =
        params_from_json(cfg.contains("params") ? cfg.at("params") : cfg);
    const auto rep = validate(p, ValidationContext::analytic);
    print_warnings(rep);
    if (!rep.ok()) throw Error(rep.errors.front().code, rep.summary());

    if (std::isnan(fmin)) fmin = std::max(0.0, p.larmor_Hz - 15.0 * p.gamma_Hz);
    if (std::isnan(fmax)) fmax = p.larmor_Hz + 15.0 * p.gamma_Hz;
    if (!(fmax > fmin) || npts < 2) throw Error(Errc::bad_config, "bad frequency grid");

    Spectrum s;
    s.params_hash = params_hash_hex(p);
    s.freq_Hz.resize(npts);
    s.psd.resize(npts);
    const double step = (fmax - fmin) / static_cast<double>(npts - 1);
    for (std::size_t i = 0; i < npts; ++i) {
        s.freq_Hz[i] = fmin + step * static_cast<double>(i);
        s.psd[i] = analytic::spectrum_phi(p, s.freq_Hz[i]);
    }
    const auto j = to_json(s);
    const auto c = spectrum_csv(s);
    emit(g, "spectrum", &j, &c);
}

inline void cmd_simulate(const GlobalOpts& g) {
    const auto cfg = load_config(g);
    harness::reject_unknown_keys(cfg, {"params", "ensemble", "save_trajectories"}, "simulate");
    const ExperimentParams p = params_from_json(cfg.at("params"));
    harness::EnsembleSpec spec = harness::ensemble_from_json(
        cfg.contains("ensemble") ? cfg.at("ensemble") : nlohmann::json::object());
    apply_seed(spec.sim, g);
    print_warnings(sde::check_config(p, spec.sim));

    const std::size_t save_n =
        cfg.contains("save_trajectories") ? cfg.at("save_trajectories").get<std::size_t>() : 1;

    const Spectrum s = harness::measure_spectrum(p, spec, g.threads);
    const auto j = to_json(s);
    const auto c = spectrum_csv(s);
    emit(g, "psd", &j, &c);

    for (std::size_t r = 0; r < std::min(save_n, spec.realizations); ++r) {
        const auto t = sde::simulate_realization(p, spec.sim, static_cast<std::uint32_t>(r));
        char name[32];
        std::snprintf(name, sizeof(name), "trajectory_%03zu", r);
        save_trajectory(t, p, g.path(std::string(name) + ".spt").string());
        if (g.want_csv())
            io::write_file_atomic(g.path(std::string(name) + ".csv"), trajectory_csv(t, p));
    }
}

inline void cmd_fit(const GlobalOpts& g, const std::string& in_path, double fmin, double fmax) {
    if (in_path.empty()) throw Error(Errc::bad_config, "fit needs --in <spectrum.json>");
    Spectrum s;
    try {
        s = spectrum_from_json(nlohmann::json::parse(io::read_file(in_path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_config, std::string("cannot parse ") + in_path + ": " + e.what());
    }
    spectral::FitWindow w{std::isnan(fmin) ? s.freq_Hz.front() : fmin,
                          std::isnan(fmax) ? s.freq_Hz.back() : fmax};
    const auto fit = spectral::fit_lorentzian(s, w);
    auto j = spectral::to_json(fit);
    j["params_hash"] = s.params_hash;
    std::string c = "# spinmem fit; convention=" + std::string(convention_tag) +
                    "; params_hash=" + s.params_hash + "\n";
    c += "floor,floor_se,center_Hz,center_se,hwhm_Hz,hwhm_se,area,area_se,chi2,dof\n";
    c += io::fmt(fit.floor) + "," + io::fmt(fit.floor_se()) + "," + io::fmt(fit.center_Hz) + "," +
         io::fmt(fit.center_se()) + "," + io::fmt(fit.hwhm_Hz) + "," + io::fmt(fit.hwhm_se()) +
         "," + io::fmt(fit.area) + "," + io::fmt(fit.area_se()) + "," + io::fmt(fit.chi2) + "," +
         std::to_string(fit.dof) + "\n";
    emit(g, "fit", &j, &c);
}

inline void cmd_decompose(const GlobalOpts& g, const std::string& coh_path,
                          const std::string& sq_path, double eps_z, double eps_z_se, double snl,
                          double gamma_Hz) {
    if (coh_path.empty() || sq_path.empty())
        throw Error(Errc::bad_config, "decompose needs --coh and --sq fit files");
    const auto fc = spectral::fit_from_json(nlohmann::json::parse(io::read_file(coh_path)));
    const auto fs = spectral::fit_from_json(nlohmann::json::parse(io::read_file(sq_path)));
    auto areas = spectral::decompose({fc.area, fc.area_se()}, {fs.area, fs.area_se()}, eps_z,
                                     eps_z_se);
    if (snl > 0.0) {
        areas.snl = {snl, 0.0};
        if (gamma_Hz > 0.0)
            areas.pna_inferred = spectral::infer_pna_from_measurement(areas, areas.snl, gamma_Hz);
    }
    const auto j = spectral::to_json(areas);
    std::string c = "# spinmem noise areas; convention=" + std::string(convention_tag) + "\n";
    c += "bana,bana_se,rsn,rsn_se,pna_inferred,pna_inferred_se,a_total,a_total_se,snl,eps_z\n";
    c += io::fmt(areas.bana.value) + "," + io::fmt(areas.bana.se) + "," +
         io::fmt(areas.rsn.value) + "," + io::fmt(areas.rsn.se) + "," +
         io::fmt(areas.pna_inferred.value) + "," + io::fmt(areas.pna_inferred.se) + "," +
         io::fmt(areas.a_total.value) + "," + io::fmt(areas.a_total.se) + "," +
         io::fmt(areas.snl.value) + "," + io::fmt(areas.eps_z) + "\n";
    emit(g, "noise_areas", &j, &c);
}

inline void cmd_sweep(const GlobalOpts& g) {
    auto plan = harness::sweep_plan_from_json(load_config(g));
    apply_seed(plan.ensemble.sim, g);
    const auto result = harness::run_sweep(plan, g.threads);
    const auto j = harness::to_json(result);
    const auto c = harness::sweep_csv(result, params_hash_hex(plan.base));
    emit(g, "scaling", &j, &c);
    std::cerr << "sweep " << harness::to_string(result.axis)
              << ": bana exponent = " << result.bana_fit.exponent << " +- "
              << result.bana_fit.exponent_se << "\n";
}

// Canned reproductions with built-in desk-scale defaults. They run in the
// rotating frame, which realizes the narrow-band model exactly, so fitted
// areas are directly comparable to the closed forms; the lab frame carries
// the full precession dynamics and its percent-level wing asymmetry.

inline harness::EnsembleSpec default_ensemble() {
    harness::EnsembleSpec e;
    e.sim.duration_s = 2.0;
    e.sim.dt_s = 1.0 / 32768.0;
    e.sim.frame = sde::Frame::rotating;
    e.sim.seed = 12345;
    e.realizations = 200;
    e.welch.segment_length = 16384;
    return e;
}

inline void cmd_fig2(const GlobalOpts& g) {
    ExperimentParams sq = default_params();
    ExperimentParams coh = sq;
    coh.eps_y = 1.0;
    coh.eps_z = 1.0;
    harness::EnsembleSpec spec = default_ensemble();
    if (!g.config.empty()) {
        const auto cfg = load_config(g);
        harness::reject_unknown_keys(cfg, {"coherent", "squeezed", "ensemble"}, "fig2");
        if (cfg.contains("coherent")) coh = params_from_json(cfg.at("coherent"));
        if (cfg.contains("squeezed")) sq = params_from_json(cfg.at("squeezed"));
        if (cfg.contains("ensemble")) spec = harness::ensemble_from_json(cfg.at("ensemble"));
    }
    apply_seed(spec.sim, g);
    const auto r = harness::reproduce_fig2(coh, sq, spec, g.threads);
    const auto j = harness::to_json(r);
    emit(g, "fig2_annotations", &j, nullptr);
    const auto cc = spectrum_csv(r.coherent);
    const auto cs = spectrum_csv(r.squeezed);
    if (g.want_csv()) {
        io::write_file_atomic(g.path("fig2_coherent.csv"), cc);
        io::write_file_atomic(g.path("fig2_squeezed.csv"), cs);
    }
    if (g.want_json()) {
        io::write_file_atomic(g.path("fig2_coherent.json"), to_json(r.coherent).dump(2) + "\n");
        io::write_file_atomic(g.path("fig2_squeezed.json"), to_json(r.squeezed).dump(2) + "\n");
    }
    std::cerr << "fig2: wing ratio " << r.wing_ratio << " (expect " << r.wing_ratio_expected
              << "), peak area ratio " << r.peak_area_ratio << " (expect "
              << r.peak_area_ratio_expected << ")\n";
}

inline void cmd_fig3(const GlobalOpts& g) {
    ExperimentParams p = default_params();
    p.tech_noise_k = 5e12; // technical force comparable to the quantum one at gamma ~ 80 Hz
    std::vector<double> grid = {40.0, 56.6, 80.0, 113.1, 160.0, 226.3};
    harness::EnsembleSpec spec = default_ensemble();
    bool dry_run = false;
    if (!g.config.empty()) {
        const auto cfg = load_config(g);
        harness::reject_unknown_keys(cfg, {"params", "gamma_grid_Hz", "ensemble", "dry_run"},
                                     "fig3");
        if (cfg.contains("params")) p = params_from_json(cfg.at("params"));
        if (cfg.contains("gamma_grid_Hz")) grid = cfg.at("gamma_grid_Hz").get<std::vector<double>>();
        if (cfg.contains("ensemble")) spec = harness::ensemble_from_json(cfg.at("ensemble"));
        if (cfg.contains("dry_run")) dry_run = cfg.at("dry_run").get<bool>();
    }
    apply_seed(spec.sim, g);
    const auto r = harness::reproduce_fig3(p, grid, spec, g.threads, dry_run);
    const auto j = harness::to_json(r);
    const auto c = harness::gamma_scan_csv(r, params_hash_hex(p));
    emit(g, "fig3", &j, &c);
    std::cerr << "fig3: bana exponent vs gamma = " << r.bana_fit.exponent << " +- "
              << r.bana_fit.exponent_se << "\n";
}

inline void cmd_fig4(const GlobalOpts& g) {
    ExperimentParams p = default_params();
    std::vector<double> jx_grid = {0.5e10, 0.75e10, 1.0e10, 1.5e10};
    std::pair<double, double> gamma_pair = {132.0, 242.5};
    harness::EnsembleSpec spec = default_ensemble();
    spec.fit_halfwidth_gammas = 5.0; // tight window: in-band at the wider gamma,
                                     // and the mirror-resonance tail stays negligible
    bool dry_run = false;
    if (!g.config.empty()) {
        const auto cfg = load_config(g);
        harness::reject_unknown_keys(cfg, {"params", "jx_grid", "gamma_pair_Hz", "ensemble", "dry_run"},
                                     "fig4");
        if (cfg.contains("params")) p = params_from_json(cfg.at("params"));
        if (cfg.contains("jx_grid")) jx_grid = cfg.at("jx_grid").get<std::vector<double>>();
        if (cfg.contains("gamma_pair_Hz")) {
            auto v = cfg.at("gamma_pair_Hz").get<std::vector<double>>();
            if (v.size() != 2) throw Error(Errc::bad_config, "gamma_pair_Hz needs two entries");
            gamma_pair = {v[0], v[1]};
        }
        if (cfg.contains("ensemble")) spec = harness::ensemble_from_json(cfg.at("ensemble"));
        if (cfg.contains("dry_run")) dry_run = cfg.at("dry_run").get<bool>();
    }
    apply_seed(spec.sim, g);
    const auto r = harness::reproduce_fig4(p, jx_grid, gamma_pair, spec, g.threads, dry_run);
    const auto j = harness::to_json(r);
    const auto c = harness::spin_scan_csv(r, params_hash_hex(p));
    emit(g, "fig4", &j, &c);
    std::cerr << "fig4: joint slope " << r.joint_fit.slope << " +- " << r.joint_fit.slope_se
              << ", reduced chi2 " << r.joint_fit.reduced_chi2() << "\n";
}

/// Entry point shared by the binary and the in-process tests.
inline int run(int argc, const char* const* argv) {
    CLI::App app{"spinmem: collective-spin noise simulator and spectral analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out_dir, "output directory (default: .)");
    app.add_option("--format", g.format, "csv, json or both (default: both)")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "override the config RNG seed");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware, result-invariant)");

    double fmin = std::nan(""), fmax = std::nan("");
    std::size_t npts = 2001;
    auto* sc_spectrum = app.add_subcommand("spectrum", "closed-form output spectrum on a grid");
    sc_spectrum->add_option("--fmin", fmin, "grid start, Hz");
    sc_spectrum->add_option("--fmax", fmax, "grid end, Hz");
    sc_spectrum->add_option("--points", npts, "grid points (default 2001)");

    auto* sc_simulate = app.add_subcommand("simulate", "run a seeded ensemble, emit PSD and trajectories");

    std::string in_path;
    double fit_fmin = std::nan(""), fit_fmax = std::nan("");
    auto* sc_fit = app.add_subcommand("fit", "fit floor + Lorentzian to a spectrum file");
    sc_fit->add_option("--in", in_path, "spectrum JSON produced by spectrum/simulate");
    sc_fit->add_option("--fmin", fit_fmin, "fit window start, Hz");
    sc_fit->add_option("--fmax", fit_fmax, "fit window end, Hz");

    std::string coh_path, sq_path;
    double eps_z = 0.0, eps_z_se = 0.0, snl = 0.0, gamma_Hz = 0.0;
    auto* sc_dec = app.add_subcommand("decompose", "split coherent/squeezed areas into BANA and RSN");
    sc_dec->add_option("--coh", coh_path, "coherent-probe fit JSON");
    sc_dec->add_option("--sq", sq_path, "squeezed-probe fit JSON");
    sc_dec->add_option("--eps-z", eps_z, "anti-squeezing factor of the squeezed run")->required();
    sc_dec->add_option("--eps-z-se", eps_z_se, "standard error of eps-z");
    sc_dec->add_option("--snl", snl, "shot noise level S_x/2 (enables PNA inference)");
    sc_dec->add_option("--gamma", gamma_Hz, "resonance HWHM in Hz (enables PNA inference)");

    auto* sc_sweep = app.add_subcommand("sweep", "scaling sweep from a plan file");
    auto* sc_fig2 = app.add_subcommand("fig2", "squeezed vs coherent spectrum pair");
    auto* sc_fig3 = app.add_subcommand("fig3", "areas versus decay rate");
    auto* sc_fig4 = app.add_subcommand("fig4", "inferred projection area versus spin size");

    try {
        app.parse(argc, argv);
        if (*seed_opt) g.seed = seed_flag;
        if (*sc_spectrum) cmd_spectrum(g, fmin, fmax, npts);
        else if (*sc_simulate) cmd_simulate(g);
        else if (*sc_fit) cmd_fit(g, in_path, fit_fmin, fit_fmax);
        else if (*sc_dec) cmd_decompose(g, coh_path, sq_path, eps_z, eps_z_se, snl, gamma_Hz);
        else if (*sc_sweep) cmd_sweep(g);
        else if (*sc_fig2) cmd_fig2(g);
        else if (*sc_fig3) cmd_fig3(g);
        else if (*sc_fig4) cmd_fig4(g);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.code()) ? 1 : 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad input file: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace spinmem::cli
