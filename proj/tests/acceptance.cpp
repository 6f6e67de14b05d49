// Acceptance suite: runs the project's verification criteria end to end and
// prints one pass/fail line per criterion. Exit code is the number of failed
// criteria. Select a single criterion with --criterion N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace {
std::string sci(double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.3g", v);
    return b;
}
} // namespace

#include "oracle_quadrature.hpp"
#include "spinmem/cli.hpp"
#include "spinmem/spinmem.hpp"

using namespace spinmem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED: " + what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

// deterministic parameter generator for the randomized criteria
struct ParamGen {
    std::uint64_t state;
    explicit ParamGen(std::uint64_t seed) : state(seed) {}
    double uniform() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    }
    double log_uniform(double lo, double hi) { return lo * std::pow(hi / lo, uniform()); }
    ExperimentParams params(bool with_tech) {
        ExperimentParams p;
        p.coupling_a = log_uniform(1e-12, 1e-6);
        p.flux_Sx = log_uniform(1e8, 1e16);
        p.spin_Jx = log_uniform(1e6, 1e14);
        p.larmor_Hz = log_uniform(500.0, 5e4);
        p.gamma_Hz = p.larmor_Hz * log_uniform(0.002, 0.05);
        p.eps_y = log_uniform(0.3, 10.0);
        p.eps_z = log_uniform(0.3, 10.0);
        p.tech_noise_k = with_tech && uniform() > 0.5 ? p.langevin_density() * uniform() : 0.0;
        return p;
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome out;
    ParamGen gen(101);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto p = gen.params(true);
        const double f = p.larmor_Hz + (2.0 * gen.uniform() - 1.0) * 20.0 * p.gamma_Hz;
        const oracle::PhiParams o{p.coupling_a, p.flux_Sx, p.spin_Jx, p.larmor_Hz,
                                  p.gamma_Hz,   p.eps_y,   p.eps_z,   p.tech_noise_k};
        worst = std::max(worst, rel(analytic::spectrum_phi(p, f),
                                    static_cast<double>(oracle::phi_reference(o, f))));
    }
    out.require(worst <= 1e-12, "worst relative deviation " + sci(worst));
    out.note("1000 random points, worst rel dev " + sci(worst));
    return out;
}

Outcome criterion2() {
    Outcome out;
    ParamGen gen(202);
    double worst_total = 0.0, worst_ba = 0.0, worst_pn = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto p = gen.params(true);
        const double W = 1e4 * p.gamma_Hz;
        const double frac = analytic::lorentz_window_fraction(W, W, p.gamma_Hz);
        const oracle::PhiParams o{p.coupling_a, p.flux_Sx, p.spin_Jx, p.larmor_Hz,
                                  p.gamma_Hz,   p.eps_y,   p.eps_z,   p.tech_noise_k};

        auto integrate_panels = [&](const std::function<long double(long double)>& fn) {
            const double c = p.larmor_Hz, g = p.gamma_Hz;
            long double acc = 0.0;
            acc += oracle::integrate(fn, c - W, c - 20.0 * g, 1e-10L);
            acc += oracle::integrate(fn, c - 20.0 * g, c + 20.0 * g, 1e-11L);
            acc += oracle::integrate(fn, c + 20.0 * g, c + W, 1e-10L);
            return static_cast<double>(acc) / frac;
        };
        const double ba = integrate_panels(
            [&](long double f) { return oracle::phi_term_backaction(o, f); });
        const double pn = integrate_panels(
            [&](long double f) { return oracle::phi_term_projection(o, f); });
        const double tn = p.tech_noise_k > 0.0
                              ? integrate_panels([&](long double f) {
                                    return oracle::phi_term_technical(o, f);
                                })
                              : 0.0;
        worst_ba = std::max(worst_ba, rel(ba, analytic::bana_closed_form(p)));
        worst_pn = std::max(worst_pn, rel(pn, analytic::pna_closed_form(p)));
        worst_total = std::max(
            worst_total, rel(ba + pn + tn, analytic::bana_closed_form(p) +
                                               analytic::pna_closed_form(p) +
                                               analytic::tna_closed_form(p)));
    }
    out.require(worst_ba <= 1e-6, "back-action closure " + sci(worst_ba));
    out.require(worst_pn <= 1e-6, "projection closure " + sci(worst_pn));
    out.require(worst_total <= 1e-6, "total closure " + sci(worst_total));
    out.note("100 sets; worst rel dev ba " + sci(worst_ba) + ", pn " + sci(worst_pn));
    return out;
}

Outcome criterion3() {
    Outcome out;
    ParamGen gen(303);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto p = gen.params(false);
        p.eps_z = 1.0; // coherent probe
        const double inferred =
            analytic::infer_pna(analytic::bana_closed_form(p), p.flux_Sx / 2.0, p.gamma_Hz);
        worst = std::max(worst, rel(inferred, analytic::pna_closed_form(p)));
    }
    out.require(worst <= 1e-12, "identity deviation " + sci(worst));
    out.note("100 sets, worst rel dev " + sci(worst));
    return out;
}

harness::EnsembleSpec acceptance_ensemble(std::uint64_t seed, std::size_t realizations) {
    harness::EnsembleSpec e;
    e.sim.duration_s = 2.0;
    e.sim.dt_s = 1.0 / 32768.0;
    e.sim.frame = sde::Frame::rotating; // realizes the narrow-band model exactly
    e.sim.seed = seed;
    e.realizations = realizations;
    e.welch.segment_length = 16384;
    return e;
}

Outcome criterion4() {
    Outcome out;
    const auto p = default_params();
    const auto spec = acceptance_ensemble(40404, 400);
    const auto s = harness::measure_spectrum(p, spec, 0);

    std::size_t in_window = 0, within = 0;
    const double f_lo = p.larmor_Hz - 10.0 * p.gamma_Hz;
    const double f_hi = p.larmor_Hz + 10.0 * p.gamma_Hz;
    for (std::size_t b = 0; b < s.size(); ++b) {
        if (s.freq_Hz[b] < f_lo || s.freq_Hz[b] > f_hi) continue;
        ++in_window;
        if (std::abs(s.psd[b] - analytic::spectrum_phi(p, s.freq_Hz[b])) <= 3.0 * s.psd_se[b])
            ++within;
    }
    const double frac = static_cast<double>(within) / static_cast<double>(in_window);
    out.require(frac >= 0.95, "only " + std::to_string(100.0 * frac) + "% of bins within 3 SE");

    double wing = 0.0;
    std::size_t n_wing = 0;
    for (std::size_t b = 0; b < s.size(); ++b)
        if (s.freq_Hz[b] >= 12000.0 && s.freq_Hz[b] <= 16000.0) {
            wing += s.psd[b];
            ++n_wing;
        }
    wing /= static_cast<double>(n_wing);
    const double floor = p.eps_y * p.flux_Sx / 2.0;
    out.require(rel(wing, floor) <= 0.02,
                "wing floor off by " + std::to_string(100.0 * rel(wing, floor)) + "%");
    out.note(std::to_string(100.0 * frac) + "% of " + std::to_string(in_window) +
             " bins within 3 SE; wing floor dev " + std::to_string(100.0 * rel(wing, floor)) +
             "%");
    return out;
}

Outcome criterion5() {
    Outcome out;
    auto p = default_params();
    p.coupling_a = 0.0;
    p.tech_noise_k = 0.0;
    sde::SimConfig c;
    c.duration_s = 2.0;
    c.dt_s = 1.0 / 32768.0;
    c.frame = sde::Frame::rotating;
    c.seed = 50505;

    double acc = 0.0;
    std::size_t count = 0;
    for (std::uint32_t r = 0; r < 16; ++r) {
        const auto t = sde::simulate_realization(p, c, r);
        for (double v : t.jz) acc += v * v;
        count += t.size();
    }
    const double measured = acc / static_cast<double>(count);
    const double expect = p.spin_Jx / 2.0;
    out.require(rel(measured, expect) <= 0.05,
                "variance off by " + std::to_string(100.0 * rel(measured, expect)) + "%");
    out.note("time-averaged Jz^2 dev " + std::to_string(100.0 * rel(measured, expect)) + "%");
    return out;
}

Outcome criterion6() {
    Outcome out;
    auto make_plan = [&](harness::SweepAxis axis, std::vector<double> values, bool dry,
                         std::uint64_t seed) {
        harness::SweepPlan plan;
        plan.base = default_params();
        plan.axis = axis;
        plan.values = std::move(values);
        plan.dry_run = dry;
        plan.ensemble = acceptance_ensemble(seed, 200);
        return plan;
    };
    const std::vector<double> sx = {0.5e12, 0.707e12, 1.0e12, 1.414e12, 2.0e12};
    const std::vector<double> jx = {0.5e10, 0.707e10, 1.0e10, 1.414e10, 2.0e10};
    const std::vector<double> ga = {40.0, 56.6, 80.0, 113.1, 160.0};

    // analytic dry run first: exact exponents
    const auto d_sx = harness::run_sweep(make_plan(harness::SweepAxis::flux_Sx, sx, true, 1));
    const auto d_jx = harness::run_sweep(make_plan(harness::SweepAxis::spin_Jx, jx, true, 2));
    const auto d_ga = harness::run_sweep(make_plan(harness::SweepAxis::gamma_Hz, ga, true, 3));
    out.require(std::abs(d_sx.bana_fit.exponent - 3.0) < 1e-9, "dry-run flux exponent");
    out.require(std::abs(d_jx.bana_fit.exponent - 2.0) < 1e-9, "dry-run spin exponent");
    out.require(std::abs(d_ga.bana_fit.exponent + 1.0) < 1e-9, "dry-run gamma exponent");
    out.require(std::abs(d_ga.pna_fit.exponent) < 1e-9, "dry-run gamma exponent of PNA");

    const auto m_sx = harness::run_sweep(make_plan(harness::SweepAxis::flux_Sx, sx, false, 61), 0);
    out.require(std::abs(m_sx.bana_fit.exponent - 3.0) <= 0.2,
                "flux exponent " + std::to_string(m_sx.bana_fit.exponent));
    const auto m_jx = harness::run_sweep(make_plan(harness::SweepAxis::spin_Jx, jx, false, 62), 0);
    out.require(std::abs(m_jx.bana_fit.exponent - 2.0) <= 0.2,
                "spin exponent " + std::to_string(m_jx.bana_fit.exponent));
    const auto m_ga = harness::run_sweep(make_plan(harness::SweepAxis::gamma_Hz, ga, false, 63), 0);
    out.require(std::abs(m_ga.bana_fit.exponent + 1.0) <= 0.2,
                "gamma exponent " + std::to_string(m_ga.bana_fit.exponent));

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "simulated exponents %.3f+-%.3f (flux), %.3f+-%.3f (spin), %.3f+-%.3f (gamma)",
                  m_sx.bana_fit.exponent, m_sx.bana_fit.exponent_se, m_jx.bana_fit.exponent,
                  m_jx.bana_fit.exponent_se, m_ga.bana_fit.exponent, m_ga.bana_fit.exponent_se);
    out.note(buf);
    return out;
}

Outcome criterion7() {
    Outcome out;
    const auto p = default_params(); // eps_z = 7, no technical noise
    const auto areas = harness::measure_pair(p, acceptance_ensemble(70707, 400), 0);

    ExperimentParams coh = p;
    coh.eps_z = 1.0;
    const double bana_true = analytic::bana_closed_form(coh);
    const double pna_true = analytic::pna_closed_form(coh);

    const double z_bana = std::abs(areas.bana.value - bana_true) / areas.bana.se;
    const double z_rsn = std::abs(areas.rsn.value - pna_true) / areas.rsn.se;
    out.require(z_bana <= 3.0, "BANA at " + std::to_string(z_bana) + " sigma");
    out.require(z_rsn <= 3.0, "RSN at " + std::to_string(z_rsn) + " sigma from PNA");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "BANA dev %.2f sigma (rel %.3f%%), RSN-vs-PNA dev %.2f sigma",
                  z_bana, 100.0 * rel(areas.bana.value, bana_true), z_rsn);
    out.note(buf);
    return out;
}

Outcome criterion8() {
    Outcome out;
    const auto p = default_params();
    auto spec = acceptance_ensemble(11111, 200);
    spec.fit_halfwidth_gammas = 5.0;
    const std::vector<double> jx = {0.5e10, 0.75e10, 1.0e10, 1.5e10};
    const auto r = harness::reproduce_fig4(p, jx, {132.0, 242.5}, spec, 0);
    for (const auto& pt : r.points)
        out.require(pt.ok, "point jx=" + std::to_string(pt.spin_Jx) + " failed: " + pt.message);
    out.require(r.joint_fit.reduced_chi2() < 2.0,
                "joint reduced chi2 " + std::to_string(r.joint_fit.reduced_chi2()));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "8 points, joint slope %.4g +- %.2g, reduced chi2 %.2f",
                  r.joint_fit.slope, r.joint_fit.slope_se, r.joint_fit.reduced_chi2());
    out.note(buf);
    return out;
}

Outcome criterion9() {
    Outcome out;
    ExperimentParams sq = default_params();
    ExperimentParams coh = sq;
    coh.eps_y = 1.0;
    coh.eps_z = 1.0;
    // finer step: the wing band [0.45, 0.9]*Nyquist then sits far above the
    // resonance, so its level is purely the shot floor
    auto spec = acceptance_ensemble(90909, 200);
    spec.sim.dt_s = 1.0 / 131072.0;
    spec.welch.segment_length = 32768;
    const auto r = harness::reproduce_fig2(coh, sq, spec, 0);

    const double z_wing = std::abs(r.wing_ratio - r.wing_ratio_expected) / r.wing_ratio_se;
    const double z_area =
        std::abs(r.peak_area_ratio - r.peak_area_ratio_expected) / r.peak_area_ratio_se;
    out.require(z_wing <= 3.0, "wing ratio at " + std::to_string(z_wing) + " sigma");
    out.require(z_area <= 3.0, "peak area ratio at " + std::to_string(z_area) + " sigma");
    char buf[176];
    std::snprintf(
        buf, sizeof(buf),
        "wing ratio %.4f (expect %.1f, %.2f sigma), area ratio %.3f (expect %.3f, %.2f sigma)",
        r.wing_ratio, r.wing_ratio_expected, z_wing, r.peak_area_ratio, r.peak_area_ratio_expected,
        z_area);
    out.note(buf);
    return out;
}

int run_cli_vec(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("spinmem");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp_bin(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion10() {
    Outcome out;
    const fs::path root = fs::temp_directory_path() / "spinmem_acceptance_c10";
    fs::remove_all(root);
    fs::create_directories(root);

    auto write = [&](const fs::path& p, const std::string& content) {
        std::ofstream o(p);
        o << content;
    };

    const auto params_j = to_json(default_params());
    nlohmann::json small_ens{
        {"sim",
         {{"duration_s", 0.5}, {"dt_s", 1.0 / 32768.0}, {"seed", 321}, {"frame", "rotating"}}},
        {"realizations", 6},
        {"welch", {{"segment_length", 8192}}}};
    nlohmann::json sim_j{{"params", params_j}, {"ensemble", small_ens}};
    nlohmann::json sweep_j{{"params", params_j},
                           {"axis", "flux_Sx"},
                           {"values", {0.6e12, 0.85e12, 1.2e12, 1.7e12}},
                           {"ensemble", small_ens}};
    nlohmann::json fig2_j{{"squeezed", params_j}, {"ensemble", small_ens}};
    auto p3 = default_params();
    p3.tech_noise_k = 5e12;
    nlohmann::json fig3_j{{"params", to_json(p3)},
                          {"gamma_grid_Hz", {40.0, 56.6, 80.0, 160.0}},
                          {"ensemble", small_ens}};
    nlohmann::json fig4_j{{"params", params_j},
                          {"jx_grid", {0.5e10, 1.0e10}},
                          {"gamma_pair_Hz", {132.0, 242.5}},
                          {"ensemble", small_ens}};
    write(root / "params.json", params_j.dump());
    write(root / "sim.json", sim_j.dump());
    write(root / "sweep.json", sweep_j.dump());
    write(root / "fig2.json", fig2_j.dump());
    write(root / "fig3.json", fig3_j.dump());
    write(root / "fig4.json", fig4_j.dump());

    struct Job {
        std::string name;
        std::vector<std::string> args;
    };
    const std::vector<Job> jobs = {
        {"spectrum", {"spectrum", "--config", (root / "params.json").string()}},
        {"simulate", {"simulate", "--config", (root / "sim.json").string()}},
        {"sweep", {"sweep", "--config", (root / "sweep.json").string()}},
        {"fig2", {"fig2", "--config", (root / "fig2.json").string()}},
        {"fig3", {"fig3", "--config", (root / "fig3.json").string()}},
        {"fig4", {"fig4", "--config", (root / "fig4.json").string()}},
    };

    for (const auto& job : jobs) {
        const fs::path d1 = root / (job.name + "_t1");
        const fs::path d2 = root / (job.name + "_tN");
        const fs::path d3 = root / (job.name + "_rerun");
        for (const auto& d : {d1, d2, d3}) fs::create_directories(d);

        auto with = [&](const fs::path& out_dir, const char* threads) {
            auto args = job.args;
            args.insert(args.end(), {"--out", out_dir.string(), "--threads", threads});
            return run_cli_vec(args);
        };
        out.require(with(d1, "1") == 0, job.name + " run (1 thread) failed");
        out.require(with(d2, "3") == 0, job.name + " run (3 threads) failed");
        out.require(with(d3, "1") == 0, job.name + " rerun failed");

        for (const auto& entry : fs::directory_iterator(d1)) {
            const auto name = entry.path().filename();
            const auto a = slurp_bin(entry.path());
            out.require(fs::exists(d2 / name), job.name + "/" + name.string() + " missing (tN)");
            if (fs::exists(d2 / name))
                out.require(a == slurp_bin(d2 / name),
                            job.name + "/" + name.string() + " differs across thread counts");
            if (fs::exists(d3 / name))
                out.require(a == slurp_bin(d3 / name),
                            job.name + "/" + name.string() + " differs across reruns");
        }
    }

    // fit + decompose consume files, so determinism follows from input bytes;
    // exercised here to cover every subcommand end to end
    {
        const fs::path d1 = root / "fitdec_t1", d2 = root / "fitdec_tN";
        fs::create_directories(d1);
        fs::create_directories(d2);
        const auto psd = (root / "simulate_t1" / "psd.json").string();
        for (const auto& [dir, thr] : {std::pair{d1, "1"}, std::pair{d2, "3"}}) {
            out.require(run_cli_vec({"fit", "--in", psd, "--fmin", "1600", "--fmax", "3200",
                                     "--out", dir.string(), "--threads", thr}) == 0,
                        "fit failed");
            out.require(run_cli_vec({"decompose", "--coh", (dir / "fit.json").string(), "--sq",
                                     (dir / "fit.json").string(), "--eps-z", "7", "--out",
                                     dir.string(), "--threads", thr}) == 0,
                        "decompose failed");
        }
        out.require(slurp_bin(d1 / "fit.json") == slurp_bin(d2 / "fit.json"),
                    "fit output differs across thread counts");
        out.require(slurp_bin(d1 / "noise_areas.json") == slurp_bin(d2 / "noise_areas.json"),
                    "decompose output differs across thread counts");
    }

    if (out.pass) fs::remove_all(root);
    out.note("6 subcommands + fit/decompose, byte-compared across reruns and 1 vs 3 threads");
    return out;
}

struct Criterion {
    int id;
    const char* summary;
    double time_limit_s;
    std::function<Outcome()> fn;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);

    const std::vector<Criterion> criteria = {
        {1, "closed-form spectrum matches extended-precision substitution (1e-12)", 1.0, criterion1},
        {2, "area closed forms match tail-corrected quadrature (1e-6)", 10.0, criterion2},
        {3, "square-root inference identity at machine precision", 1.0, criterion3},
        {4, "Monte Carlo ensemble PSD matches the closed form (3 SE, wings 2%)", 300.0, criterion4},
        {5, "coherent-state variance J_x/2 within 5%", 60.0, criterion5},
        {6, "scaling exponents 3 / 2 / -1 within 0.2 (plus exact dry run)", 1800.0, criterion6},
        {7, "coherent/squeezed decomposition within 3 sigma of closed forms", 600.0, criterion7},
        {8, "inferred projection area collinear in spin size across two decay rates", 1800.0,
         criterion8},
        {9, "squeezed-vs-coherent morphology: wings x0.5, peak growth as predicted", 600.0,
         criterion9},
        {10, "byte-identical outputs across reruns and thread counts", 300.0, criterion10},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.time_limit_s) {
            out.pass = false;
            out.detail += "; exceeded time limit of " + std::to_string(c.time_limit_s) + " s";
        }
        std::printf("[%s] criterion %2d: %s (%s; %.1f s)\n", out.pass ? "PASS" : "FAIL", c.id,
                    c.summary, out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
