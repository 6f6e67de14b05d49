#include <catch2/catch.hpp>

#include <cmath>

#include "spinmem/analytic.hpp"
#include "spinmem/noise_areas.hpp"

using namespace spinmem;
using namespace spinmem::spectral;

TEST_CASE("textbook split", "[areas]") {
    const auto n = decompose({2.0, 0.0}, {8.0, 0.0}, 7.0);
    CHECK(n.bana.value == Approx(1.0));
    CHECK(n.rsn.value == Approx(1.0));
    CHECK(n.a_total.value == Approx(2.0));
}

TEST_CASE("pure back-action limit", "[areas]") {
    const double a_coh = 3.0, ez = 5.0;
    const auto n = decompose({a_coh, 0.0}, {ez * a_coh, 0.0}, ez);
    CHECK(n.rsn.value == Approx(0.0).margin(1e-14));
    CHECK(n.bana.value == Approx(a_coh));
}

TEST_CASE("reconstruction identity holds exactly", "[areas]") {
    std::uint64_t state = 5;
    auto next = [&] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    for (int k = 0; k < 500; ++k) {
        const double a_coh = std::pow(10.0, 10.0 + 8.0 * next());
        const double a_sq = a_coh * (1.0 + 12.0 * next());
        const double ez = 1.1 + 9.0 * next();
        const auto n = decompose({a_coh, 0.01 * a_coh}, {a_sq, 0.01 * a_sq}, ez);
        REQUIRE(n.bana.value + n.rsn.value == Approx(a_coh).epsilon(1e-12));
    }
}

TEST_CASE("estimator rejects eps_z too close to one", "[areas]") {
    CHECK_THROWS_AS(decompose({2.0, 0.0}, {2.2, 0.0}, 1.05), Error);
    try {
        decompose({2.0, 0.0}, {2.2, 0.0}, 1.05);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::eps_too_close_to_one);
    }
    CHECK_NOTHROW(decompose({2.0, 0.0}, {2.2, 0.0}, 1.1));
}

TEST_CASE("error propagation", "[areas]") {
    const double se_coh = 0.05, se_sq = 0.12, ez = 7.0;
    const auto n = decompose({2.0, se_coh}, {8.0, se_sq}, ez);
    CHECK(n.bana.se == Approx(std::hypot(se_sq, se_coh) / (ez - 1.0)).epsilon(1e-12));
    CHECK(n.rsn.se == Approx(std::hypot(ez * se_coh, se_sq) / (ez - 1.0)).epsilon(1e-12));
    CHECK(n.a_total.se == se_coh);

    // a known eps_z uncertainty widens both
    const auto m = decompose({2.0, se_coh}, {8.0, se_sq}, ez, 0.5);
    CHECK(m.bana.se > n.bana.se);
    CHECK(m.rsn.se > n.rsn.se);
}

TEST_CASE("measured-area inference agrees with the closed forms", "[areas]") {
    ExperimentParams p = default_params();
    p.eps_z = 1.0;
    NoiseAreas n;
    n.bana = {analytic::bana_closed_form(p), 0.0};
    const auto pna = infer_pna_from_measurement(n, {p.flux_Sx / 2.0, 0.0}, p.gamma_Hz);
    CHECK(pna.value == Approx(analytic::pna_closed_form(p)).epsilon(1e-13));
    CHECK(pna.se == 0.0);
}

TEST_CASE("inference scaling and error propagation", "[areas]") {
    NoiseAreas n;
    n.bana = {4.0e14, 0.4e14}; // 10% in, 5% out through the square root
    const auto one = infer_pna_from_measurement(n, {5.0e11, 0.0}, 80.0);
    CHECK(one.se == Approx(0.05 * one.value).epsilon(1e-9));

    NoiseAreas n4;
    n4.bana = {4.0 * 4.0e14, 0.0};
    const auto two = infer_pna_from_measurement(n4, {5.0e11, 0.0}, 80.0);
    CHECK(two.value == Approx(2.0 * one.value).epsilon(1e-12));

    NoiseAreas bad;
    bad.bana = {-1.0, 0.0};
    CHECK_THROWS_AS(infer_pna_from_measurement(bad, {5.0e11, 0.0}, 80.0), Error);
}
