// Test-only numerical oracles, kept independent of the library code they
// check: adaptive Simpson quadrature in extended precision, plus a direct
// extended-precision evaluation of the output-spectrum formula.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

inline long double adaptive_simpson_rec(const std::function<long double(long double)>& f,
                                        long double a, long double b, long double fa,
                                        long double fm, long double fb, long double whole,
                                        long double tol, int depth) {
    const long double m = (a + b) / 2;
    const long double lm = (a + m) / 2, rm = (m + b) / 2;
    const long double flm = f(lm), frm = f(rm);
    const long double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const long double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const long double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15 * tol)
        return left + right + delta / 15;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f, long double a,
                             long double b, long double rel_tol) {
    const long double m = (a + b) / 2;
    const long double fa = f(a), fm = f(m), fb = f(b);
    const long double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    const long double tol = std::fabs(whole) * rel_tol + 1e-300L;
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 36);
}

/// Extended-precision direct substitution into the output-spectrum formula:
/// floor + (a^2 S^2/4) * {a^2 J^2 eps_z S/2 + 2*G_ang*J + 2*k} / ((W-w)^2 + G^2)
/// with the resonance denominator in angular units.
struct PhiParams {
    long double a, sx, jx, larmor_Hz, gamma_Hz, ey, ez, ktech;
};

inline long double phi_reference(const PhiParams& p, long double f_Hz) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    const long double ga = 2 * pi_l * p.gamma_Hz;
    const long double wa = 2 * pi_l * p.larmor_Hz;
    const long double w = 2 * pi_l * f_Hz;
    const long double bracket =
        p.a * p.a * p.jx * p.jx * p.ez * p.sx / 2 + 2 * ga * p.jx + 2 * p.ktech;
    return p.ey * p.sx / 2 +
           0.25L * p.a * p.a * p.sx * p.sx * bracket / ((wa - w) * (wa - w) + ga * ga);
}

/// Individual atomic terms of the reference formula (same conventions as
/// phi_reference). Evaluated directly so a subdominant term never has to be
/// recovered from a difference of near-equal totals.
inline long double phi_term_backaction(const PhiParams& p, long double f_Hz) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    const long double ga = 2 * pi_l * p.gamma_Hz;
    const long double wa = 2 * pi_l * p.larmor_Hz;
    const long double w = 2 * pi_l * f_Hz;
    return 0.25L * p.a * p.a * p.sx * p.sx * (p.a * p.a * p.jx * p.jx * p.ez * p.sx / 2) /
           ((wa - w) * (wa - w) + ga * ga);
}

inline long double phi_term_projection(const PhiParams& p, long double f_Hz) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    const long double ga = 2 * pi_l * p.gamma_Hz;
    const long double wa = 2 * pi_l * p.larmor_Hz;
    const long double w = 2 * pi_l * f_Hz;
    return 0.25L * p.a * p.a * p.sx * p.sx * (2 * ga * p.jx) /
           ((wa - w) * (wa - w) + ga * ga);
}

inline long double phi_term_technical(const PhiParams& p, long double f_Hz) {
    const long double pi_l = 3.14159265358979323846264338327950288L;
    const long double ga = 2 * pi_l * p.gamma_Hz;
    const long double wa = 2 * pi_l * p.larmor_Hz;
    const long double w = 2 * pi_l * f_Hz;
    return 0.25L * p.a * p.a * p.sx * p.sx * (2 * p.ktech) /
           ((wa - w) * (wa - w) + ga * ga);
}

/// Output density of the full precessing pair (no narrow-band step): solves
/// the 2x2 response exactly, so it carries the wing asymmetry and the mirror
/// resonance that the narrow-band formula drops. Used to validate the
/// lab-frame engine.
inline double phi_full_dynamics(const PhiParams& p, double f_Hz) {
    const double pi_d = 3.14159265358979323846;
    const double ga = 2 * pi_d * static_cast<double>(p.gamma_Hz);
    const double wa = 2 * pi_d * static_cast<double>(p.larmor_Hz);
    const double w = 2 * pi_d * f_Hz;
    const double a = static_cast<double>(p.a), sx = static_cast<double>(p.sx),
                 jx = static_cast<double>(p.jx);
    const double k = ga * jx + static_cast<double>(p.ktech); // per channel
    const double q = a * a * jx * jx * static_cast<double>(p.ez) * sx / 2.0;
    const double d0 = wa * wa + ga * ga - w * w;
    const double den = d0 * d0 + 4.0 * w * w * ga * ga;
    const double num = (w * w + ga * ga) * k + wa * wa * (k + q);
    return static_cast<double>(p.ey) * sx / 2.0 + a * a * sx * sx * num / den;
}

} // namespace oracle
