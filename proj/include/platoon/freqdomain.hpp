/*
 * Copyright (C) 2026 the platoon-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy of
 * the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations under
 * the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "platoon/detail/poly.hpp"
#include "platoon/errors.hpp"
#include "platoon/model.hpp"
#include "platoon/topology.hpp"

namespace platoon {

// Propagation transfer function between consecutive spacing errors,
// H(s) = q1(s) T4(s) / (T1(s) T3(s) + T2(s) T4(s)),
// plus every polynomial block needed for its analysis. Coefficients are
// stored ascending in s.
struct TransferPolys {
    detail::Poly t1;   // 2k1 + 2k2 s + (1 + 2k3 + r*ab) s^2 + tau s^3
    detail::Poly t2;   // k1 + k2 s + (k3 + r*ab) s^2
    detail::Poly t3;   // s^2 + tau s^3
    detail::Poly t4;   // k1 + k2 s + k3 s^2
    detail::Poly t5;   // k1 + (k2 - h k1) s + (k3 - h k2) s^2 - h k3 s^3
    detail::Poly q1;   // k1 + (k2 - k1 h) s + (ab + k3) s^2
    detail::Poly num;  // q1 * t4
    detail::Poly den;  // t1*t3 + t2*t4
    double ql_coeff = 0.0;  // s^2 coefficient of q_l for l >= 2 (= alpha/tau)

    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    double alpha = 0.0, alpha_bar = 0.0;
    double h = 0.0, tau = 0.0;
    int r = 0;
};

inline TransferPolys build_polys(const Gains& g, int r, double h, double tau) {
    if (r < 1) throw InvalidParameter("build_polys: r must be >= 1");
    if (!std::isfinite(h) || h < 0.0)
        throw InvalidParameter("build_polys: h must be non-negative");
    if (!std::isfinite(tau) || tau <= 0.0)
        throw InvalidParameter("build_polys: tau must be positive");

    const double k1 = g.k1, k2 = g.k2, k3 = g.k3;
    const double ab = g.alpha_bar;
    TransferPolys tp;
    tp.t1 = {2.0 * k1, 2.0 * k2, 1.0 + 2.0 * k3 + r * ab, tau};
    tp.t2 = {k1, k2, k3 + r * ab};
    tp.t3 = {0.0, 0.0, 1.0, tau};
    tp.t4 = {k1, k2, k3};
    tp.t5 = {k1, k2 - h * k1, k3 - h * k2, -h * k3};
    tp.q1 = {k1, k2 - k1 * h, ab + k3};
    tp.num = detail::pmul(tp.q1, tp.t4);
    tp.den = detail::padd(detail::pmul(tp.t1, tp.t3), detail::pmul(tp.t2, tp.t4));
    tp.ql_coeff = ab;
    tp.k1 = k1;
    tp.k2 = k2;
    tp.k3 = k3;
    tp.alpha = g.alpha;
    tp.alpha_bar = ab;
    tp.h = h;
    tp.tau = tau;
    tp.r = r;
    return tp;
}

inline double h_magnitude(const TransferPolys& tp, double omega) {
    if (!(omega >= 0.0))
        throw InvalidParameter("h_magnitude: omega must be non-negative");
    const std::complex<double> s{0.0, omega};
    const double dm = std::abs(detail::peval(tp.den, s));
    if (dm < 1e-300)
        throw PoleProximityError("h_magnitude: evaluation too close to a pole");
    return std::abs(detail::peval(tp.num, s)) / dm;
}

struct GridSpec {
    double omega_min = 1e-3;
    double omega_max = 1e3;
    int points_per_decade = 400;

    void validate() const {
        if (!std::isfinite(omega_min) || omega_min <= 0.0)
            throw InvalidParameter("GridSpec: omega_min must be positive");
        if (!std::isfinite(omega_max) || omega_max <= omega_min)
            throw InvalidParameter("GridSpec: omega_max must exceed omega_min");
        if (points_per_decade < 1)
            throw InvalidParameter("GridSpec: points_per_decade must be >= 1");
    }
};

struct FrequencyResponse {
    std::vector<double> omega;
    std::vector<double> magnitude;
    double hinf = 0.0;
    double argmax_omega = 0.0;
};

namespace detail {

// Golden-section maximization of |H| on [a, b]; shrinks the bracket to a
// 1e-10 relative width. Returns the best magnitude and its frequency.
inline std::pair<double, double> refine_peak(const TransferPolys& tp, double a,
                                             double b) {
    constexpr double invphi = 0.6180339887498949;
    double c = b - (b - a) * invphi;
    double d = a + (b - a) * invphi;
    double fc = h_magnitude(tp, c);
    double fd = h_magnitude(tp, d);
    while (b - a > 1e-10 * b) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = h_magnitude(tp, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = h_magnitude(tp, d);
        }
    }
    return fc > fd ? std::pair{fc, c} : std::pair{fd, d};
}

}  // namespace detail

// Dense log-spaced sweep plus golden-section refinement around the top three
// local maxima (grid edges included). The DC value |H(j0)| = 1 participates
// in the supremum so the reported norm can never dip below the exact
// zero-frequency gain.
inline FrequencyResponse hinf_norm(const TransferPolys& tp, const GridSpec& spec) {
    spec.validate();
    if (spec.omega_min > 1e-3 || spec.omega_max < 1e3)
        throw InvalidParameter("hinf_norm: grid must cover [1e-3, 1e3] rad/s");

    const double lmin = std::log10(spec.omega_min);
    const double lmax = std::log10(spec.omega_max);
    const int m = static_cast<int>(std::ceil((lmax - lmin) * spec.points_per_decade));

    FrequencyResponse fr;
    fr.omega.resize(static_cast<std::size_t>(m) + 1);
    fr.magnitude.resize(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) {
        double w;
        if (i == 0)
            w = spec.omega_min;
        else if (i == m)
            w = spec.omega_max;
        else
            w = std::pow(10.0, lmin + (lmax - lmin) * i / m);
        fr.omega[static_cast<std::size_t>(i)] = w;
        fr.magnitude[static_cast<std::size_t>(i)] = h_magnitude(tp, w);
    }

    std::vector<int> maxima;
    for (int i = 0; i <= m; ++i) {
        const double cur = fr.magnitude[static_cast<std::size_t>(i)];
        const bool left_ok = i == 0 || cur >= fr.magnitude[static_cast<std::size_t>(i) - 1];
        const bool right_ok = i == m || cur >= fr.magnitude[static_cast<std::size_t>(i) + 1];
        if (left_ok && right_ok) maxima.push_back(i);
    }
    std::sort(maxima.begin(), maxima.end(), [&](int a, int b) {
        return fr.magnitude[static_cast<std::size_t>(a)] >
               fr.magnitude[static_cast<std::size_t>(b)];
    });
    if (maxima.size() > 3) maxima.resize(3);

    // DC gain is part of the certified band
    double best = h_magnitude(tp, 0.0);
    double best_w = 0.0;
    for (int i = 0; i <= m; ++i) {
        if (fr.magnitude[static_cast<std::size_t>(i)] > best) {
            best = fr.magnitude[static_cast<std::size_t>(i)];
            best_w = fr.omega[static_cast<std::size_t>(i)];
        }
    }
    for (int idx : maxima) {
        const double lo = fr.omega[static_cast<std::size_t>(std::max(idx - 1, 0))];
        const double hi = fr.omega[static_cast<std::size_t>(std::min(idx + 1, m))];
        const auto [mag, w] = detail::refine_peak(tp, lo, hi);
        if (mag > best) {
            best = mag;
            best_w = w;
        }
    }
    fr.hinf = best;
    fr.argmax_omega = best_w;
    return fr;
}

// H rewritten as 1/(X+1) with X = X_num/X_den: the numerator polynomial is
// the part of D left over after splitting off N, and X_den = N. The sample
// fields give Re/Im of both at j*omega; Y >= 0 forces Re(X) >= 0 and thus
// |H| <= 1 at that frequency.
struct XDecomposition {
    detail::Poly x_num;
    detail::Poly x_den;
    double omega = 0.0;
    double re_num = 0.0, im_num = 0.0;
    double re_den = 0.0, im_den = 0.0;
    double y = 0.0;  // Re(X_num) Re(X_den) + Im(X_num) Im(X_den)
    double z = 0.0;  // |X_den|^2
};

inline XDecomposition x_decomposition(const TransferPolys& tp, double omega) {
    if (!(omega >= 0.0))
        throw InvalidParameter("x_decomposition: omega must be non-negative");

    XDecomposition xd;
    detail::Poly outer(7, 0.0);
    outer[4] = 1.0 + tp.r * tp.alpha_bar;
    outer[5] = tp.tau * (2.0 + tp.r * tp.alpha_bar);
    outer[6] = tp.tau * tp.tau;
    const detail::Poly inner{0.0, tp.k1 * tp.h, 2.0 + (tp.r - 1) * tp.alpha_bar,
                             2.0 * tp.tau};
    xd.x_num = detail::padd(outer, detail::pmul(inner, tp.t4));
    xd.x_den = tp.num;
    xd.omega = omega;

    const std::complex<double> s{0.0, omega};
    const auto nv = detail::peval(xd.x_num, s);
    const auto dv = detail::peval(xd.x_den, s);
    xd.re_num = nv.real();
    xd.im_num = nv.imag();
    xd.re_den = dv.real();
    xd.im_den = dv.imag();
    xd.z = xd.re_den * xd.re_den + xd.im_den * xd.im_den;
    if (xd.z == 0.0)
        throw SingularPointError("x_decomposition: X_den vanishes at this frequency");
    xd.y = xd.re_num * xd.re_den + xd.im_num * xd.im_den;
    return xd;
}

// Closed-form coefficients of Y(w) = W2 w^2 + W4 w^4 + ... + W10 w^10.
// omega0 = sqrt(W8 / -W10) marks where the W8 term stops dominating the
// always-negative W10 tail; only defined when W8 >= 0 > W10.
struct WCoefficients {
    double n1 = 0.0, n2 = 0.0, n3 = 0.0, n4 = 0.0, n5 = 0.0, n6 = 0.0;
    double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
    double w2 = 0.0, w4 = 0.0, w6 = 0.0, w8 = 0.0, w10 = 0.0;
    std::optional<double> omega0;
};

inline WCoefficients w_coefficients(const Gains& g, int r, double h, double tau) {
    if (r < 1) throw InvalidParameter("w_coefficients: r must be >= 1");
    if (!std::isfinite(h) || h < 0.0)
        throw InvalidParameter("w_coefficients: h must be non-negative");
    if (!std::isfinite(tau) || tau <= 0.0)
        throw InvalidParameter("w_coefficients: tau must be positive");

    const double k1 = g.k1, k2 = g.k2, k3 = g.k3;
    const double a = g.alpha;
    const double ab = g.alpha_bar;
    WCoefficients w;
    w.n1 = h * k1 * k1;
    w.n2 = -2.0 * k1 - h * k1 * k2 - ab * k1 * (r - 1);
    w.n3 = -2.0 * k1 * tau - 2.0 * k2 - h * k1 * k3 - ab * k2 * (r - 1);
    w.n4 = 2.0 * k2 * tau + 2.0 * k3 + 1.0 + ab * r + ab * k3 * (r - 1);
    w.n5 = 2.0 * tau + a * r + 2.0 * k3 * tau;
    w.n6 = -tau * tau;
    w.d0 = k1 * k1;
    w.d1 = k1 * (2.0 * k2 - h * k1);
    w.d2 = -k2 * k2 - 2.0 * k1 * k3 + h * k1 * k2 - ab * k1;
    w.d3 = -k3 * (2.0 * k2 - h * k1) - ab * k2;
    w.d4 = k3 * k3 + ab * k3;
    w.w2 = w.d0 * w.n2 + w.d1 * w.n1;
    w.w4 = w.d0 * w.n4 + w.d1 * w.n3 + w.d2 * w.n2 + w.d3 * w.n1;
    w.w6 = w.d0 * w.n6 + w.d1 * w.n5 + w.d2 * w.n4 + w.d3 * w.n3 + w.d4 * w.n2;
    w.w8 = w.d2 * w.n6 + w.d3 * w.n5 + w.d4 * w.n4;
    w.w10 = w.d4 * w.n6;
    if (w.w8 >= 0.0 && w.w10 < 0.0) w.omega0 = std::sqrt(w.w8 / -w.w10);
    return w;
}

struct WConditionReport {
    bool w2_ok = false;
    bool w4_ok = false;
    bool w6_ok = false;
    bool tail_ok = false;  // W8 + W10 w^2 >= 0 across [0, omega0_required]
    bool all_ok = false;
    double omega0_required = 0.0;
};

inline WConditionReport check_w_conditions(const WCoefficients& w,
                                           double omega0_required) {
    WConditionReport rep;
    rep.omega0_required = omega0_required;
    rep.w2_ok = w.w2 >= 0.0;
    rep.w4_ok = w.w4 >= 0.0;
    rep.w6_ok = w.w6 >= 0.0;
    const double w2sq = omega0_required * omega0_required;
    const double at_end = w.w8 + w.w10 * w2sq;
    const double tail_min = std::min(w.w8, at_end);
    const double slack = 1e-12 * (std::abs(w.w8) + std::abs(w.w10) * w2sq);
    rep.tail_ok = tail_min >= -slack;
    rep.all_ok = rep.w2_ok && rep.w4_ok && rep.w6_ok && rep.tail_ok;
    return rep;
}

// s^3 + a2 s^2 + a1 s + a0 is Hurwitz iff every coefficient is positive and
// a2 a1 > a0.
inline bool routh_stable_cubic(double a2, double a1, double a0) {
    return a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0;
}

struct ConsensusCubicCheck {
    double l_ii = 0.0;
    double a2 = 0.0, a1 = 0.0, a0 = 0.0;
    bool stable = false;
};

struct InternalStabilityReport {
    bool stable = false;
    bool feedback_ok = false;  // state feedback loop alone
    std::vector<ConsensusCubicCheck> consensus_checks;
};

// Feedback loop: char poly of the closed single-vehicle loop is
// s^3 + ((1+k3)/tau) s^2 + (k2/tau) s + k1/tau (equal to (s+b)^3 under the
// pole-placement gain map). Consensus loops add l_ii * alpha/tau^2 to the
// s^2 coefficient, one cubic per distinct predecessor count.
inline InternalStabilityReport is_internally_stable(const Gains& g,
                                                    const Topology& topo,
                                                    double tau) {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw InvalidParameter("is_internally_stable: tau must be positive");
    InternalStabilityReport rep;
    const double a1 = g.k2 / tau;
    const double a0 = g.k1 / tau;
    const double a2_base = (1.0 + g.k3) / tau;
    rep.feedback_ok = routh_stable_cubic(a2_base, a1, a0);

    std::set<int> degrees(topo.predecessor_counts.begin(),
                          topo.predecessor_counts.end());
    rep.stable = rep.feedback_ok;
    for (int l : degrees) {
        ConsensusCubicCheck c;
        c.l_ii = static_cast<double>(l);
        c.a2 = a2_base + c.l_ii * g.alpha / (tau * tau);
        c.a1 = a1;
        c.a0 = a0;
        c.stable = routh_stable_cubic(c.a2, c.a1, c.a0);
        if (!c.stable) rep.stable = false;
        rep.consensus_checks.push_back(c);
    }
    return rep;
}

// Error propagation of the discarded variant in which each observer copies
// its predecessor's estimate directly. Kept as a negative control: its DC
// gain is exactly 2, so it can never be string stable.
inline double alt_h1_magnitude(const Gains& g, int r, double h, double tau,
                               double omega) {
    if (!(omega >= 0.0))
        throw InvalidParameter("alt_h1_magnitude: omega must be non-negative");
    const TransferPolys tp = build_polys(g, r, h, tau);
    const std::complex<double> s{0.0, omega};
    const double dm = std::abs(detail::peval(tp.den, s));
    if (dm < 1e-300)
        throw PoleProximityError("alt_h1_magnitude: evaluation too close to a pole");
    const std::complex<double> nv =
        g.alpha * omega * omega * detail::peval(tp.t4, s) +
        detail::peval(tp.t1, s) * detail::peval(tp.t5, s);
    return std::abs(nv) / dm;
}

inline void write_bode_csv(const FrequencyResponse& fr, std::ostream& os) {
    os << "omega,mag\n";
    char buf[96];
    for (std::size_t i = 0; i < fr.omega.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", fr.omega[i], fr.magnitude[i]);
        os << buf;
    }
}

}  // namespace platoon
