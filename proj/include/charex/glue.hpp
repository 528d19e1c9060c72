#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "charex/numerics.hpp"
#include "charex/radial.hpp"

namespace charex {

// ---------------------------------------------------------------------------
// Translation of the right-hand interval
// ---------------------------------------------------------------------------

struct TranslationChoice {
    double L;          // bridge length
    bool equal_slopes; // degenerate equal-slope case (bridge is a straight line)
};

/// Admissible bridge length for endpoint data (f1(b1), f1'(b1)) on the left
/// and (f2(a2), f2'(a2)) on the right; requires f1(b1) < f2(a2) and
/// f2'(a2) <= f1'(b1).
inline TranslationChoice translate_for_gluing(double f1b, double f1pb, double f2a, double f2pa) {
    const double gap = f2a - f1b;
    if (!(gap > 0.0))
        throw GlueHypothesisError("translate_for_gluing: condition (2) fails, need f1(b1) < f2(a2)");
    if (f2pa > f1pb)
        throw GlueHypothesisError(
            "translate_for_gluing: condition (2) fails, need f2'(a2) <= f1'(b1)");
    if (f1pb == f2pa) {
        if (f1pb == 0.0)
            throw UngluableError("translate_for_gluing: zero slopes with a positive gap");
        return {gap / f1pb, true};
    }
    if (f2pa > 0.0) return {gap / (0.5 * (f1pb + f2pa)), false};
    return {2.0 * gap / f1pb, false};
}

inline TranslationChoice translate_for_gluing(const RadialProfile& f1, const RadialProfile& f2) {
    return translate_for_gluing(f1.f[f1.size() - 1], f1.fp[f1.size() - 1], f2.f[0], f2.fp[0]);
}

// ---------------------------------------------------------------------------
// Bridge slope function zeta
// ---------------------------------------------------------------------------

/// Smooth non-increasing slope zeta(x) = s2 + (s1 - s2) S(1 - xhat)^gamma on
/// [x_start, x_start + L], interpolating the endpoint slopes with the exact
/// integral gap; gamma found by monotone root finding.
class BridgeZeta {
public:
    BridgeZeta(double s1, double s2, double gap, double L, double x_start)
        : s1_(s1), s2_(s2), len_(L), x0_(x_start) {
        if (!(L > 0.0)) throw ParameterError("BridgeZeta: bridge length must be positive");
        if (s1 == s2) {
            equal_ = true;
            gamma_ = 0.0;
            if (std::abs(s1 * L - gap) > 1e-10 * (std::abs(gap) + 1.0))
                throw ZetaConstructionError("BridgeZeta: equal slopes incompatible with the gap");
            return;
        }
        const double target = (gap - s2 * L) / ((s1 - s2) * L); // = int_0^1 S^gamma
        if (!(target > 0.0 && target < 1.0))
            throw ZetaConstructionError(
                "BridgeZeta: required integral outside the gamma-family range");
        auto integral = [](double gamma) {
            return panel_integrate(
                [gamma](double y) { return std::pow(smoothstep(y), gamma); }, 0.0, 1.0, 32, 12);
        };
        double lo = 1e-9, hi = 1.0;
        int guard = 0;
        while (integral(hi) > target) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 60)
                throw ZetaConstructionError("BridgeZeta: gamma bracket search failed");
        }
        if (integral(lo) < target)
            throw ZetaConstructionError("BridgeZeta: gamma bracket search failed");
        gamma_ = bisect([&](double gm) { return integral(gm) - target; }, lo, hi, 1e-13);
    }

    double operator()(double x) const {
        if (equal_) return s1_;
        const double y = 1.0 - (x - x0_) / len_;
        return s2_ + (s1_ - s2_) * std::pow(smoothstep(y), gamma_);
    }

    double deriv(double x) const {
        if (equal_) return 0.0;
        const double y = 1.0 - (x - x0_) / len_;
        const double s = smoothstep(y);
        if (s <= 0.0) return 0.0;
        return -(s1_ - s2_) * gamma_ * std::pow(s, gamma_ - 1.0) * smoothstep_d1(y) / len_;
    }

    double gamma() const { return gamma_; }
    bool equal_slopes() const { return equal_; }
    double x_start() const { return x0_; }
    double x_end() const { return x0_ + len_; }

private:
    double s1_, s2_, len_, x0_;
    double gamma_ = 0.0;
    bool equal_ = false;
};

// ---------------------------------------------------------------------------
// C^{1,1} joined profile and its mollification
// ---------------------------------------------------------------------------

namespace detail {

/// f1 on [a1, b1], the integrated bridge on [b1, a2], translated f2 on [a2, b2].
struct TildeProfile {
    const RadialProfile& f1;
    RadialProfile bridge; // dense table with (fhat, zeta, zeta')
    const RadialProfile& f2;
    double shift; // f2 evaluated at x - shift
    double b1, a2;

    double eval(double x, int order) const {
        if (x < b1) return f1.eval(x, order);
        if (x > a2) return f2.eval(x - shift, order);
        return bridge.eval(x, order);
    }
    double value(double x) const { return eval(x, 0); }
    double deriv(double x) const { return eval(x, 1); }
    double deriv2(double x) const { return eval(x, 2); }
    /// One-sided minimum of f'' across the C^{1,1} junctions.
    double deriv2_minside(double x) const {
        const double tiny = 1e-9 * (a2 - b1 + 1.0);
        return std::min(eval(x - tiny, 2), eval(x + tiny, 2));
    }
};

inline RadialProfile make_bridge_table(const BridgeZeta& zeta, double f_at_start, int n, double q,
                                       int nodes = 801) {
    Eigen::VectorXd s(nodes), f(nodes), fp(nodes), fpp(nodes);
    const double x0 = zeta.x_start(), x1 = zeta.x_end();
    double acc = f_at_start;
    for (int j = 0; j < nodes; ++j) {
        const double x = x0 + (x1 - x0) * j / (nodes - 1);
        if (j > 0) {
            const double xm = x0 + (x1 - x0) * (j - 1) / (nodes - 1);
            acc += gauss_integrate([&](double t) { return zeta(t); }, xm, x, 16);
        }
        s[j] = x;
        f[j] = acc;
        fp[j] = zeta(x);
        fpp[j] = zeta.deriv(x);
    }
    return {n, q, std::move(s), std::move(f), std::move(fp), std::move(fpp),
            std::vector<SegmentTag>(nodes, SegmentTag::Bridge)};
}

/// Fixed sub-panel boundaries taming the kernel's flat endpoint decay.
inline const std::vector<double>& kernel_panels() {
    static const std::vector<double> p{-0.7, 0.0, 0.7};
    return p;
}

/// Normalized C-infinity bump kernel on (-1, 1).
inline double mollifier_norm() {
    static const double c =
        1.0 / integrate_with_breaks([](double y) { return std::exp(-1.0 / (1.0 - y * y)); }, -1.0,
                                    1.0, kernel_panels(), 32);
    return c;
}
inline double mollifier(double y) {
    if (std::abs(y) >= 1.0) return 0.0;
    return mollifier_norm() * std::exp(-1.0 / (1.0 - y * y));
}
inline double mollifier_deriv(double y) {
    if (std::abs(y) >= 1.0) return 0.0;
    const double d = 1.0 - y * y;
    return mollifier(y) * (-2.0 * y / (d * d));
}

/// Cutoff-localized mollification f_eps = (1 - chi) ftilde + chi (rho_eps * ftilde).
struct Mollified {
    const TildeProfile& ft;
    double eps;
    double x0, x1, x2, x3; // chi ramp corners

    struct Jet {
        double f, fp, fpp;
    };

    Jet at(double x) const {
        const double chi = cinf_cutoff(x, x0, x1, x2, x3);
        const double ftv = ft.value(x), ftp = ft.deriv(x);
        if (chi == 0.0) return {ftv, ftp, ft.deriv2(x)};
        // sub-panel boundaries: kernel shape plus the C^{1,1} kinks
        std::vector<double> breaks = kernel_panels();
        for (double xc : {ft.b1, ft.a2}) {
            const double y = (x - xc) / eps;
            if (y > -1.0 && y < 1.0) breaks.push_back(y);
        }
        const double c0 = integrate_with_breaks(
            [&](double y) { return mollifier(y) * ft.value(x - eps * y); }, -1.0, 1.0, breaks, 32);
        const double c1 = integrate_with_breaks(
            [&](double y) { return mollifier(y) * ft.deriv(x - eps * y); }, -1.0, 1.0, breaks, 32);
        const double c2 = integrate_with_breaks(
            [&](double y) { return mollifier_deriv(y) * ft.deriv(x - eps * y); }, -1.0, 1.0,
            breaks, 32) / eps;
        const double chi1 = cinf_cutoff_d1(x, x0, x1, x2, x3);
        const double chi2 = cinf_cutoff_d2(x, x0, x1, x2, x3);
        const double ftpp = (chi == 1.0) ? 0.0 : ft.deriv2(x);
        Jet out;
        out.f = (1.0 - chi) * ftv + chi * c0;
        out.fp = (1.0 - chi) * ftp + chi * c1 + chi1 * (c0 - ftv);
        out.fpp = (1.0 - chi) * ftpp + chi * c2 + 2.0 * chi1 * (c1 - ftp) + chi2 * (c0 - ftv);
        return out;
    }
};

inline double omega_of(int n, double q, double f, double fp) {
    return (n - 1.0) / (2.0 * f) * (1.0 - fp * fp - q * q * std::pow(f, -2.0 * (n - 1.0)));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct JunctionReport {
    double L = 0.0;          // bridge length
    double gamma = 0.0;      // zeta exponent
    bool equal_slopes = false;
    double eps_moll = 0.0;   // accepted mollification scale
    double d = 0.0;          // Omega-deviation budget actually enforced
    double d_raw = 0.0;      // (1/3) of the discrete C^{1,1} margin infimum
    double min_margin = 0.0; // min DEC margin over the glued profile
    double offset = 0.0;     // translation applied to the right interval
    // populated by glue_to_rn
    double s_att = 0.0;      // attachment point on the RN profile
    double eps_att = 0.0;    // accepted attachment height offset
    double mu = 0.0;         // 2 (m_e - m_*) / f(b)
    double delta = 0.0;      // bend width
};

struct BendReport {
    double delta = 0.0;
    double k_delta = 0.0;
    double s0 = 0.0;
    bool trivial = false;
};

// ---------------------------------------------------------------------------
// glue_profiles
// ---------------------------------------------------------------------------

/// Glue f1 to (a translated copy of) f2 through a smooth bridge: C^{1,1} join
/// with slope zeta, then cutoff-localized mollification with eps halved until
/// sup |Omega[ftilde] - Omega[f_eps]| stays below the budget derived from
/// d = (1/3) inf (Omega[ftilde] - ftilde'') and the DEC margin clears
/// -sat_tol at every node (strictly positive for the default sat_tol = 0).
/// The outer halves of both inputs are preserved bit-exactly.  sat_tol > 0 is
/// meant for right-hand pieces that saturate the DEC up to integration drift
/// (the bent attachment slice of an exact exterior); it relaxes only the
/// margin floor, never the construction.
inline RadialProfile glue_profiles(const RadialProfile& f1, const RadialProfile& f2_raw, double q,
                                   JunctionReport* report = nullptr, double sat_tol = 0.0) {
    if (f1.n != f2_raw.n)
        throw DimensionError("glue_profiles: cross-section dimensions differ");
    const int n = f1.n;
    if (std::abs(q) > std::min(std::abs(f1.Q), std::abs(f2_raw.Q)) + 1e-15)
        throw GlueHypothesisError("glue_profiles: condition on Q (Q^2 <= min(Q1^2, Q2^2)) fails");
    if (!(dec_margin(f1).minCoeff() > -sat_tol))
        throw GlueHypothesisError(
            "glue_profiles: condition (1) fails (left profile not strictly DEC)");
    if (!(dec_margin(f2_raw).minCoeff() > -sat_tol))
        throw GlueHypothesisError(
            "glue_profiles: condition (1) fails (right profile not strictly DEC)");

    const double a1 = f1.a(), b1 = f1.b();
    const double f1b = f1.f[f1.size() - 1], f1pb = f1.fp[f1.size() - 1];
    const double f2a = f2_raw.f[0], f2pa = f2_raw.fp[0];
    const double fn1 = std::pow(f1b, n - 1);
    if (!(fn1 > std::abs(q)))
        throw GlueHypothesisError("glue_profiles: condition (3) fails (f1(b1)^{n-1} <= |Q|)");
    if (!(1.0 + q * q / (fn1 * fn1) - 2.0 * std::abs(q) / fn1 > f1pb * f1pb))
        throw GlueHypothesisError("glue_profiles: condition (4) fails (slope bound at b1)");
    // condition (2) is validated inside translate_for_gluing
    const TranslationChoice tc = translate_for_gluing(f1b, f1pb, f2a, f2pa);
    const double a2 = b1 + tc.L;
    const double shift = a2 - f2_raw.a();
    const double b2 = f2_raw.b() + shift;

    const BridgeZeta zeta(f1pb, f2pa, f2a - f1b, tc.L, b1);
    detail::TildeProfile ft{f1, detail::make_bridge_table(zeta, f1b, n, q), f2_raw, shift, b1, a2};

    const double mid1 = 0.5 * (a1 + b1), mid2 = 0.5 * (a2 + b2);
    const double x0 = mid1, x1 = 0.5 * (mid1 + b1);
    const double x2 = 0.5 * (a2 + mid2), x3 = mid2;

    // Output node set: left nodes, dense bridge interior, right nodes.
    std::vector<double> xs;
    std::vector<SegmentTag> tags;
    for (Eigen::Index i = 0; i < f1.size(); ++i) {
        xs.push_back(f1.s[i]);
        tags.push_back(f1.tags[i]);
    }
    const int nb = 401;
    for (int j = 1; j < nb; ++j) {
        xs.push_back(b1 + tc.L * j / nb);
        tags.push_back(SegmentTag::Bridge);
    }
    for (Eigen::Index i = 0; i < f2_raw.size(); ++i) {
        xs.push_back(f2_raw.s[i] + shift);
        tags.push_back(f2_raw.tags[i]);
    }
    const auto m = static_cast<Eigen::Index>(xs.size());
    const Eigen::Index idx_b1 = f1.size() - 1;
    const Eigen::Index idx_a2 = f1.size() + nb - 1;

    // Budget from the C^{1,1} profile (one-sided minima at the junctions).
    double inf_margin_tilde = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = xs[i];
        if (x < x0 || x > x3) continue;
        const double fpp = (i == idx_b1 || i == idx_a2) ? ft.deriv2_minside(x) : ft.deriv2(x);
        const double om = detail::omega_of(n, q, ft.value(x), ft.deriv(x));
        inf_margin_tilde = std::min(inf_margin_tilde, om - fpp);
    }
    const double d_raw = inf_margin_tilde / 3.0;
    const double d = std::max(d_raw, sat_tol);
    if (!(d > 0.0))
        throw GlueHypothesisError(
            "glue_profiles: C^{1,1} join has non-positive DEC margin (inf = " +
            std::to_string(inf_margin_tilde) + ")");

    // eps halving.
    double eps = 0.25 * std::min({x1 - x0, x3 - x2, tc.L, mid1 - a1, b2 - mid2});
    const double eps_floor = 1e-12 * (b2 - a1);
    Eigen::VectorXd fo(m), fpo(m), fppo(m);
    bool accepted = false;
    while (eps > eps_floor) {
        const detail::Mollified fm{ft, eps, x0, x1, x2, x3};
        double sup_diff = 0.0;
        bool positive = true;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double x = xs[i];
            if (x <= x0 || x >= x3) continue;
            const auto jet = fm.at(x);
            const double om_eps = detail::omega_of(n, q, jet.f, jet.fp);
            const double om_til = detail::omega_of(n, q, ft.value(x), ft.deriv(x));
            sup_diff = std::max(sup_diff, std::abs(om_til - om_eps));
            if (!(om_eps - jet.fpp > -sat_tol)) positive = false;
            fo[i] = jet.f;
            fpo[i] = jet.fp;
            fppo[i] = jet.fpp;
        }
        if (sup_diff < d && positive) {
            accepted = true;
            break;
        }
        eps *= 0.5;
    }
    if (!accepted)
        throw MollificationError("glue_profiles: eps search exhausted without a strict margin");

    // Untouched nodes copied bit-exactly from the sources.
    for (Eigen::Index i = 0; i < m; ++i) {
        const double x = xs[i];
        if (x > x0 && x < x3) continue;
        if (i <= idx_b1) {
            fo[i] = f1.f[i];
            fpo[i] = f1.fp[i];
            fppo[i] = f1.fpp[i];
        } else if (i >= idx_a2) {
            const Eigen::Index j2 = i - idx_a2;
            fo[i] = f2_raw.f[j2];
            fpo[i] = f2_raw.fp[j2];
            fppo[i] = f2_raw.fpp[j2];
        } else { // bridge node outside the work zone (cannot happen; be safe)
            fo[i] = ft.value(x);
            fpo[i] = ft.deriv(x);
            fppo[i] = ft.deriv2(x);
        }
    }

    Eigen::VectorXd sv = Eigen::Map<Eigen::VectorXd>(xs.data(), m);
    RadialProfile out{n, q, std::move(sv), std::move(fo), std::move(fpo), std::move(fppo),
                      std::move(tags)};
    const double final_min = dec_margin(out).minCoeff();
    if (!(final_min > -sat_tol))
        throw MollificationError("glue_profiles: assembled profile lost its DEC margin");
    if (report) {
        report->L = tc.L;
        report->gamma = zeta.gamma();
        report->equal_slopes = tc.equal_slopes;
        report->eps_moll = eps;
        report->d = d;
        report->d_raw = d_raw;
        report->min_margin = final_min;
        report->offset = shift;
    }
    return out;
}

// ---------------------------------------------------------------------------
// bend_profile
// ---------------------------------------------------------------------------

/// Strict-DEC bending: reparametrize by sigma(s) = int_{s0-delta}^s (1 +
/// e^{-(t-s0)^{-2}}) dt + K_delta on [s0 - delta, s0), leave the profile
/// untouched elsewhere.  Acceptance is certified through the exact
/// decomposition
///   margin[f o sigma](s) = margin[f](sigma(s)) + B(s),
///   B = -phi' f'(sigma) - (2 phi + phi^2) ((n-1) f'^2/(2f) + f'')(sigma),
/// with phi(s) = e^{-(s-s0)^{-2}}: delta is halved until the bend term B is
/// non-negative at every bent node and strictly positive at s0 - delta (where
/// it is largest), so the bend never lowers the input's margin.  Near s0 the
/// improvement vanishes faster than any power of s - s0 and falls below the
/// input's own integration drift, so a raw pointwise sign test is replaced by
/// this decomposition.  When alpha_floor is armed the floor and slope
/// conclusions are enforced as well.
inline RadialProfile bend_profile(const RadialProfile& pr, double s0, double alpha_floor = 0.0,
                                  BendReport* report = nullptr, double sat_tol = 1e-10) {
    if (!(s0 > pr.a() && s0 <= pr.b()))
        throw ParameterError("bend_profile: s0 outside the profile domain");
    const double f_s0 = pr.value(s0), fp_s0 = pr.deriv(s0), fpp_s0 = pr.deriv2(s0);
    if (!(fp_s0 > 0.0))
        throw BendPreconditionError("bend_profile: f'(s0) must be positive");
    {
        // precondition: DEC holds (up to drift) on the region being bent
        const Eigen::VectorXd margin = dec_margin(pr);
        bool strict = true;
        for (Eigen::Index i = 0; i < pr.size() && pr.s[i] <= s0; ++i) {
            if (!(margin[i] >= -sat_tol))
                throw BendPreconditionError("bend_profile: DEC fails below s0");
            if (margin[i] <= 0.0) strict = false;
        }
        if (strict) { // already strictly DEC: nothing to do
            if (report) *report = {0.0, 0.0, s0, true};
            return pr;
        }
    }

    auto bump = [&](double s) {
        const double z = s - s0;
        if (z == 0.0) return 0.0;
        return std::exp(-1.0 / (z * z));
    };
    auto bump_d = [&](double s) {
        const double z = s - s0;
        if (z == 0.0) return 0.0;
        return bump(s) * 2.0 / (z * z * z);
    };

    const bool floor_armed = alpha_floor > 0.0 && f_s0 > alpha_floor && fpp_s0 > 0.0;
    const int nbend = 257;
    double delta = 0.1 * (s0 - pr.a());
    const double delta_floor = 1e-12 * (pr.b() - pr.a());

    while (delta > delta_floor) {
        const double start = s0 - delta;
        const double tail_bump = gauss_integrate([&](double t) { return bump(t); }, start, s0, 32);
        const double k_delta = s0 - delta - tail_bump;
        if (start <= pr.a() || k_delta < pr.a()) {
            delta *= 0.5;
            continue;
        }
        Eigen::VectorXd sb(nbend), sig(nbend);
        Eigen::VectorXd fb(nbend), fpb(nbend), fppb(nbend);
        double acc = k_delta;
        bool ok = true;
        double max_bend = 0.0, bend_at_start = 0.0;
        for (int j = 0; j < nbend; ++j) {
            sb[j] = start + delta * j / nbend; // last node just below s0
            if (j > 0)
                acc +=
                    gauss_integrate([&](double t) { return 1.0 + bump(t); }, sb[j - 1], sb[j], 16);
            sig[j] = acc;
            const double phi = bump(sb[j]);
            const double phip = bump_d(sb[j]); // negative left of s0
            const double fv = pr.value(sig[j]);
            const double fpv = pr.deriv(sig[j]);
            const double fppv = pr.deriv2(sig[j]);
            fb[j] = fv;
            fpb[j] = (1.0 + phi) * fpv;
            fppb[j] = phip * fpv + (1.0 + phi) * (1.0 + phi) * fppv;
            const double bend_term =
                -phip * fpv -
                (2.0 * phi + phi * phi) * ((pr.n - 1.0) * fpv * fpv / (2.0 * fv) + fppv);
            if (bend_term < 0.0) ok = false;
            max_bend = std::max(max_bend, bend_term);
            if (j == 0) bend_at_start = bend_term;
        }
        // Require strictness where the bend is largest; if the bump underflows
        // everywhere (delta far below the representable-bend scale) the bend
        // is the identity at machine precision and is accepted as such.
        if (!(bend_at_start > 0.0) && max_bend > 0.0) ok = false;
        if (ok && floor_armed) {
            if (!(fb[0] > alpha_floor)) ok = false;
            if (!(fpb[0] < fp_s0)) ok = false;
        }
        if (ok) {
            std::vector<double> xs;
            std::vector<double> fv, fpv, fppv;
            std::vector<SegmentTag> tags;
            const double gap_tiny = 1e-12 * (pr.b() - pr.a());
            for (Eigen::Index i = 0; i < pr.size(); ++i) {
                if (pr.s[i] >= start - gap_tiny) break;
                xs.push_back(pr.s[i]);
                fv.push_back(pr.f[i]);
                fpv.push_back(pr.fp[i]);
                fppv.push_back(pr.fpp[i]);
                tags.push_back(pr.tags[i]);
            }
            for (int j = 0; j < nbend; ++j) {
                xs.push_back(sb[j]);
                fv.push_back(fb[j]);
                fpv.push_back(fpb[j]);
                fppv.push_back(fppb[j]);
                tags.push_back(SegmentTag::BentRN);
            }
            for (Eigen::Index i = 0; i < pr.size(); ++i) {
                if (pr.s[i] < s0) continue;
                xs.push_back(pr.s[i]);
                fv.push_back(pr.f[i]);
                fpv.push_back(pr.fp[i]);
                fppv.push_back(pr.fpp[i]);
                tags.push_back(pr.tags[i]);
            }
            const auto m = static_cast<Eigen::Index>(xs.size());
            if (report) *report = {delta, k_delta, s0, false};
            return {pr.n,
                    pr.Q,
                    Eigen::Map<Eigen::VectorXd>(xs.data(), m),
                    Eigen::Map<Eigen::VectorXd>(fv.data(), m),
                    Eigen::Map<Eigen::VectorXd>(fpv.data(), m),
                    Eigen::Map<Eigen::VectorXd>(fppv.data(), m),
                    std::move(tags)};
        }
        delta *= 0.5;
    }
    throw BendSearchError("bend_profile: delta search exhausted");
}

// ---------------------------------------------------------------------------
// glue_to_rn
// ---------------------------------------------------------------------------

/// Attach an exact Reissner-Nordstrom exterior of mass m_e to a strictly-DEC
/// neck: pick the attachment point on the RN profile, bend it there, bridge
/// with glue_profiles (saturation tolerance 1e-10 for the attachment slice),
/// and keep the untouched RN tail.
inline RadialProfile glue_to_rn(const RadialProfile& neck, double m_e, double q, double h_tail,
                                JunctionReport* report = nullptr) {
    if (neck.n != 2) throw DimensionError("glue_to_rn: requires n = 2");
    const double f_b = neck.f[neck.size() - 1];
    const double fp_b = neck.fp[neck.size() - 1];
    const double m_star = charged_hawking_mass(2, q, f_b, fp_b);
    if (!(m_e > m_star))
        throw MassTooSmallError("glue_to_rn: m_e = " + std::to_string(m_e) +
                                " does not exceed m_* = " + std::to_string(m_star));
    if (!(dec_margin(neck).minCoeff() > 0.0))
        throw GlueHypothesisError("glue_to_rn: neck is not strictly DEC");
    if (!(f_b > std::abs(q)))
        throw GlueHypothesisError("glue_to_rn: f(b) <= |Q|");
    if (!(fp_b > 0.0))
        throw GlueHypothesisError("glue_to_rn: f'(b) <= 0 (mean curvature not positive)");
    if (!(m_star > std::abs(q)))
        throw GlueHypothesisError("glue_to_rn: m_H^{CH}(Sigma_b) <= |Q|");

    const double mu = 2.0 * (m_e - m_star) / f_b;
    const RNParams params{m_e, q};
    const double s_len = 4.0 * std::max(f_b, params.r_plus) + 10.0 * m_e;
    const RadialProfile tail = rn_profile(params, s_len, h_tail);

    // Saturation band for the exterior: the exact profile has margin zero, so
    // the integrated data sits within its first-integral drift plus the
    // interpolation error in f'' at this step size; certify against that.
    double drift = 0.0;
    for (Eigen::Index i = 0; i < tail.size(); ++i)
        drift = std::max(drift,
                         std::abs(tail.fp[i] * tail.fp[i] - detail::rn_uprime2(params, tail.f[i])));
    const double h4 = h_tail * h_tail * h_tail * h_tail;
    const double sat_tol =
        std::max(1e-10, 4.0 * drift / params.r_plus +
                            40.0 * h4 * m_e / std::pow(params.r_plus, 4));

    double s_att = 0.0, eps_att = 0.0;
    if (f_b < params.r_plus) {
        // u' increases from 0: a small s0 keeps u' below f'(b).
        s_att = bisect([&](double s) { return tail.deriv(s) - 0.5 * fp_b; }, 0.0, s_len);
    } else {
        eps_att = 0.1 * f_b;
        const double floor = 1e-12 * f_b;
        bool found = false;
        while (eps_att > floor) {
            if (tail.f[tail.size() - 1] > f_b + eps_att) {
                const double s =
                    bisect([&](double x) { return tail.value(x) - (f_b + eps_att); }, 0.0, s_len);
                const double up = tail.deriv(s);
                // u'(s)^2 = f'(b)^2 - mu holds exactly at u = f(b) by the
                // Hawking-mass identity, so the halving terminates.
                if (up * up < fp_b * fp_b - 0.5 * mu) {
                    s_att = s;
                    found = true;
                    break;
                }
            }
            eps_att *= 0.5;
        }
        if (!found) throw UngluableError("glue_to_rn: attachment height search exhausted");
    }

    BendReport bend_rep;
    const RadialProfile bent = bend_profile(tail, s_att, f_b, &bend_rep, sat_tol);
    // If the integrated tail is already strictly DEC (drift-level margins all
    // positive) the bend is the identity; use a nominal slice width then.
    const double delta = bend_rep.trivial
                             ? std::min(0.1 * s_att, 0.9 * (s_att - bent.a()))
                             : bend_rep.delta;
    const double a2 = s_att - delta;
    if (!(a2 > bent.a())) throw UngluableError("glue_to_rn: attachment slice leaves the domain");
    // Right-hand piece: the outer half of the bend window only, so the outer
    // preserved half of the glue never touches the region near s_att; sampled
    // uniformly (the tail grid may be coarser than the bend window).
    const double piece_end = s_att - 0.5 * delta;
    const Eigen::Index mpiece = 129;
    std::vector<double> xs(mpiece);
    std::vector<double> fv(mpiece), fpv(mpiece), fppv(mpiece);
    for (Eigen::Index k = 0; k < mpiece; ++k) {
        const double x = a2 + (piece_end - a2) * k / (mpiece - 1);
        xs[k] = x;
        fv[k] = bent.value(x);
        fpv[k] = bent.deriv(x);
        fppv[k] = bent.deriv2(x);
    }
    const RadialProfile piece{2,
                              q,
                              Eigen::Map<Eigen::VectorXd>(xs.data(), mpiece),
                              Eigen::Map<Eigen::VectorXd>(fv.data(), mpiece),
                              Eigen::Map<Eigen::VectorXd>(fpv.data(), mpiece),
                              Eigen::Map<Eigen::VectorXd>(fppv.data(), mpiece),
                              std::vector<SegmentTag>(mpiece, SegmentTag::BentRN)};
    if (!(charged_hawking_mass(2, q, piece.f[0], piece.fp[0]) > std::abs(q)))
        throw GlueHypothesisError("glue_to_rn: bent slice Hawking mass <= |Q|");

    JunctionReport rep;
    const RadialProfile glued = glue_profiles(neck, piece, q, &rep, sat_tol);

    // Append the rest of the bent profile, shifted by the same offset; node
    // data beyond the bend window is bit-exact RN.
    std::vector<double> oxs(glued.s.data(), glued.s.data() + glued.size());
    std::vector<double> of(glued.f.data(), glued.f.data() + glued.size());
    std::vector<double> ofp(glued.fp.data(), glued.fp.data() + glued.size());
    std::vector<double> ofpp(glued.fpp.data(), glued.fpp.data() + glued.size());
    std::vector<SegmentTag> otags = glued.tags;
    for (Eigen::Index i = 0; i < bent.size(); ++i) {
        if (bent.s[i] <= piece_end + 1e-12 * s_len) continue;
        oxs.push_back(bent.s[i] + rep.offset);
        of.push_back(bent.f[i]);
        ofp.push_back(bent.fp[i]);
        ofpp.push_back(bent.fpp[i]);
        otags.push_back(bent.tags[i]);
    }
    const auto mt = static_cast<Eigen::Index>(oxs.size());
    if (report) {
        *report = rep;
        report->s_att = s_att;
        report->eps_att = eps_att;
        report->mu = mu;
        report->delta = delta;
    }
    return {2,
            q,
            Eigen::Map<Eigen::VectorXd>(oxs.data(), mt),
            Eigen::Map<Eigen::VectorXd>(of.data(), mt),
            Eigen::Map<Eigen::VectorXd>(ofp.data(), mt),
            Eigen::Map<Eigen::VectorXd>(ofpp.data(), mt),
            std::move(otags)};
}

} // namespace charex
