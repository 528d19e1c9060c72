#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "charex/errors.hpp"

namespace charex {

/// Construction region a profile node belongs to.
enum class SegmentTag { CollarNeck, Bridge, BentRN, RNTail };

inline const char* segment_name(SegmentTag t) {
    switch (t) {
        case SegmentTag::CollarNeck: return "COLLAR_NECK";
        case SegmentTag::Bridge: return "BRIDGE";
        case SegmentTag::BentRN: return "BENT_RN";
        case SegmentTag::RNTail: return "RN_TAIL";
    }
    return "?";
}

/// Rotationally symmetric warped-product data: gamma_f = ds^2 + f(s)^2 g_* on
/// an interval, with the cross-section an n-sphere and per-node first/second
/// derivatives (one-sided from the left at C^{1,1} junctions).
struct RadialProfile {
    int n = 2;      // cross-section dimension
    double Q = 0.0; // total charge threading every slice
    Eigen::VectorXd s, f, fp, fpp;
    std::vector<SegmentTag> tags;

    RadialProfile() = default;

    RadialProfile(int n_, double q_, Eigen::VectorXd s_, Eigen::VectorXd f_, Eigen::VectorXd fp_,
                  Eigen::VectorXd fpp_, std::vector<SegmentTag> tags_)
        : n(n_), Q(q_), s(std::move(s_)), f(std::move(f_)), fp(std::move(fp_)),
          fpp(std::move(fpp_)), tags(std::move(tags_)) {
        if (n < 2) throw DimensionError("RadialProfile: cross-section dimension must be >= 2");
        const auto m = s.size();
        if (m < 2 || f.size() != m || fp.size() != m || fpp.size() != m ||
            static_cast<Eigen::Index>(tags.size()) != m)
            throw ParameterError("RadialProfile: inconsistent field lengths");
        for (Eigen::Index i = 1; i < m; ++i)
            if (s[i] <= s[i - 1]) throw ParameterError("RadialProfile: s must strictly increase");
        if ((f.array() <= 0).any()) throw ParameterError("RadialProfile: f must be positive");
        if (!f.allFinite() || !fp.allFinite() || !fpp.allFinite())
            throw ParameterError("RadialProfile: non-finite profile data");
    }

    Eigen::Index size() const { return s.size(); }
    double a() const { return s[0]; }
    double b() const { return s[s.size() - 1]; }

    Eigen::Index locate(double x) const {
        Eigen::Index i =
            std::upper_bound(s.data(), s.data() + s.size(), x) - s.data() - 1;
        return std::clamp<Eigen::Index>(i, 0, s.size() - 2);
    }

    /// Values from the quintic Hermite matching (f, f', f'') at both interval
    /// ends; first/second derivatives from the cubic Hermite fit to the
    /// stored (f', f'') data.  Differentiating the value quintic instead
    /// would amplify node roundoff by 1/h^2, which is catastrophic on fine
    /// grids where f varies by a few ulps between nodes.
    double eval(double x, int order = 0) const {
        const Eigen::Index i = locate(x);
        const double h = s[i + 1] - s[i];
        const double t = (x - s[i]) / h;
        if (order == 0) {
            // coefficients of p(t) = sum c_k t^k from the Hermite conditions
            const double c0 = f[i];
            const double c1 = h * fp[i];
            const double c2 = 0.5 * h * h * fpp[i];
            const double df = f[i + 1] - c0 - c1 - c2;
            const double dp = h * fp[i + 1] - c1 - 2.0 * c2;
            const double da = h * h * fpp[i + 1] - 2.0 * c2;
            const double c3 = 10.0 * df - 4.0 * dp + 0.5 * da;
            const double c4 = -15.0 * df + 7.0 * dp - da;
            const double c5 = 6.0 * df - 3.0 * dp + 0.5 * da;
            return c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        }
        const double p0 = fp[i], m0 = h * fpp[i], m1 = h * fpp[i + 1];
        const double dp = fp[i + 1] - p0;
        const double a2 = 3.0 * dp - 2.0 * m0 - m1;
        const double a3 = -2.0 * dp + m0 + m1;
        switch (order) {
            case 1:
                return p0 + t * (m0 + t * (a2 + t * a3));
            case 2:
                return (m0 + t * (2.0 * a2 + t * 3.0 * a3)) / h;
            default:
                throw ParameterError("RadialProfile::eval: order must be 0, 1, or 2");
        }
    }
    double value(double x) const { return eval(x, 0); }
    double deriv(double x) const { return eval(x, 1); }
    double deriv2(double x) const { return eval(x, 2); }
};

/// Sub-extremal Reissner-Nordstrom parameters.
struct RNParams {
    double m;      // mass
    double Q;      // charge
    double r_plus; // horizon radius

    RNParams(double m_, double q_) : m(m_), Q(q_) {
        if (!(m > std::abs(Q)))
            throw ExtremalityError("RNParams: need m > |Q| (sub-extremal), got m = " +
                                   std::to_string(m) + ", Q = " + std::to_string(Q));
        r_plus = m + std::sqrt(m * m - Q * Q);
    }
};

namespace detail {

/// First integral: u'^2 = 1 - 2m/u + Q^2/u^2.
inline double rn_uprime2(const RNParams& p, double u) {
    return 1.0 - 2.0 * p.m / u + p.Q * p.Q / (u * u);
}
/// u'' = (m u - Q^2)/u^3 (derivative of the first integral).
inline double rn_usecond(const RNParams& p, double u) {
    return (p.m * u - p.Q * p.Q) / (u * u * u);
}

} // namespace detail

/// Integrate the RN radial profile u_{m,Q} on [0, s_max] with fixed step h:
/// classical 4th-order one-step method on the second-order system
/// (u, v)' = (v, (m u - Q^2)/u^3), started from the horizon by the even Taylor
/// expansion u = r_+ + u''(0) s^2/2 + u''''(0) s^4/24 (the square-root form of
/// the ODE is non-Lipschitz at s = 0).  The first-integral drift
/// v^2 - (1 - 2m/u + Q^2/u^2) is an exact a-posteriori error gauge.
inline RadialProfile rn_profile(const RNParams& p, double s_max, double h,
                                SegmentTag tag = SegmentTag::RNTail) {
    if (!(s_max > 0.0) || !(h > 0.0))
        throw ParameterError("rn_profile: s_max and h must be positive");
    const auto steps = static_cast<Eigen::Index>(std::ceil(s_max / h - 1e-12));
    const Eigen::Index m = steps + 1;
    Eigen::VectorXd s(m), f(m), fp(m), fpp(m);

    auto accel = [&](double u) { return detail::rn_usecond(p, u); };

    // Taylor bootstrap at the degenerate start.
    const double a2 = detail::rn_usecond(p, p.r_plus);
    const double a4 = a2 * (-2.0 * p.m * p.r_plus + 3.0 * p.Q * p.Q) /
                      (p.r_plus * p.r_plus * p.r_plus * p.r_plus);
    s[0] = 0.0;
    f[0] = p.r_plus;
    fp[0] = 0.0;
    fpp[0] = a2;

    double u = p.r_plus, v = 0.0;
    for (Eigen::Index k = 1; k < m; ++k) {
        const double sk = std::min(static_cast<double>(k) * h, s_max);
        const double dt = sk - s[k - 1];
        if (k == 1) {
            u = p.r_plus + 0.5 * a2 * dt * dt + a4 * dt * dt * dt * dt / 24.0;
            v = a2 * dt + a4 * dt * dt * dt / 6.0;
        } else {
            const double k1u = v, k1v = accel(u);
            const double k2u = v + 0.5 * dt * k1v, k2v = accel(u + 0.5 * dt * k1u);
            const double k3u = v + 0.5 * dt * k2v, k3v = accel(u + 0.5 * dt * k2u);
            const double k4u = v + dt * k3v, k4v = accel(u + dt * k3u);
            u += dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        }
        s[k] = sk;
        f[k] = u;
        fp[k] = v;
        fpp[k] = accel(u);
    }
    return {2, p.Q, std::move(s), std::move(f), std::move(fp), std::move(fpp),
            std::vector<SegmentTag>(m, tag)};
}

/// R(gamma_f) = n/f^2 [(n-1) - (n-1) f'^2 - 2 f f''] per node.
inline Eigen::VectorXd scalar_curvature(const RadialProfile& pr) {
    const double nn = pr.n;
    return (nn / pr.f.cwiseAbs2().array()) *
           ((nn - 1.0) - (nn - 1.0) * pr.fp.cwiseAbs2().array() -
            2.0 * pr.f.cwiseProduct(pr.fpp).array());
}

struct ElectricField {
    Eigen::VectorXd normal; // E^s = Q/f^n
    Eigen::VectorXd norm2;  // |E|^2 = Q^2/f^{2n}
};

inline ElectricField electric_field(const RadialProfile& pr) {
    ElectricField out;
    out.normal = pr.Q * pr.f.array().pow(-pr.n);
    out.norm2 = out.normal.cwiseAbs2();
    return out;
}

/// Omega[f] - f'' with Omega[f] = (n-1)/(2f) (1 - f'^2 - Q^2/f^{2(n-1)});
/// DEC R >= n(n-1)|E|^2 holds iff this is >= 0 (strict for strict DEC).
inline Eigen::VectorXd dec_margin(const RadialProfile& pr) {
    const double nn = pr.n;
    const Eigen::ArrayXd omega =
        (nn - 1.0) / (2.0 * pr.f.array()) *
        (1.0 - pr.fp.cwiseAbs2().array() -
         pr.Q * pr.Q * pr.f.array().pow(-2.0 * (nn - 1.0)));
    return omega.matrix() - pr.fpp;
}

/// Charged Hawking mass of the s-slice, (f/2)(1 + Q^2/f^2 - f'^2); 3-manifold
/// (n = 2) formula only.
inline double charged_hawking_mass(int n, double Q, double f, double fprime) {
    if (n != 2)
        throw DimensionError("charged_hawking_mass: formula requires n = 2");
    return 0.5 * f * (1.0 + Q * Q / (f * f) - fprime * fprime);
}

inline Eigen::VectorXd charged_hawking_profile(const RadialProfile& pr) {
    if (pr.n != 2)
        throw DimensionError("charged_hawking_profile: formula requires n = 2");
    Eigen::VectorXd out(pr.size());
    for (Eigen::Index i = 0; i < pr.size(); ++i)
        out[i] = charged_hawking_mass(2, pr.Q, pr.f[i], pr.fp[i]);
    return out;
}

inline double charged_hawking_profile(const RadialProfile& pr, double x) {
    return charged_hawking_mass(pr.n, pr.Q, pr.value(x), pr.deriv(x));
}

enum class Endpoint { Left, Right };

/// Bridging hypotheses at a profile endpoint:
///   (3) f^{n-1} > |Q|;
///   (4) 1 + Q^2/f^{2(n-1)} - 2|Q|/f^{n-1} > f'^2;
/// for n = 2, (4) is equivalent to m_H^{CH} > |Q| at the slice.
struct GlueHypotheses {
    bool radius_dominates_charge; // (3)
    bool slope_within_bound;      // (4)
    double slack4;                // LHS - RHS of (4)
    double hawking_mass;          // n = 2 only, else NaN
    bool hawking_exceeds_charge;  // n = 2 restatement of (4)
};

inline GlueHypotheses hypotheses_34(const RadialProfile& pr, Endpoint end) {
    const Eigen::Index i = (end == Endpoint::Left) ? 0 : pr.size() - 1;
    const double fv = pr.f[i], fpv = pr.fp[i];
    const double fn1 = std::pow(fv, pr.n - 1);
    const double absq = std::abs(pr.Q);
    GlueHypotheses out{};
    out.radius_dominates_charge = fn1 > absq;
    out.slack4 = 1.0 + pr.Q * pr.Q / (fn1 * fn1) - 2.0 * absq / fn1 - fpv * fpv;
    out.slope_within_bound = out.slack4 > 0.0;
    if (pr.n == 2) {
        out.hawking_mass = charged_hawking_mass(2, pr.Q, fv, fpv);
        out.hawking_exceeds_charge = out.hawking_mass > absq;
    } else {
        out.hawking_mass = std::numeric_limits<double>::quiet_NaN();
        out.hawking_exceeds_charge = out.slope_within_bound;
    }
    return out;
}

} // namespace charex
