#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "charex/metric_path.hpp"
#include "charex/radial.hpp"

namespace charex {

/// Per-node first eigendata of -Delta_{g(t)} + K(g(t)) along a normalized
/// path, with the t-derivative of log u and the two constants entering the
/// amplitude selection.
struct EigenPathData {
    Eigen::VectorXd lambda;
    std::vector<Eigen::VectorXd> u;         // positive, L^2(dA)-normalized
    std::vector<Eigen::VectorXd> dt_log_u;  // centered t-differences
    double inf_u2{};
    double sup_dt_log_u{};
};

/// Collect the eigenpairs computed during path normalization, enforce
/// t-coherence of the eigenfunction branch, and form d/dt log u by centered
/// differences with one-sided closures at the endpoints.
inline EigenPathData eigen_path(const MetricPath& path) {
    const int n_t = static_cast<int>(path.t.size());
    const int n = path.grid->size();
    EigenPathData out;
    out.lambda = path.lambda;
    out.u.reserve(n_t);
    for (int k = 0; k < n_t; ++k) out.u.push_back(path.u[k].values);

    for (int k = 1; k < n_t; ++k) {
        const double scale = out.u[k - 1].cwiseAbs().maxCoeff();
        const double diff = (out.u[k] - out.u[k - 1]).cwiseAbs().maxCoeff();
        if (!(diff <= 0.5 * scale))
            throw PathCoherenceError(
                "eigen_path: eigenfunction branch jumps between t-nodes " +
                std::to_string(k - 1) + " and " + std::to_string(k));
    }

    out.dt_log_u.resize(n_t);
    out.inf_u2 = std::numeric_limits<double>::infinity();
    out.sup_dt_log_u = 0.0;
    for (int k = 0; k < n_t; ++k) {
        const int km = std::max(k - 1, 0);
        const int kp = std::min(k + 1, n_t - 1);
        const double dt = path.t[kp] - path.t[km];
        Eigen::VectorXd row(n);
        for (int i = 0; i < n; ++i) {
            row[i] = (std::log(out.u[kp][i]) - std::log(out.u[km][i])) / dt;
            out.inf_u2 = std::min(out.inf_u2, out.u[k][i] * out.u[k][i]);
        }
        out.sup_dt_log_u = std::max(out.sup_dt_log_u, row.cwiseAbs().maxCoeff());
        out.dt_log_u[k] = std::move(row);
    }
    return out;
}

/// Constant lapse-profile value u(1) on the round end of the path; requires
/// the final eigenfunction to be constant over the cross-section.
inline double neck_lapse_value(const EigenPathData& ep) {
    const Eigen::VectorXd& u1 = ep.u.back();
    const double mean = u1.mean();
    if (!((u1.maxCoeff() - u1.minCoeff()) <= 1e-4 * mean))
        throw NeckError("neck_lapse_value: eigenfunction on the round end is not constant");
    return mean;
}

struct AmplitudeSelection {
    double amplitude;
    double inequality_margin; // A^2 inf u^2 (kappa - Q^2/r_o^4) - 2 - alpha - 2 sup|dt log u|
};

/// Minimal admissible lapse amplitude times a sqrt(2) safety factor, so the
/// verified strict inequality holds with margin equal to the full demand
/// 2 + alpha + 2 sup|dt log u|.
inline AmplitudeSelection select_amplitude(const EigenPathData& ep, double kappa, double r_o,
                                           double q, double alpha) {
    const double gap = kappa - q * q / (r_o * r_o * r_o * r_o);
    if (!(gap > 0.0))
        throw AdmissibilityError("select_amplitude: need kappa > Q^2/r_o^4, got gap = " +
                                 std::to_string(gap));
    const double need = 2.0 + alpha + 2.0 * ep.sup_dt_log_u;
    const double a2 = 2.0 * need / (ep.inf_u2 * gap);
    const double margin = a2 * ep.inf_u2 * gap - need;
    if (!(margin > 0.0))
        throw AdmissibilityError("select_amplitude: amplitude inequality not strict");
    return {std::sqrt(a2), margin};
}

/// Closed-form charged Hawking mass of the slice at parameter t on the round
/// portion of the collar, F(t) = (1 + eps t^2)^{1/2}:
///   m_H(t) = (F r_o / 2) (1 + Q^2/(F^2 r_o^2) - r_o^2 F'(t)^2/(A^2 u(1)^2)).
inline double collar_slice_mass(double t, double eps, double amp, double u1, double r_o,
                                double q) {
    const double f2 = 1.0 + eps * t * t;
    const double fr = std::sqrt(f2);
    const double fp = eps * t / fr;
    return 0.5 * fr * r_o *
           (1.0 + q * q / (f2 * r_o * r_o) - r_o * r_o * fp * fp / (amp * amp * u1 * u1));
}

struct EpsilonReport {
    double eps;
    double mh0; // boundary slice mass r_o/2 + Q^2/(2 r_o)
    double mh1; // top slice mass at the accepted eps
};

/// Halve the neck parameter from 0.5 until the three exact slice-mass
/// conditions hold: m > m_H(Sigma_1) > max(m_H(Sigma_0), |Q|).
inline double select_epsilon(double m, double r_o, double q, double amp, double u1,
                             EpsilonReport* report = nullptr) {
    if (!(q * q < r_o * r_o))
        throw AdmissibilityError("select_epsilon: need Q^2 < r_o^2");
    const double mh0 = 0.5 * r_o + 0.5 * q * q / r_o;
    for (double eps = 0.5; eps > 1e-14; eps *= 0.5) {
        const double mh1 = collar_slice_mass(1.0, eps, amp, u1, r_o, q);
        if (m > mh1 && mh1 > mh0 && mh1 > std::abs(q)) {
            if (report) *report = {eps, mh0, mh1};
            return eps;
        }
    }
    throw EpsilonSearchError(
        "select_epsilon: halving floor reached (target mass too close to the boundary bound)");
}

/// Assembled collar region gamma_c = A^2 u(t,.)^2 dt^2 + (1 + eps t^2) g(t)
/// with radial electric field of total charge Q, plus slice diagnostics.
struct CollarBlock {
    MetricPath path;
    EigenPathData eigen;
    double amplitude{}, eps{}, Q{}, r_o{};
    Eigen::VectorXd F, Fp, Fpp;       // neck factor and derivatives per t-node
    std::vector<Eigen::VectorXd> v;   // lapse A u(t_k, .)
    std::vector<Eigen::VectorXd> h;   // mean curvature 2 F'/(v F) per t-node
    Eigen::VectorXd slice_area, slice_mh, slice_flux;
    double max_div_e{};
};

/// Mean curvature row, area, charged Hawking mass, and electric flux of the
/// t_k slice, all by direct quadrature on the scaled metric F^2 g(t_k).
struct SliceDiagnostics {
    Eigen::VectorXd h;
    double area;
    double mh;
    double flux;
};

inline SliceDiagnostics slice_diagnostics(const CollarBlock& blk, int k) {
    const double pi = std::numbers::pi;
    const PolarGrid& g = *blk.path.grid;
    const AxisymMetric& m = blk.path.metrics[k];
    const double f2 = blk.F[k] * blk.F[k];
    SliceDiagnostics out;
    out.h = blk.h[k];
    const Eigen::VectorXd qp = m.q().cwiseProduct(m.p());
    out.area = 2.0 * pi * f2 * g.quadrature(qp);
    const double h2_int = 2.0 * pi * f2 * g.quadrature(qp.cwiseProduct(out.h.cwiseAbs2()));
    out.mh = std::sqrt(out.area / (16.0 * pi)) *
             (1.0 + 4.0 * pi * blk.Q * blk.Q / out.area - h2_int / (16.0 * pi));
    const AxisymMetric scaled(blk.path.grid, blk.F[k] * m.q(), blk.F[k] * m.p());
    const ScalarField e_normal =
        ScalarField::constant(blk.path.grid, blk.Q / (blk.r_o * blk.r_o * f2));
    out.flux = charge_flux(scaled, e_normal);
    return out;
}

namespace detail {

/// |g'(t)|^2_{g(t)} at each theta node by centered t-differences of (q^2, p^2).
inline Eigen::VectorXd gprime_norm2_row(const MetricPath& path, int k) {
    const int n_t = static_cast<int>(path.t.size());
    const int n = path.grid->size();
    const int km = std::max(k - 1, 0);
    const int kp = std::min(k + 1, n_t - 1);
    const double dt = path.t[kp] - path.t[km];
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        const double q2 = path.metrics[k].q()[i] * path.metrics[k].q()[i];
        const double p2 = path.metrics[k].p()[i] * path.metrics[k].p()[i];
        const double dq2 = (path.metrics[kp].q()[i] * path.metrics[kp].q()[i] -
                            path.metrics[km].q()[i] * path.metrics[km].q()[i]) / dt;
        const double dp2 = (path.metrics[kp].p()[i] * path.metrics[kp].p()[i] -
                            path.metrics[km].p()[i] * path.metrics[km].p()[i]) / dt;
        out[i] = (dq2 / q2) * (dq2 / q2) + (dp2 / p2) * (dp2 / p2);
    }
    return out;
}

} // namespace detail

inline CollarBlock assemble_collar(const MetricPath& path, double amp, double eps, double q) {
    if (!(amp > 0.0)) throw ParameterError("assemble_collar: amplitude must be positive");
    if (!(eps >= 0.0 && eps < 1.0))
        throw ParameterError("assemble_collar: eps must lie in [0, 1)");
    CollarBlock blk;
    blk.path = path;
    blk.eigen = eigen_path(path);
    blk.amplitude = amp;
    blk.eps = eps;
    blk.Q = q;
    blk.r_o = path.r_o;

    const int n_t = static_cast<int>(path.t.size());
    blk.F.resize(n_t);
    blk.Fp.resize(n_t);
    blk.Fpp.resize(n_t);
    blk.v.reserve(n_t);
    blk.h.reserve(n_t);
    for (int k = 0; k < n_t; ++k) {
        const double t = path.t[k];
        blk.F[k] = std::sqrt(1.0 + eps * t * t);
        blk.Fp[k] = eps * t / blk.F[k];
        blk.Fpp[k] = eps / (blk.F[k] * blk.F[k] * blk.F[k]);
        Eigen::VectorXd v = amp * blk.eigen.u[k];
        if ((v.array() <= 0.0).any())
            throw Error("assemble_collar: lapse is not positive");
        blk.h.push_back((2.0 * blk.Fp[k] / blk.F[k]) * v.cwiseInverse());
        blk.v.push_back(std::move(v));
    }

    if (!(blk.h[0].cwiseAbs().maxCoeff() <= 1e-10))
        throw Error("assemble_collar: boundary slice is not minimal");
    if (eps > 0.0)
        for (int k = 1; k < n_t; ++k)
            if (!(blk.h[k].minCoeff() > 0.0))
                throw Error("assemble_collar: interior slice is not mean convex");

    blk.slice_area.resize(n_t);
    blk.slice_mh.resize(n_t);
    blk.slice_flux.resize(n_t);
    for (int k = 0; k < n_t; ++k) {
        const SliceDiagnostics d = slice_diagnostics(blk, k);
        blk.slice_area[k] = d.area;
        blk.slice_mh[k] = d.mh;
        blk.slice_flux[k] = d.flux;
        if (!(std::abs(d.flux - q) <= 1e-9 * std::max(1.0, std::abs(q))))
            throw Error("assemble_collar: flux drift at t-node " + std::to_string(k));
    }

    // Discrete divergence of E = Q/(r_o^2 v F^2) dt: since E^t sqrt(|gamma|)
    // = Q q p / r_o^2 and the area form q p is t-independent by construction,
    // the centered t-difference below measures pure roundoff.
    blk.max_div_e = 0.0;
    const int n = path.grid->size();
    for (int k = 0; k < n_t; ++k) {
        const int km = std::max(k - 1, 0);
        const int kp = std::min(k + 1, n_t - 1);
        const double dt = path.t[kp] - path.t[km];
        for (int i = 0; i < n; ++i) {
            const double gm = path.metrics[km].q()[i] * path.metrics[km].p()[i];
            const double gp = path.metrics[kp].q()[i] * path.metrics[kp].p()[i];
            const double qp_k = path.metrics[k].q()[i] * path.metrics[k].p()[i];
            const double div = (q / (blk.r_o * blk.r_o)) * (gp - gm) / dt /
                               (blk.v[k][i] * blk.F[k] * blk.F[k] * qp_k);
            blk.max_div_e = std::max(blk.max_div_e, std::abs(div));
        }
    }
    if (!(blk.max_div_e <= 1e-6))
        throw Error("assemble_collar: electric field is not discretely divergence free");
    return blk;
}

/// Pointwise margin R(gamma_c) - 2|E|^2 from the warped-product scalar
/// curvature, with the slice Laplacian and Gauss curvature evaluated on the
/// scaled metric F^2 g(t); throws on any non-positive interior node.
inline std::vector<Eigen::VectorXd> collar_dec_field(const CollarBlock& blk) {
    const int n_t = static_cast<int>(blk.path.t.size());
    const int n = blk.path.grid->size();
    std::vector<Eigen::VectorXd> out;
    out.reserve(n_t);
    for (int k = 0; k < n_t; ++k) {
        const AxisymMetric& m = blk.path.metrics[k];
        const AxisymMetric scaled(blk.path.grid, blk.F[k] * m.q(), blk.F[k] * m.p());
        const ScalarField vf{blk.path.grid, blk.v[k]};
        const Eigen::VectorXd lap = laplace_beltrami(scaled, vf).values;
        const Eigen::VectorXd kg = gaussian_curvature(scaled).values;
        const Eigen::VectorXd gp2 = detail::gprime_norm2_row(blk.path, k);
        const double f2 = blk.F[k] * blk.F[k];
        const double f_term = (-2.0 * blk.Fp[k] * blk.Fp[k] - 4.0 * blk.F[k] * blk.Fpp[k]) / f2;
        const double e2 = 2.0 * blk.Q * blk.Q /
                          (blk.r_o * blk.r_o * blk.r_o * blk.r_o * f2 * f2);
        Eigen::VectorXd row(n);
        for (int i = 0; i < n; ++i) {
            const double v = blk.v[k][i];
            const double r = 2.0 / v * (-lap[i] + kg[i] * v) +
                             (f_term - 0.25 * gp2[i] +
                              4.0 * blk.eigen.dt_log_u[k][i] * blk.Fp[k] / blk.F[k]) /
                                 (v * v);
            row[i] = r - e2;
            if (!(row[i] > 0.0))
                throw CollarDECError("collar_dec_field: non-positive margin at t-node " +
                                     std::to_string(k) + ", theta-node " + std::to_string(i));
        }
        out.push_back(std::move(row));
    }
    return out;
}

/// Same margin via the eigenvalue identity
///   -Delta_{F^2 g}(A u) + K(F^2 g) A u = F^{-2} lambda(t) A u,
/// replacing the discrete slice operators; independent evaluation route.
inline std::vector<Eigen::VectorXd> collar_dec_field_spectral(const CollarBlock& blk) {
    const int n_t = static_cast<int>(blk.path.t.size());
    const int n = blk.path.grid->size();
    std::vector<Eigen::VectorXd> out;
    out.reserve(n_t);
    const double a2 = blk.amplitude * blk.amplitude;
    for (int k = 0; k < n_t; ++k) {
        const Eigen::VectorXd gp2 = detail::gprime_norm2_row(blk.path, k);
        const double f2 = blk.F[k] * blk.F[k];
        const double f_term = (-2.0 * blk.Fp[k] * blk.Fp[k] - 4.0 * blk.F[k] * blk.Fpp[k]) / f2;
        const double e2 = 2.0 * blk.Q * blk.Q /
                          (blk.r_o * blk.r_o * blk.r_o * blk.r_o * f2 * f2);
        Eigen::VectorXd row(n);
        for (int i = 0; i < n; ++i) {
            const double u = blk.eigen.u[k][i];
            row[i] = 2.0 * blk.path.lambda[k] / f2 +
                     (f_term - 0.25 * gp2[i] +
                      4.0 * blk.eigen.dt_log_u[k][i] * blk.Fp[k] / blk.F[k]) /
                         (a2 * u * u) -
                     e2;
        }
        out.push_back(std::move(row));
    }
    return out;
}

/// Rotationally symmetric reduction of the round portion of the collar:
/// s(t) = A u(1) t on [theta_cut, 1] gives ds^2 + f(s)^2 g_* with
/// f(s)^2 = r_o^2 (1 + eps s^2/(A^2 u(1)^2)).
inline RadialProfile collar_neck_profile(const CollarBlock& blk, int nodes = 257) {
    if (nodes < 8) throw ParameterError("collar_neck_profile: need at least 8 nodes");
    // Roundness past the cut is checked invariantly (constant curvature
    // 1/r_o^2), since the slices may be stored in mapped coordinates.
    for (int k = 0; k < static_cast<int>(blk.path.t.size()); ++k) {
        if (blk.path.t[k] < blk.path.theta_cut - 1e-12) continue;
        const Eigen::VectorXd kg = gaussian_curvature(blk.path.metrics[k]).values;
        if ((kg.array() * (blk.r_o * blk.r_o) - 1.0).abs().maxCoeff() > 5e-3)
            throw NeckError("collar_neck_profile: path is not round past theta_cut");
    }
    const double u1 = neck_lapse_value(blk.eigen);
    const double s0 = blk.amplitude * u1 * blk.path.theta_cut;
    const double s1 = blk.amplitude * u1;
    const double c = blk.eps / (blk.amplitude * blk.amplitude * u1 * u1);
    Eigen::VectorXd s(nodes), f(nodes), fp(nodes), fpp(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double x = s0 + (s1 - s0) * i / (nodes - 1);
        const double w = 1.0 + c * x * x;
        const double rw = std::sqrt(w);
        s[i] = x;
        f[i] = blk.r_o * rw;
        fp[i] = blk.r_o * c * x / rw;
        fpp[i] = blk.r_o * c / (w * rw);
    }
    return {2, blk.Q, std::move(s), std::move(f), std::move(fp), std::move(fpp),
            std::vector<SegmentTag>(nodes, SegmentTag::CollarNeck)};
}

} // namespace charex
