#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "charex/conformal.hpp"
#include "charex/eigenpair.hpp"

namespace charex {

/// Raw conformal interpolation g(t) = e^{2(1-t)w} g_{r_o} between a Bartnik
/// boundary metric (t = 0) and the round sphere (t = 1).
struct RawConformalPath {
    ConformalData data;                // the t = 0 conformal representation
    Eigen::VectorXd t;                 // uniform nodes on [0, 1]
    std::vector<AxisymMetric> metrics; // g(t_k)
};

inline RawConformalPath conformal_path(const ConformalData& cd, int n_t) {
    if (n_t < 17)
        throw ParameterError("conformal_path: N_t must be >= 17, got " + std::to_string(n_t));
    const GridPtr& g = cd.grid();
    const int n = g->size();
    Eigen::VectorXd t(n_t);
    std::vector<AxisymMetric> ms;
    ms.reserve(n_t);
    for (int k = 0; k < n_t; ++k) {
        t[k] = static_cast<double>(k) / (n_t - 1);
        const double c = 1.0 - t[k];
        Eigen::VectorXd q(n), p(n);
        for (int i = 0; i < n; ++i) {
            const double conf = std::exp(c * cd.w()[i]) * cd.r_o();
            q[i] = conf;
            p[i] = conf * std::sin(g->theta(i));
        }
        ms.emplace_back(g, std::move(q), std::move(p));
    }
    return {cd, std::move(t), std::move(ms)};
}

/// Verdict of the spectral threshold check lambda_1(t) > kappa_target.
struct PathVerdict {
    bool ok;                // min lambda exceeds the target strictly (tol 1e-10)
    double margin;          // min lambda - kappa_target
    Eigen::VectorXd lambda; // per-node first eigenvalues
};

inline PathVerdict verify_lambda(const std::vector<AxisymMetric>& ms, double kappa_target) {
    Eigen::VectorXd lam(static_cast<int>(ms.size()));
    for (int k = 0; k < lam.size(); ++k) lam[k] = first_eigenpair(ms[k]).lambda;
    const double margin = lam.minCoeff() - kappa_target;
    return {margin > 1e-10, margin, std::move(lam)};
}

inline PathVerdict verify_path_lambda(const RawConformalPath& path, double kappa_target) {
    return verify_lambda(path.metrics, kappa_target);
}

/// Monotone C-infinity time reparametrization, identically 1 on [theta_cut, 1].
inline double eta_reparam(double t, double theta_cut) {
    return smoothstep(t / theta_cut);
}

/// Normalized path of metrics: g'(t) = 0 past theta_cut, t-independent area
/// form (trace-free velocity), eigenpairs and the constants kappa, alpha, beta.
struct MetricPath {
    GridPtr grid;
    Eigen::VectorXd t;
    double theta_cut{};
    double r_o{};
    std::vector<AxisymMetric> metrics;
    std::vector<Eigen::VectorXd> theta_maps; // node images under the Moser map
    Eigen::VectorXd lambda;                  // lambda_1 per node
    std::vector<ScalarField> u;              // positive L2-normalized eigenfunctions
    double kappa{};
    double alpha{};
    double beta{};
};

struct PathConstants {
    double kappa, alpha, beta;
};

/// kappa = min lambda; alpha = (1/4) max |g'|^2 via centered t-differences of
/// (q^2, p^2); beta = r_o^2 min K.
inline PathConstants path_constants(const MetricPath& path) {
    const int n_t = static_cast<int>(path.t.size());
    const int n = path.grid->size();
    PathConstants out{path.lambda.minCoeff(), 0.0, std::numeric_limits<double>::infinity()};
    for (int k = 0; k < n_t; ++k) {
        const int km = std::max(k - 1, 0);
        const int kp = std::min(k + 1, n_t - 1);
        const double dt = path.t[kp] - path.t[km];
        for (int i = 0; i < n; ++i) {
            const double q2 = path.metrics[k].q()[i] * path.metrics[k].q()[i];
            const double p2 = path.metrics[k].p()[i] * path.metrics[k].p()[i];
            const double dq2 = (path.metrics[kp].q()[i] * path.metrics[kp].q()[i] -
                                path.metrics[km].q()[i] * path.metrics[km].q()[i]) / dt;
            const double dp2 = (path.metrics[kp].p()[i] * path.metrics[kp].p()[i] -
                                path.metrics[km].p()[i] * path.metrics[km].p()[i]) / dt;
            const double norm2 = (dq2 / q2) * (dq2 / q2) + (dp2 / p2) * (dp2 / p2);
            out.alpha = std::max(out.alpha, 0.25 * norm2);
        }
        out.beta = std::min(out.beta, gaussian_curvature(path.metrics[k]).values.minCoeff());
    }
    out.beta *= path.r_o * path.r_o;
    return out;
}

/// Time reparametrization by eta plus an axisymmetric Moser correction: each
/// slice e^{2 phi(t)} g_{r_o} (area-renormalized) is pulled back by the unique
/// colatitude diffeomorphism matching its cumulative area profile to the t = 0
/// slice, so the discrete area form q p is exactly t-independent and the t = 0
/// metric is preserved node-wise (Theta_0 = identity).
inline MetricPath normalize_path(const RawConformalPath& raw, double theta_cut = 0.75) {
    if (!(theta_cut > 0.0 && theta_cut < 1.0))
        throw ParameterError("normalize_path: theta_cut must lie in (0,1)");
    const GridPtr& g = raw.data.grid();
    const int n = g->size();
    const int n_t = static_cast<int>(raw.t.size());
    const double pi = std::numbers::pi;
    const double r_o = raw.data.r_o();

    // w as an even function of theta, evaluable off-grid (spline in cos theta).
    std::vector<double> cx(n), cy(n);
    for (int i = 0; i < n; ++i) {
        cx[i] = std::cos(g->theta(n - 1 - i));
        cy[i] = raw.data.w()[n - 1 - i];
    }
    const CubicSpline w_of_x(cx, cy);
    auto weval = [&](double th) { return w_of_x(std::cos(th)); };

    // Cumulative area density of e^{2 c w} g_{r_o} (the common factor
    // 2 pi r_o^2 drops out of the matching).
    auto make_cum = [&](double c) {
        std::vector<double> ax(n + 2), ay(n + 2);
        ax[0] = 0.0;
        ay[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            ax[i + 1] = g->theta(i);
            ay[i + 1] = std::exp(2.0 * c * raw.data.w()[i]) * std::sin(g->theta(i));
        }
        ax[n + 1] = pi;
        ay[n + 1] = 0.0;
        detail::CumulativeSpline cum(std::move(ax), std::move(ay));
        std::vector<double> nodes(n + 1);
        for (int i = 0; i < n; ++i) nodes[i] = g->theta(i);
        nodes[n] = pi;
        cum.tabulate(nodes);
        return cum;
    };
    const detail::CumulativeSpline a0 = make_cum(1.0);
    const double total0 = a0.integral_to(pi);

    const AxisymMetric g0 = raw.data.induced_metric();
    const Eigen::VectorXd area_form = g0.q().cwiseProduct(g0.p()); // kept for all t

    MetricPath out;
    out.grid = g;
    out.t = raw.t;
    out.theta_cut = theta_cut;
    out.r_o = r_o;
    out.lambda.resize(n_t);

    double prev_c = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < n_t; ++k) {
        const double c = 1.0 - eta_reparam(raw.t[k], theta_cut);
        if (k > 0 && c == prev_c) {
            out.metrics.push_back(out.metrics.back());
            out.theta_maps.push_back(out.theta_maps.back());
            out.lambda[k] = out.lambda[k - 1];
            out.u.push_back(out.u.back());
            continue;
        }
        prev_c = c;

        Eigen::VectorXd theta_map(n), q(n), p(n);
        if (c == 1.0) {
            theta_map = g->nodes();
            q = g0.q();
            p = g0.p();
        } else {
            const detail::CumulativeSpline ac = make_cum(c);
            const double totalc = ac.integral_to(pi);
            const double b = 0.5 * std::log(total0 / totalc); // slice area renormalization
            double guess = g->theta(0);
            for (int i = 0; i < n; ++i) {
                const double target = a0.integral_to(g->theta(i)) / total0;
                // Newton with analytic density, bisection fallback
                double th = std::clamp(guess, 1e-12, pi - 1e-12);
                bool ok = false;
                for (int it = 0; it < 60; ++it) {
                    const double val = ac.integral_to(th) / totalc - target;
                    const double der =
                        std::exp(2.0 * c * weval(th)) * std::sin(th) / totalc;
                    const double step = val / der;
                    const double next = th - step;
                    if (!(next > 0.0 && next < pi)) break;
                    th = next;
                    if (std::abs(step) < 1e-14) { ok = true; break; }
                }
                if (!ok) {
                    try {
                        th = bisect([&](double x) { return ac.integral_to(x) / totalc - target; },
                                    1e-12, pi - 1e-12, 1e-14);
                    } catch (const ParameterError&) {
                        throw ParameterError("normalize_path: cumulative-area inversion failed");
                    }
                }
                theta_map[i] = th;
                guess = th;
                p[i] = std::exp(c * weval(th) + b) * r_o * std::sin(th);
                q[i] = area_form[i] / p[i]; // exact t-independent area form
            }
        }
        out.metrics.emplace_back(g, std::move(q), std::move(p));
        out.theta_maps.push_back(std::move(theta_map));
        auto pair = first_eigenpair(out.metrics.back());
        out.lambda[k] = pair.lambda;
        out.u.push_back(std::move(pair.u));
    }

    const PathConstants pc = path_constants(out);
    out.kappa = pc.kappa;
    out.alpha = pc.alpha;
    out.beta = pc.beta;
    return out;
}

inline PathVerdict verify_path_lambda(const MetricPath& path, double kappa_target) {
    const double margin = path.lambda.minCoeff() - kappa_target;
    return {margin > 1e-10, margin, path.lambda};
}

} // namespace charex
