#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "charex/axisym.hpp"
#include "charex/numerics.hpp"

namespace charex {

namespace detail {

/// Spline with precomputed cumulative integrals from its first node.
class CumulativeSpline {
public:
    CumulativeSpline(std::vector<double> x, std::vector<double> y)
        : spline_(std::move(x), std::move(y)) {
        xs_ = {spline_.x_min()};
        cum_ = {0.0};
    }

    void tabulate(const std::vector<double>& nodes) {
        xs_.assign(1, spline_.x_min());
        cum_.assign(1, 0.0);
        for (double x : nodes) {
            cum_.push_back(cum_.back() + gauss_integrate([this](double t) { return spline_(t); },
                                                         xs_.back(), x, 12));
            xs_.push_back(x);
        }
    }

    /// int_{x_min}^{x} of the spline.
    double integral_to(double x) const {
        int k = static_cast<int>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()) - 1;
        k = std::clamp(k, 0, static_cast<int>(xs_.size()) - 1);
        return cum_[k] + gauss_integrate([this](double t) { return spline_(t); }, xs_[k], x, 12);
    }

    double value(double x) const { return spline_(x); }

private:
    CubicSpline spline_;
    std::vector<double> xs_;
    std::vector<double> cum_;
};

} // namespace detail

/// Isothermal reparametrization of an axisymmetric metric: the colatitude map
/// Theta(theta) onto the round sphere together with the conformal exponent.
struct IsothermalChart {
    Eigen::VectorXd theta_map;   // Theta at the grid nodes
    Eigen::VectorXd w_samples;   // w at the same nodes (as a function of theta)
    double theta_bisector;       // equatorial area bisector of the input metric
    ConformalData data;          // w resampled onto the grid as a function of Theta
};

/// Constructive uniformization for axisymmetric metrics: writes
/// m = pullback of e^{2w} r_o^2 g_* under theta -> Theta(theta), where the
/// Mercator coordinates satisfy d(log tan(Theta/2))/dtheta = q/p.  The gauge
/// is fixed by sending the area bisector of m to the round equator.
inline IsothermalChart uniformize(const AxisymMetric& m) {
    const PolarGrid& g = *m.grid();
    const int n = g.size();
    const double pi = std::numbers::pi;
    const double r_o = std::sqrt(area(m) / (4.0 * pi));

    // Area bisector: cumulative area of q p, anchored at the poles.
    std::vector<double> ax(n + 2), ay(n + 2);
    ax[0] = 0.0; ay[0] = 0.0;
    for (int i = 0; i < n; ++i) { ax[i + 1] = g.theta(i); ay[i + 1] = m.q()[i] * m.p()[i]; }
    ax[n + 1] = pi; ay[n + 1] = 0.0;
    detail::CumulativeSpline area_cum(ax, ay);
    area_cum.tabulate(ax);
    const double half_area = 0.5 * area_cum.integral_to(pi);
    const double theta_b = bisect(
        [&](double t) { return area_cum.integral_to(t) - half_area; }, ax[1], ax[n], 1e-14);

    // rho = q sin(theta)/p is smooth and even; split off the pole values so the
    // log-divergent part of int q/p dtheta integrates analytically.
    Eigen::VectorXd rho(n);
    for (int i = 0; i < n; ++i) rho[i] = m.q()[i] * std::sin(g.theta(i)) / m.p()[i];
    const double rho_n = g.pole_limit_north(rho);
    const double rho_s = g.pole_limit_south(rho);

    auto logtan_half = [](double t) { return std::log(std::tan(0.5 * t)); };

    std::vector<double> sx(n), s_north(n), s_south(n);
    for (int i = 0; i < n; ++i) {
        sx[i] = g.theta(i);
        const double st = std::sin(g.theta(i));
        s_north[i] = (rho[i] - rho_n) / st;
        s_south[i] = (rho[i] - rho_s) / st;
    }
    detail::CumulativeSpline north_cum(sx, s_north);
    north_cum.tabulate(sx);
    detail::CumulativeSpline south_cum(sx, s_south);
    south_cum.tabulate(sx);
    const double north_at_b = north_cum.integral_to(theta_b);
    const double south_at_b = south_cum.integral_to(theta_b);

    Eigen::VectorXd theta_map(n), w_s(n);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = g.theta(i);
        double ell;
        if (t <= theta_b) {
            ell = (north_cum.integral_to(t) - north_at_b) +
                  rho_n * (logtan_half(t) - logtan_half(theta_b));
        } else {
            ell = (south_cum.integral_to(t) - south_at_b) +
                  rho_s * (logtan_half(t) - logtan_half(theta_b));
        }
        const double th = 2.0 * std::atan(std::exp(ell));
        if (!std::isfinite(th) || th <= 0.0 || th >= pi || th <= prev)
            throw UniformizationError("uniformize: isothermal map left (0,pi) or lost monotonicity");
        theta_map[i] = th;
        prev = th;
        w_s[i] = std::log(m.p()[i] / (r_o * std::sin(th)));
    }

    // Resample w as an even function of Theta (spline in cos Theta), then
    // renormalize the area exactly.
    std::vector<double> cx(n), cy(n);
    for (int i = 0; i < n; ++i) {
        cx[i] = std::cos(theta_map[n - 1 - i]); // increasing
        cy[i] = w_s[n - 1 - i];
    }
    CubicSpline w_of_x(cx, cy);
    Eigen::VectorXd w_grid(n);
    for (int i = 0; i < n; ++i) w_grid[i] = w_of_x(std::cos(g.theta(i)));

    ConformalData cd = ConformalData::normalized(m.grid(), std::move(w_grid), r_o);
    return {std::move(theta_map), std::move(w_s), theta_b, std::move(cd)};
}

inline ConformalData conformal_representation(const AxisymMetric& m) {
    return uniformize(m).data;
}

} // namespace charex
