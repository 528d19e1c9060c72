#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "charex/grid.hpp"

namespace charex {

/// Axisymmetric metric q(theta)^2 dtheta^2 + p(theta)^2 dphi^2 on S^2.
/// Smooth closure at the poles requires p -> 0 with p' -> +-q there.
class AxisymMetric {
public:
    struct PoleData {
        double q_north, q_south;   // even limits of q
        double p_north, p_south;   // extrapolated p values (should vanish)
        double dp_north, dp_south; // limits of p'
    };

    AxisymMetric(GridPtr grid, Eigen::VectorXd q, Eigen::VectorXd p, double pole_tol = 1e-3)
        : grid_(std::move(grid)), q_(std::move(q)), p_(std::move(p)) {
        grid_->check_size(q_);
        grid_->check_size(p_);
        if ((q_.array() <= 0).any() || (p_.array() <= 0).any())
            throw ParameterError("AxisymMetric: q and p must be positive at interior nodes");

        const Eigen::VectorXd dp = grid_->derivative(p_, Parity::Odd);
        poles_.q_north = grid_->pole_limit_north(q_);
        poles_.q_south = grid_->pole_limit_south(q_);
        poles_.dp_north = grid_->pole_limit_north(dp);
        poles_.dp_south = grid_->pole_limit_south(dp);
        // generic (non-parity) linear extrapolation of p to the poles
        poles_.p_north = p_[0] - dp[0] * grid_->theta(0);
        poles_.p_south = p_[grid_->size() - 1] + dp[grid_->size() - 1] * (std::numbers::pi - grid_->theta(grid_->size() - 1));

        const double scale = poles_.q_north;
        if (std::abs(poles_.p_north) > pole_tol * scale || std::abs(poles_.p_south) > pole_tol * scale)
            throw PoleRegularityError("AxisymMetric: p does not vanish at the poles");
        if (std::abs(poles_.dp_north - poles_.q_north) > pole_tol * scale ||
            std::abs(poles_.dp_south + poles_.q_south) > pole_tol * scale)
            throw PoleRegularityError("AxisymMetric: |p'| != q at the poles (conical singularity)");
    }

    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& q() const { return q_; }
    const Eigen::VectorXd& p() const { return p_; }
    const PoleData& poles() const { return poles_; }

    static AxisymMetric round(const GridPtr& g, double radius) {
        Eigen::VectorXd q = Eigen::VectorXd::Constant(g->size(), radius);
        Eigen::VectorXd p(g->size());
        for (int i = 0; i < g->size(); ++i) p[i] = radius * std::sin(g->theta(i));
        return {g, std::move(q), std::move(p)};
    }

private:
    GridPtr grid_;
    Eigen::VectorXd q_, p_;
    PoleData poles_{};
};

/// Total area 2 pi int q p dtheta.
inline double area(const AxisymMetric& m) {
    return 2.0 * std::numbers::pi * m.grid()->quadrature(m.q().cwiseProduct(m.p()));
}

/// Gaussian curvature K = -(1/(q p)) d/dtheta (p'/q).
inline ScalarField gaussian_curvature(const AxisymMetric& m) {
    const PolarGrid& g = *m.grid();
    const Eigen::VectorXd dp = g.derivative(m.p(), Parity::Odd);
    const Eigen::VectorXd a = dp.cwiseQuotient(m.q()); // even
    const Eigen::VectorXd da = g.derivative(a, Parity::Even);
    Eigen::VectorXd k = -da.cwiseQuotient(m.q().cwiseProduct(m.p()));
    if (!k.allFinite()) throw PoleRegularityError("gaussian_curvature: non-finite values near poles");
    return {m.grid(), std::move(k)};
}

/// Laplace-Beltrami of an axisymmetric scalar: (1/(q p)) d/dtheta ((p/q) phi').
inline ScalarField laplace_beltrami(const AxisymMetric& m, const ScalarField& phi) {
    require_same_grid(m.grid(), phi.grid);
    const PolarGrid& g = *m.grid();
    const Eigen::VectorXd dphi = g.derivative(phi.values, Parity::Even); // odd
    const Eigen::VectorXd flux = m.p().cwiseQuotient(m.q()).cwiseProduct(dphi); // even
    const Eigen::VectorXd div = g.derivative(flux, Parity::Even); // odd
    return {m.grid(), div.cwiseQuotient(m.q().cwiseProduct(m.p()))};
}

/// Charge flux (1/4pi) int E_normal dA through the slice.
inline double charge_flux(const AxisymMetric& m, const ScalarField& e_normal) {
    require_same_grid(m.grid(), e_normal.grid);
    const Eigen::VectorXd integrand = m.q().cwiseProduct(m.p()).cwiseProduct(e_normal.values);
    return 0.5 * m.grid()->quadrature(integrand);
}

/// Rayleigh quotient of -Delta_g + K(g) at phi, with the same discrete
/// gradient and quadrature the eigen assembly uses.
inline double rayleigh_quotient(const AxisymMetric& m, const ScalarField& phi) {
    require_same_grid(m.grid(), phi.grid);
    const PolarGrid& g = *m.grid();
    const Eigen::VectorXd dphi = g.derivative(phi.values, Parity::Even);
    const Eigen::VectorXd k = gaussian_curvature(m).values;
    const Eigen::VectorXd qp = m.q().cwiseProduct(m.p());
    const Eigen::VectorXd num = m.p().cwiseQuotient(m.q()).cwiseProduct(dphi.cwiseAbs2()) +
                                k.cwiseProduct(qp).cwiseProduct(phi.values.cwiseAbs2());
    const Eigen::VectorXd den = qp.cwiseProduct(phi.values.cwiseAbs2());
    return g.quadrature(num) / g.quadrature(den);
}

/// Area-radius normalized conformal representation g = e^{2w} r_o^2 g_*.
class ConformalData {
public:
    ConformalData(GridPtr grid, Eigen::VectorXd w, double r_o, double area_tol = 1e-8)
        : grid_(std::move(grid)), w_(std::move(w)), r_o_(r_o) {
        grid_->check_size(w_);
        if (r_o <= 0) throw ParameterError("ConformalData: r_o must be positive");
        // area by direct quadrature: 2 pi r_o^2 int e^{2w} sin(theta) dtheta.
        // (induced_metric() may legitimately fail pole-regularity for data
        // representing metrics with conical defects; the area is still finite.)
        Eigen::VectorXd integrand(grid_->size());
        for (int i = 0; i < grid_->size(); ++i)
            integrand[i] = std::exp(2.0 * w_[i]) * std::sin(grid_->theta(i));
        const double a = 2.0 * std::numbers::pi * r_o_ * r_o_ * grid_->quadrature(integrand);
        if (!std::isfinite(a) || std::abs(a - 4.0 * std::numbers::pi * r_o_ * r_o_) > area_tol * a)
            throw ParameterError("ConformalData: w is not area-radius normalized");
    }

    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& w() const { return w_; }
    double r_o() const { return r_o_; }

    AxisymMetric induced_metric() const {
        const int n = grid_->size();
        Eigen::VectorXd q(n), p(n);
        for (int i = 0; i < n; ++i) {
            const double c = std::exp(w_[i]) * r_o_;
            q[i] = c;
            p[i] = c * std::sin(grid_->theta(i));
        }
        return {grid_, std::move(q), std::move(p)};
    }

    /// Shift w by a constant so the induced area is exactly 4 pi r_o^2.
    static ConformalData normalized(GridPtr grid, Eigen::VectorXd w, double r_o) {
        Eigen::VectorXd e2w(grid->size());
        Eigen::VectorXd sin_t(grid->size());
        for (int i = 0; i < grid->size(); ++i) {
            e2w[i] = std::exp(2.0 * w[i]);
            sin_t[i] = std::sin(grid->theta(i));
        }
        const double mean = 0.5 * grid->quadrature(e2w.cwiseProduct(sin_t));
        w.array() -= 0.5 * std::log(mean);
        return {std::move(grid), std::move(w), r_o};
    }

private:
    GridPtr grid_;
    Eigen::VectorXd w_;
    double r_o_;
};

} // namespace charex
