#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>

#include "charex/errors.hpp"

namespace charex {

/// Parity of a colatitude field under reflection across the poles.
/// Smooth axisymmetric scalars on the sphere extend evenly (f(-theta) = f(theta));
/// fields vanishing at the poles like p ~ sin(theta) extend oddly.
enum class Parity { Even, Odd };

/// Colatitude grid on (0, pi): uniform nodes with half-step pole offset,
/// theta_i = (i + 1/2) pi / N.  Functions with even/odd pole extensions are
/// periodic on the doubled interval, so central stencils fold cleanly across
/// the poles and the sine-basis quadrature below is exact through mode N.
class PolarGrid {
public:
    explicit PolarGrid(int n_theta) : n_(n_theta) {
        if (n_theta < 33)
            throw ParameterError("PolarGrid: N_theta must be >= 33, got " + std::to_string(n_theta));
        const double pi = std::numbers::pi;
        h_ = pi / n_;
        theta_.resize(n_);
        for (int i = 0; i < n_; ++i) theta_[i] = (i + 0.5) * h_;

        // Quadrature weights exact on sin(k theta), k = 1..N:
        //   w_i = sum_k c_k sin(k theta_i),  c_k from discrete sine orthogonality,
        // with integrals  int_0^pi sin(k theta) dtheta = 2/k (k odd), 0 (k even).
        w_ = Eigen::VectorXd::Zero(n_);
        for (int k = 1; k <= n_; ++k) {
            if (k % 2 == 0) continue;
            const double integral = 2.0 / k;
            const double ck = (k < n_) ? (2.0 / n_) * integral : (1.0 / n_) * integral;
            for (int i = 0; i < n_; ++i) w_[i] += ck * std::sin(k * theta_[i]);
        }
    }

    int size() const { return n_; }
    double h() const { return h_; }
    double theta(int i) const { return theta_[i]; }
    const Eigen::VectorXd& nodes() const { return theta_; }
    const Eigen::VectorXd& weights() const { return w_; }

    /// Formal order of the differentiation scheme (7-point central).
    static constexpr int scheme_order = 6;

    double quadrature(const Eigen::VectorXd& f) const {
        check_size(f);
        return w_.dot(f);
    }

    /// d/dtheta with parity ghost folding across both poles.
    Eigen::VectorXd derivative(const Eigen::VectorXd& f, Parity parity) const {
        check_size(f);
        static constexpr double c[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
        const double sign = (parity == Parity::Even) ? 1.0 : -1.0;
        Eigen::VectorXd out(n_);
        for (int i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (int k = -3; k <= 3; ++k) {
                int j = i + k;
                double s = 1.0;
                if (j < 0) { j = -1 - j; s = sign; }
                else if (j >= n_) { j = 2 * n_ - 1 - j; s = sign; }
                acc += c[k + 3] * s * f[j];
            }
            out[i] = acc / h_;
        }
        return out;
    }

    /// Dense matrix of derivative(., parity); used by the eigen assembly.
    Eigen::MatrixXd derivative_matrix(Parity parity) const {
        static constexpr double c[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
        const double sign = (parity == Parity::Even) ? 1.0 : -1.0;
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
        for (int i = 0; i < n_; ++i) {
            for (int k = -3; k <= 3; ++k) {
                int j = i + k;
                double s = 1.0;
                if (j < 0) { j = -1 - j; s = sign; }
                else if (j >= n_) { j = 2 * n_ - 1 - j; s = sign; }
                d(i, j) += c[k + 3] * s / h_;
            }
        }
        return d;
    }

    /// One-sided quadratic-in-theta^2 extrapolation of an even field to theta = 0.
    double pole_limit_north(const Eigen::VectorXd& f) const {
        check_size(f);
        return extrapolate_even(theta_[0], theta_[1], theta_[2], f[0], f[1], f[2]);
    }
    /// Same at theta = pi (distance from the pole is pi - theta).
    double pole_limit_south(const Eigen::VectorXd& f) const {
        check_size(f);
        const double pi = std::numbers::pi;
        return extrapolate_even(pi - theta_[n_ - 1], pi - theta_[n_ - 2], pi - theta_[n_ - 3],
                                f[n_ - 1], f[n_ - 2], f[n_ - 3]);
    }

    bool compatible(const PolarGrid& other) const { return n_ == other.n_; }

    void check_size(const Eigen::VectorXd& f) const {
        if (f.size() != n_)
            throw GridMismatchError("field size " + std::to_string(f.size()) +
                                    " does not match grid size " + std::to_string(n_));
    }

private:
    static double extrapolate_even(double t0, double t1, double t2, double f0, double f1, double f2) {
        // Lagrange in x = t^2 evaluated at x = 0.
        const double x0 = t0 * t0, x1 = t1 * t1, x2 = t2 * t2;
        return f0 * (x1 * x2) / ((x0 - x1) * (x0 - x2)) +
               f1 * (x0 * x2) / ((x1 - x0) * (x1 - x2)) +
               f2 * (x0 * x1) / ((x2 - x0) * (x2 - x1));
    }

    int n_;
    double h_;
    Eigen::VectorXd theta_;
    Eigen::VectorXd w_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

inline GridPtr make_grid(int n_theta) { return std::make_shared<const PolarGrid>(n_theta); }

/// Scalar samples on a PolarGrid.
struct ScalarField {
    GridPtr grid;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
        grid->check_size(values);
        if (!values.allFinite()) throw PoleRegularityError("ScalarField: non-finite values");
    }

    static ScalarField constant(const GridPtr& g, double c) {
        return {g, Eigen::VectorXd::Constant(g->size(), c)};
    }

    template <typename F>
    static ScalarField sample(const GridPtr& g, F&& fn) {
        Eigen::VectorXd v(g->size());
        for (int i = 0; i < g->size(); ++i) v[i] = fn(g->theta(i));
        return {g, std::move(v)};
    }
};

inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (!a || !b || !a->compatible(*b))
        throw GridMismatchError("operands live on different grids");
}

} // namespace charex
