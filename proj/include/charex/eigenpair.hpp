#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "charex/axisym.hpp"

namespace charex {

struct EigenPair {
    double lambda;  // first eigenvalue of -Delta_g + K(g)
    ScalarField u;  // positive eigenfunction, int u^2 dA = 1
};

namespace detail {

/// Symmetric weak-form matrices of the pencil (A, B) for -Delta_g + K(g):
///   A = D^T diag(w p/q) D + diag(w K q p),   B = diag(w q p).
struct EigenAssembly {
    Eigen::MatrixXd a;
    Eigen::VectorXd b_diag;
};

inline EigenAssembly assemble_eigen_problem(const AxisymMetric& m) {
    const PolarGrid& g = *m.grid();
    const Eigen::MatrixXd d = g.derivative_matrix(Parity::Even);
    const Eigen::VectorXd qp = m.q().cwiseProduct(m.p());
    const Eigen::VectorXd k = gaussian_curvature(m).values;
    const Eigen::VectorXd wa = g.weights().cwiseProduct(m.p().cwiseQuotient(m.q()));
    EigenAssembly out;
    out.a = d.transpose() * wa.asDiagonal() * d;
    out.a += Eigen::MatrixXd(g.weights().cwiseProduct(k).cwiseProduct(qp).asDiagonal());
    out.b_diag = g.weights().cwiseProduct(qp);
    return out;
}

} // namespace detail

/// First eigenpair of -Delta_g + K(g), via shifted inverse iteration with a
/// deterministic positive start vector and Rayleigh-quotient polish.
inline EigenPair first_eigenpair(const AxisymMetric& m) {
    const PolarGrid& g = *m.grid();
    const int n = g.size();
    auto [a, b_diag] = detail::assemble_eigen_problem(m);

    auto rq = [&](const Eigen::VectorXd& x) {
        return x.dot(a * x) / x.dot(b_diag.cwiseProduct(x));
    };

    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    x /= std::sqrt(x.dot(b_diag.cwiseProduct(x)));
    double lambda = rq(x);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw EigenSolveError("first_eigenpair: LDLT factorization failed");

    bool converged = false;
    for (int it = 0; it < 200 && !converged; ++it) {
        Eigen::VectorXd y = ldlt.solve(b_diag.cwiseProduct(x));
        y /= std::sqrt(y.dot(b_diag.cwiseProduct(y)));
        const double next = rq(y);
        if (std::abs(next - lambda) <= 1e-13 * (1.0 + std::abs(next))) converged = true;
        lambda = next;
        x = y;
    }

    // Rayleigh-quotient iteration sharpens the pair to machine precision.
    for (int it = 0; it < 8; ++it) {
        Eigen::MatrixXd shifted = a;
        shifted -= Eigen::MatrixXd((lambda * b_diag).asDiagonal());
        Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
        if (!lu.isInvertible()) { converged = true; break; }
        Eigen::VectorXd y = lu.solve(b_diag.cwiseProduct(x));
        const double norm = std::sqrt(y.dot(b_diag.cwiseProduct(y)));
        if (!std::isfinite(norm) || norm == 0.0) { converged = true; break; }
        y /= norm;
        const double next = rq(y);
        const bool done = std::abs(next - lambda) <= 1e-15 * (1.0 + std::abs(next));
        lambda = next;
        x = y;
        if (done) { converged = true; break; }
    }
    if (!converged)
        throw EigenSolveError("first_eigenpair: inverse iteration did not converge");

    if (x.sum() < 0) x = -x;
    if ((x.array() <= 0).any())
        throw SimplicityViolationError(
            "first_eigenpair: computed eigenfunction is not positive (resolution too coarse?)");

    // L^2(dA) normalization: int u^2 dA = 2 pi x^T B x.
    x /= std::sqrt(2.0 * std::numbers::pi * x.dot(b_diag.cwiseProduct(x)));
    return {lambda, ScalarField{m.grid(), std::move(x)}};
}

} // namespace charex
