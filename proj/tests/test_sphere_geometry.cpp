#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "charex/axisym.hpp"
#include "charex/conformal.hpp"
#include "charex/eigenpair.hpp"

using namespace charex;

namespace {

constexpr double kPi = std::numbers::pi;

AxisymMetric conformal_metric(const GridPtr& g, double r_o,
                              const std::function<double(double)>& w) {
    Eigen::VectorXd q(g->size()), p(g->size());
    for (int i = 0; i < g->size(); ++i) {
        const double t = g->theta(i);
        const double c = std::exp(w(t)) * r_o;
        q[i] = c;
        p[i] = c * std::sin(t);
    }
    return {g, std::move(q), std::move(p)};
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("grid: nodes, weights and differentiation order") {
    auto g = make_grid(129);
    for (int i = 1; i < g->size(); ++i) REQUIRE(g->theta(i) > g->theta(i - 1));
    for (int i = 0; i < g->size(); ++i)
        REQUIRE(g->theta(i) + g->theta(g->size() - 1 - i) == Catch::Approx(kPi).epsilon(1e-14));

    Eigen::VectorXd sin_t(g->size());
    for (int i = 0; i < g->size(); ++i) sin_t[i] = std::sin(g->theta(i));
    REQUIRE(std::abs(g->quadrature(sin_t) - 2.0) < 1e-10);

    // derivative of cos(theta) reproduces -sin(theta) at the advertised order
    double prev_err = 0.0;
    int n_prev = 0;
    for (int n : {33, 66, 132}) {
        auto gg = make_grid(n);
        Eigen::VectorXd f(n), target(n);
        for (int i = 0; i < n; ++i) {
            f[i] = std::cos(gg->theta(i));
            target[i] = -std::sin(gg->theta(i));
        }
        const double err = max_abs(gg->derivative(f, Parity::Even) - target);
        if (n_prev != 0 && prev_err > 1e-12) {
            const double rate = std::log2(prev_err / err) / std::log2(double(n) / n_prev);
            REQUIRE(rate > 2.0); // p >= 2 required; scheme is 6th order
        }
        prev_err = err;
        n_prev = n;
    }
}

TEST_CASE("gaussian_curvature: closed forms and conformal identity") {
    auto g = make_grid(129);
    SECTION("round sphere radius 2") {
        const auto k = gaussian_curvature(AxisymMetric::round(g, 2.0));
        REQUIRE(max_abs(k.values.array() - 0.25) < 1e-10);
    }
    SECTION("constant conformal rescaling") {
        const auto m = conformal_metric(g, 1.0, [](double) { return 0.1; });
        const auto k = gaussian_curvature(m);
        REQUIRE(max_abs(k.values.array() - std::exp(-0.2)) < 1e-10);
    }
    SECTION("w = 0.2 cos 2theta against conformal curvature identity") {
        const auto m = conformal_metric(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); });
        const auto k = gaussian_curvature(m);
        for (int i = 0; i < g->size(); ++i) {
            const double t = g->theta(i);
            const double w = 0.2 * std::cos(2 * t);
            const double lap_w = -0.8 * std::cos(2 * t) - 0.8 * std::cos(t) * std::cos(t);
            const double oracle = std::exp(-2.0 * w) * (1.0 - lap_w);
            REQUIRE(std::abs(k.values[i] - oracle) < 1e-6);
        }
    }
}

TEST_CASE("laplace_beltrami: closed forms and conformal identity") {
    auto g = make_grid(129);
    SECTION("constants are harmonic") {
        const auto m = conformal_metric(g, 1.3, [](double t) { return 0.1 * std::cos(t); });
        const auto lap = laplace_beltrami(m, ScalarField::constant(g, 5.0));
        REQUIRE(max_abs(lap.values) < 1e-9);
    }
    SECTION("first spherical harmonic") {
        const auto m = AxisymMetric::round(g, 1.0);
        const auto phi = ScalarField::sample(g, [](double t) { return std::cos(t); });
        const auto lap = laplace_beltrami(m, phi);
        for (int i = 0; i < g->size(); ++i)
            REQUIRE(std::abs(lap.values[i] + 2.0 * std::cos(g->theta(i))) < 1e-9);
    }
    SECTION("conformal Laplacian identity") {
        const auto m = conformal_metric(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); });
        const auto phi = ScalarField::sample(g, [](double t) { return std::cos(t); });
        const auto lap = laplace_beltrami(m, phi);
        for (int i = 0; i < g->size(); ++i) {
            const double t = g->theta(i);
            const double oracle = std::exp(-0.4 * std::cos(2 * t)) * (-2.0 * std::cos(t));
            REQUIRE(std::abs(lap.values[i] - oracle) < 1e-6);
        }
    }
    SECTION("grid mismatch raises") {
        const auto m = AxisymMetric::round(g, 1.0);
        auto g2 = make_grid(65);
        REQUIRE_THROWS_AS(laplace_beltrami(m, ScalarField::constant(g2, 1.0)), GridMismatchError);
    }
}

TEST_CASE("area: closed forms and normalization") {
    auto g = make_grid(129);
    REQUIRE(area(AxisymMetric::round(g, 1.0)) == Catch::Approx(4 * kPi).margin(1e-12));
    REQUIRE(area(AxisymMetric::round(g, 3.0)) == Catch::Approx(36 * kPi).margin(1e-10));

    Eigen::VectorXd w(g->size());
    for (int i = 0; i < g->size(); ++i) w[i] = 0.2 * std::cos(2 * g->theta(i));
    const auto cd = ConformalData::normalized(g, w, 1.0);
    REQUIRE(std::abs(area(cd.induced_metric()) - 4 * kPi) < 1e-8);
}

TEST_CASE("charge_flux: quadrature of the normal electric component") {
    auto g = make_grid(129);
    SECTION("zero field") {
        const auto m = AxisymMetric::round(g, 2.0);
        REQUIRE(charge_flux(m, ScalarField::constant(g, 0.0)) == 0.0);
    }
    SECTION("round slice of radius r carries Q for E = Q/r^2") {
        for (double r : {0.7, 1.0, 2.5}) {
            const auto m = AxisymMetric::round(g, r);
            const double q = charge_flux(m, ScalarField::constant(g, 0.8 / (r * r)));
            REQUIRE(q == Catch::Approx(0.8).margin(1e-12));
        }
    }
    SECTION("horizon slice of RN m=1, Q=0.6") {
        const double r_plus = 1.0 + std::sqrt(1.0 - 0.36); // u(0) = 1.8
        REQUIRE(r_plus == Catch::Approx(1.8));
        const auto m = AxisymMetric::round(g, r_plus);
        const double q = charge_flux(m, ScalarField::constant(g, 0.6 / (r_plus * r_plus)));
        REQUIRE(q == Catch::Approx(0.6).margin(1e-9));
    }
}

TEST_CASE("first_eigenpair: round closed forms") {
    auto g = make_grid(129);
    for (double r : {1.0, 2.0}) {
        const auto [lambda, u] = first_eigenpair(AxisymMetric::round(g, r));
        REQUIRE(std::abs(lambda - 1.0 / (r * r)) < 1e-9);
        const double u_exact = 1.0 / std::sqrt(4.0 * kPi * r * r);
        REQUIRE(max_abs(u.values.array() - u_exact) < 1e-9);
    }
}

TEST_CASE("first_eigenpair: dense refined-grid oracle") {
    auto g = make_grid(129);
    Eigen::VectorXd w(g->size());
    for (int i = 0; i < g->size(); ++i) w[i] = 0.3 * std::cos(g->theta(i));
    const auto cd = ConformalData::normalized(g, w, 1.0);
    const auto [lambda, u] = first_eigenpair(cd.induced_metric());

    auto g4 = make_grid(4 * 129);
    Eigen::VectorXd w4(g4->size());
    for (int i = 0; i < g4->size(); ++i) w4[i] = 0.3 * std::cos(g4->theta(i));
    const auto cd4 = ConformalData::normalized(g4, w4, 1.0);
    const auto [a4, b4] = detail::assemble_eigen_problem(cd4.induced_metric());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        a4, Eigen::MatrixXd(b4.asDiagonal()));
    REQUIRE(es.info() == Eigen::Success);
    const double lambda_oracle = es.eigenvalues()[0];
    REQUIRE(std::abs(lambda - lambda_oracle) < 1e-6);

    // normalization of u
    const auto m = cd.induced_metric();
    const Eigen::VectorXd qp = m.q().cwiseProduct(m.p());
    const double l2 = 2 * kPi * g->quadrature(qp.cwiseProduct(u.values.cwiseAbs2()));
    REQUIRE(std::abs(l2 - 1.0) < 1e-9);
}

TEST_CASE("rayleigh consistency: eigenpair attains the infimum") {
    auto g = make_grid(129);
    Eigen::VectorXd w(g->size());
    for (int i = 0; i < g->size(); ++i) w[i] = 0.2 * std::cos(2 * g->theta(i));
    const auto m = ConformalData::normalized(g, w, 1.0).induced_metric();
    const auto [lambda, u] = first_eigenpair(m);
    REQUIRE(std::abs(rayleigh_quotient(m, u) - lambda) < 1e-8);

    std::mt19937 rng(20260823);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        double a1 = coef(rng), a2 = coef(rng), a3 = coef(rng), a4 = coef(rng);
        const auto phi = ScalarField::sample(g, [&](double t) {
            return 1.0 + a1 * std::cos(t) + a2 * std::cos(2 * t) + a3 * std::cos(3 * t) +
                   a4 * std::cos(4 * t);
        });
        REQUIRE(rayleigh_quotient(m, phi) >= lambda - 1e-8);
    }
}

TEST_CASE("gauss-bonnet holds for valid metrics") {
    auto g = make_grid(193);
    const auto check = [&](const AxisymMetric& m) {
        const auto k = gaussian_curvature(m);
        const Eigen::VectorXd integrand = k.values.cwiseProduct(m.q().cwiseProduct(m.p()));
        const double total = 2 * kPi * g->quadrature(integrand);
        REQUIRE(std::abs(total - 4 * kPi) < 1e-8);
    };
    check(AxisymMetric::round(g, 1.7));
    check(conformal_metric(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); }));
    check(conformal_metric(g, 0.8, [](double t) { return 0.3 * std::cos(t); }));
}

TEST_CASE("spectral invariants are reparametrization invariant") {
    auto g = make_grid(193);
    auto wfun = [](double t) { return 0.2 * std::cos(2 * t); };
    const auto m = conformal_metric(g, 1.0, wfun);

    // same geometry, nodes pushed through theta -> chi(theta)
    auto chi = [](double t) { return t + 0.15 * std::sin(2 * t); };
    auto dchi = [](double t) { return 1.0 + 0.3 * std::cos(2 * t); };
    Eigen::VectorXd q(g->size()), p(g->size());
    for (int i = 0; i < g->size(); ++i) {
        const double t = g->theta(i), c = chi(t);
        q[i] = std::exp(wfun(c)) * dchi(t);
        p[i] = std::exp(wfun(c)) * std::sin(c);
    }
    const AxisymMetric m2{g, std::move(q), std::move(p)};

    REQUIRE(std::abs(area(m) - area(m2)) < 1e-6);
    const auto e1 = first_eigenpair(m);
    const auto e2 = first_eigenpair(m2);
    REQUIRE(std::abs(e1.lambda - e2.lambda) < 1e-6);
}

TEST_CASE("convergence: curvature and laplacian follow the scheme order") {
    auto exact_k = [](double t) {
        const double w = 0.2 * std::cos(2 * t);
        const double lap_w = -0.8 * std::cos(2 * t) - 0.8 * std::cos(t) * std::cos(t);
        return std::exp(-2.0 * w) * (1.0 - lap_w);
    };
    double prev = 0.0;
    int n_prev = 0;
    for (int n : {33, 66, 132}) {
        auto g = make_grid(n);
        const auto m = conformal_metric(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); });
        const auto k = gaussian_curvature(m);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(k.values[i] - exact_k(g->theta(i))));
        if (n_prev != 0 && prev > 1e-11) {
            const double rate = std::log2(prev / err) / std::log2(double(n) / n_prev);
            REQUIRE(rate > 2.0);
        }
        prev = err;
        n_prev = n;
    }
}

TEST_CASE("conformal_representation: identity and round trips") {
    auto g = make_grid(257);
    SECTION("round sphere gives w = 0, r_o = rho") {
        const auto cd = conformal_representation(AxisymMetric::round(g, 1.6));
        REQUIRE(cd.r_o() == Catch::Approx(1.6).margin(1e-10));
        REQUIRE(max_abs(cd.w()) < 1e-8);
    }
    SECTION("recovers an equator-symmetric conformal factor") {
        const auto m = conformal_metric(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); });
        const auto cd = conformal_representation(m);
        REQUIRE(cd.r_o() == Catch::Approx(std::sqrt(area(m) / (4 * kPi))).margin(1e-10));
        for (int i = 0; i < g->size(); ++i) {
            const double target = 0.2 * std::cos(2 * g->theta(i)) + std::log(1.0 / cd.r_o());
            REQUIRE(std::abs(cd.w()[i] - target) < 1e-5);
        }
    }
    SECTION("oblate metric round-trip pullback") {
        Eigen::VectorXd q = Eigen::VectorXd::Ones(g->size()), p(g->size());
        for (int i = 0; i < g->size(); ++i) {
            const double t = g->theta(i);
            p[i] = (1.0 - 0.1 * std::cos(t) * std::cos(t)) * std::sin(t);
        }
        // cone-angle defect at the poles: relax the regularity gate
        const AxisymMetric m{g, q, p, 0.2};
        const auto chart = uniformize(m);
        const double r_o = chart.data.r_o();

        // pullback of e^{2w} r_o^2 g_* through the chart;
        // Theta' evaluated from the Mercator graph ell(xi), smooth up to the poles
        std::vector<double> xi(g->size()), ell(g->size());
        for (int i = 0; i < g->size(); ++i) {
            xi[i] = std::log(std::tan(0.5 * g->theta(i)));
            ell[i] = std::log(std::tan(0.5 * chart.theta_map[i]));
        }
        // Local Lagrange derivative on the non-uniform xi nodes; near the poles
        // switch to the variable s = tan^2(theta/2), in which ell minus its
        // logarithmic part is analytic even for cone angles != 2 pi.
        Eigen::VectorXd rho_field(g->size());
        for (int i = 0; i < g->size(); ++i)
            rho_field[i] = q[i] * std::sin(g->theta(i)) / p[i];
        const double rho_n = g->pole_limit_north(rho_field);
        const double rho_s = g->pole_limit_south(rho_field);
        auto lagr_deriv = [](const std::vector<double>& x, const std::vector<double>& y, int j0,
                             int np, double xe) {
            double acc = 0.0;
            for (int a = j0; a < j0 + np; ++a) {
                double term = 0.0;
                for (int b = j0; b < j0 + np; ++b) {
                    if (b == a) continue;
                    double prod = 1.0;
                    for (int c = j0; c < j0 + np; ++c) {
                        if (c == a || c == b) continue;
                        prod *= (xe - x[c]) / (x[a] - x[c]);
                    }
                    term += prod / (x[a] - x[b]);
                }
                acc += y[a] * term;
            }
            return acc;
        };
        const int n = g->size();
        auto dell = [&](int i) {
            if (i < 3) {
                std::vector<double> s(n), eta(n);
                for (int j = 0; j < 8; ++j) {
                    const double tt = std::tan(0.5 * g->theta(j));
                    s[j] = tt * tt;
                    eta[j] = ell[j] - 0.5 * rho_n * std::log(s[j]);
                }
                return rho_n + 2.0 * s[i] * lagr_deriv(s, eta, 0, 6, s[i]);
            }
            if (i > n - 4) {
                std::vector<double> s(n), eta(n);
                for (int j = n - 8; j < n; ++j) {
                    const double tt = std::tan(0.5 * (kPi - g->theta(j)));
                    s[j] = tt * tt;
                    eta[j] = ell[j] + 0.5 * rho_s * std::log(s[j]);
                }
                return rho_s - 2.0 * s[i] * lagr_deriv(s, eta, n - 8, 6, s[i]);
            }
            return lagr_deriv(xi, ell, i - 2, 5, xi[i]);
        };
        for (int i = 0; i < g->size(); ++i) {
            const double t = g->theta(i);
            const double theta_round = chart.theta_map[i];
            const double dtheta = dell(i) * std::sin(theta_round) / std::sin(t);
            const double qb = std::exp(chart.w_samples[i]) * r_o * dtheta;
            const double pb = std::exp(chart.w_samples[i]) * r_o * std::sin(theta_round);
            REQUIRE(std::abs(qb - q[i]) < 1e-5);
            REQUIRE(std::abs(pb - p[i]) < 1e-5);
        }
    }
    SECTION("cone defect rejected at default tolerance") {
        Eigen::VectorXd q = Eigen::VectorXd::Ones(g->size()), p(g->size());
        for (int i = 0; i < g->size(); ++i) {
            const double t = g->theta(i);
            p[i] = (1.0 - 0.1 * std::cos(t) * std::cos(t)) * std::sin(t);
        }
        REQUIRE_THROWS_AS((AxisymMetric{g, q, p}), PoleRegularityError);
    }
}
