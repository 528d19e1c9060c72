#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "charex/metric_path.hpp"

using namespace charex;

namespace {

constexpr double kPi = std::numbers::pi;

ConformalData make_cd(const GridPtr& g, double r_o, const std::function<double(double)>& w) {
    Eigen::VectorXd wv(g->size());
    for (int i = 0; i < g->size(); ++i) wv[i] = w(g->theta(i));
    return ConformalData::normalized(g, std::move(wv), r_o);
}

double dense_lambda(const AxisymMetric& m) {
    const auto [a, b] = detail::assemble_eigen_problem(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::MatrixXd(b.asDiagonal()));
    REQUIRE(es.info() == Eigen::Success);
    return es.eigenvalues()[0];
}

} // namespace

TEST_CASE("conformal_path: endpoints and direct formula") {
    auto g = make_grid(65);
    SECTION("w = 0 gives a constant round path") {
        const auto cd = make_cd(g, 1.3, [](double) { return 0.0; });
        const auto path = conformal_path(cd, 17);
        REQUIRE(path.metrics.size() == 17);
        for (const auto& m : path.metrics) {
            REQUIRE((m.q().array() - 1.3).abs().maxCoeff() < 1e-12);
            for (int i = 0; i < g->size(); ++i)
                REQUIRE(m.p()[i] == Catch::Approx(1.3 * std::sin(g->theta(i))).margin(1e-12));
        }
    }
    SECTION("t = 0.5 slice matches the closed formula") {
        auto w0 = [](double t) { return 0.2 * std::cos(2 * t); };
        const auto cd = make_cd(g, 1.0, w0);
        const auto path = conformal_path(cd, 17);
        const auto& m = path.metrics[8]; // t = 0.5
        REQUIRE(path.t[8] == Catch::Approx(0.5));
        for (int i = 0; i < g->size(); ++i)
            REQUIRE(m.q()[i] == Catch::Approx(std::exp(0.5 * cd.w()[i]) * cd.r_o()).margin(1e-13));
    }
    SECTION("t = 1 slice is exactly round") {
        const auto cd = make_cd(g, 1.0, [](double t) { return 0.2 * std::cos(2 * t); });
        const auto path = conformal_path(cd, 17);
        REQUIRE((path.metrics.back().q().array() - cd.r_o()).abs().maxCoeff() == 0.0);
    }
    SECTION("too few nodes rejected") {
        const auto cd = make_cd(g, 1.0, [](double) { return 0.0; });
        REQUIRE_THROWS_AS(conformal_path(cd, 16), ParameterError);
    }
}

TEST_CASE("verify_path_lambda: round closed forms and dense oracle") {
    auto g = make_grid(65);
    SECTION("round constant path") {
        const auto cd = make_cd(g, 1.0, [](double) { return 0.0; });
        const auto path = conformal_path(cd, 17);
        const auto v1 = verify_path_lambda(path, 0.5);
        REQUIRE(v1.ok);
        REQUIRE(v1.margin == Catch::Approx(0.5).margin(1e-9));
        const auto v2 = verify_path_lambda(path, 1.0);
        REQUIRE_FALSE(v2.ok); // infimum not strictly exceeded
    }
    SECTION("w = 0.3 cos theta path against refined dense oracle") {
        auto w0 = [](double t) { return 0.3 * std::cos(t); };
        const auto cd = make_cd(g, 1.0, w0);
        const auto path = conformal_path(cd, 17);
        const double kappa_target = 0.25; // Q^2/r_o^4 with Q = 0.5, r_o = 1
        const auto v = verify_path_lambda(path, kappa_target);
        for (int k = 0; k < 17; k += 4) {
            // same metric family, note cd.w absorbs the normalization shift
            const double c = 1.0 - path.t[k];
            auto g4 = make_grid(4 * 65);
            // resample cd.w on the refined grid through its defining formula:
            // cd.w = 0.3 cos theta + const
            const double shift = cd.w()[0] - w0(g->theta(0));
            Eigen::VectorXd q4(g4->size()), p4(g4->size());
            for (int i = 0; i < g4->size(); ++i) {
                const double conf = std::exp(c * (w0(g4->theta(i)) + shift)) * cd.r_o();
                q4[i] = conf;
                p4[i] = conf * std::sin(g4->theta(i));
            }
            const double lam4 = dense_lambda(AxisymMetric{g4, std::move(q4), std::move(p4)});
            REQUIRE(std::abs(v.lambda[k] - lam4) < 1e-6);
            REQUIRE((v.lambda[k] > kappa_target) == (lam4 > kappa_target));
        }
        REQUIRE(v.ok);
    }
}

TEST_CASE("normalize_path: conditions (i)-(iii) and anchoring") {
    auto g = make_grid(97);
    auto w0 = [](double t) { return 0.2 * std::cos(2 * t); };
    const auto cd = make_cd(g, 1.0, w0);
    const auto raw = conformal_path(cd, 97);
    const auto path = normalize_path(raw);
    const int n_t = static_cast<int>(path.t.size());
    const auto g0 = cd.induced_metric();

    SECTION("t = 0 metric equals the input node-wise; Theta_0 = identity") {
        REQUIRE((path.metrics[0].q() - g0.q()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((path.metrics[0].p() - g0.p()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((path.theta_maps[0] - g->nodes()).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("discrete area form identical across t") {
        const Eigen::VectorXd base = g0.q().cwiseProduct(g0.p());
        for (const auto& m : path.metrics)
            REQUIRE((m.q().cwiseProduct(m.p()) - base).cwiseAbs().maxCoeff() < 1e-12);
        for (const auto& m : path.metrics)
            REQUIRE(std::abs(area(m) - 4 * kPi * path.r_o * path.r_o) < 1e-8);
    }
    SECTION("path frozen past theta_cut") {
        for (int k = 0; k < n_t; ++k) {
            if (path.t[k] < path.theta_cut) continue;
            REQUIRE((path.metrics[k].q() - path.metrics[n_t - 1].q()).cwiseAbs().maxCoeff() == 0.0);
            REQUIRE((path.metrics[k].p() - path.metrics[n_t - 1].p()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SECTION("final metric is round of radius r_o") {
        const auto rep = conformal_representation(path.metrics[n_t - 1]);
        REQUIRE(rep.r_o() == Catch::Approx(path.r_o).margin(1e-8));
        REQUIRE(rep.w().cwiseAbs().maxCoeff() < 1e-6);
    }
    SECTION("velocity is trace-free within O(dt^2) + 1e-6") {
        auto max_trace_resid = [&](const MetricPath& pth) {
            const int nt = static_cast<int>(pth.t.size());
            double mx = 0.0;
            for (int k = 1; k + 1 < nt; ++k) {
                const double dt = pth.t[k + 1] - pth.t[k - 1];
                for (int i = 0; i < g->size(); ++i) {
                    const double q2 = pth.metrics[k].q()[i] * pth.metrics[k].q()[i];
                    const double p2 = pth.metrics[k].p()[i] * pth.metrics[k].p()[i];
                    const double dq2 = (pth.metrics[k + 1].q()[i] * pth.metrics[k + 1].q()[i] -
                                        pth.metrics[k - 1].q()[i] * pth.metrics[k - 1].q()[i]) / dt;
                    const double dp2 = (pth.metrics[k + 1].p()[i] * pth.metrics[k + 1].p()[i] -
                                        pth.metrics[k - 1].p()[i] * pth.metrics[k - 1].p()[i]) / dt;
                    mx = std::max(mx, std::abs(dq2 / q2 + dp2 / p2));
                }
            }
            return mx;
        };
        const double dt_fine = path.t[1] - path.t[0];
        const double resid_fine = max_trace_resid(path);
        REQUIRE(resid_fine < 5.0 * dt_fine * dt_fine + 1e-6);
        // second-order decay as the t-grid refines (same construction at N_t = 49)
        const auto coarse = normalize_path(conformal_path(cd, 49));
        const double resid_coarse = max_trace_resid(coarse);
        REQUIRE(resid_fine < resid_coarse / 2.5);
    }
    SECTION("lambda is invariant under the Moser pullback") {
        for (int k : {5, 12, 20}) {
            const double c = 1.0 - eta_reparam(path.t[k], path.theta_cut);
            // pre-pullback slice: e^{2 c w} g_{r_o}, renormalized to the same area
            Eigen::VectorXd wk = c * cd.w();
            const auto slice = ConformalData::normalized(g, std::move(wk), cd.r_o());
            const double lam_pre = first_eigenpair(slice.induced_metric()).lambda;
            REQUIRE(std::abs(path.lambda[k] - lam_pre) < 1e-6);
        }
    }
    SECTION("kappa matches the dense oracle at the minimizing node") {
        Eigen::Index kmin = 0;
        path.lambda.minCoeff(&kmin);
        REQUIRE(path.kappa == path.lambda[kmin]);
        const double lam_dense = dense_lambda(path.metrics[kmin]);
        REQUIRE(std::abs(path.kappa - lam_dense) < 1e-6);
    }
}

TEST_CASE("path_constants: round closed forms") {
    auto g = make_grid(65);
    for (double r_o : {1.0, 2.0}) {
        const auto cd = make_cd(g, r_o, [](double) { return 0.0; });
        const auto path = normalize_path(conformal_path(cd, 17));
        REQUIRE(path.kappa == Catch::Approx(1.0 / (r_o * r_o)).margin(1e-9));
        REQUIRE(path.alpha == Catch::Approx(0.0).margin(1e-10));
        REQUIRE(path.beta == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("eigenvalue lower bound and concavity surrogate for random conformal data") {
    auto g = make_grid(65);
    std::mt19937 rng(711);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> rad(0.8, 1.25);
    for (int trial = 0; trial < 10; ++trial) {
        double a1 = coef(rng), a2 = coef(rng), a3 = coef(rng);
        const double norm = std::abs(a1) + std::abs(a2) + std::abs(a3);
        const double amp = 0.3 * std::abs(coef(rng)) / (norm > 0 ? norm : 1.0);
        const double r_o = rad(rng);
        auto w0 = [&](double t) {
            return amp * (a1 * std::cos(t) + a2 * std::cos(2 * t) + a3 * std::cos(3 * t));
        };
        const auto cd = make_cd(g, r_o, w0);
        const auto raw = conformal_path(cd, 17);
        const double lam0 = first_eigenpair(raw.metrics.front()).lambda;
        const double kappa_target = 0.9 * std::min(lam0, 1.0 / (r_o * r_o));
        const auto v = verify_path_lambda(raw, kappa_target);
        REQUIRE(v.ok);
        // lambda(t) never dips below min of the endpoint values
        const double floor = std::min(v.lambda[0], v.lambda[16]) - 1e-6;
        REQUIRE(v.lambda.minCoeff() >= floor);
    }
}
