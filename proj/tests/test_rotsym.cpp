#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "charex/numerics.hpp"
#include "charex/radial.hpp"

using namespace charex;

namespace {

RadialProfile constant_profile(int n, double q, double c, double s0 = 0.0, double s1 = 1.0,
                               int nodes = 51) {
    Eigen::VectorXd s(nodes);
    for (int i = 0; i < nodes; ++i) s[i] = s0 + (s1 - s0) * i / (nodes - 1);
    return {n,
            q,
            std::move(s),
            Eigen::VectorXd::Constant(nodes, c),
            Eigen::VectorXd::Zero(nodes),
            Eigen::VectorXd::Zero(nodes),
            std::vector<SegmentTag>(nodes, SegmentTag::RNTail)};
}

RadialProfile function_profile(int n, double q, double s0, double s1, int nodes,
                               const std::function<double(double)>& f,
                               const std::function<double(double)>& fp,
                               const std::function<double(double)>& fpp) {
    Eigen::VectorXd s(nodes), fv(nodes), fpv(nodes), fppv(nodes);
    for (int i = 0; i < nodes; ++i) {
        s[i] = s0 + (s1 - s0) * i / (nodes - 1);
        fv[i] = f(s[i]);
        fpv[i] = fp(s[i]);
        fppv[i] = fpp(s[i]);
    }
    return {n, q, std::move(s), std::move(fv), std::move(fpv), std::move(fppv),
            std::vector<SegmentTag>(nodes, SegmentTag::RNTail)};
}

double max_first_integral_residual(const RadialProfile& pr, const RNParams& p) {
    double mx = 0.0;
    for (Eigen::Index i = 0; i < pr.size(); ++i)
        mx = std::max(mx, std::abs(pr.fp[i] * pr.fp[i] - detail::rn_uprime2(p, pr.f[i])));
    return mx;
}

} // namespace

TEST_CASE("rn_profile: horizon values and first-integral gauge") {
    SECTION("horizon radii") {
        REQUIRE(rn_profile(RNParams{1.0, 0.0}, 5.0, 1e-3).f[0] == 2.0);
        REQUIRE(rn_profile(RNParams{1.0, 0.6}, 5.0, 1e-3).f[0] == 1.8);
    }
    SECTION("extremality gate") {
        REQUIRE_THROWS_AS(RNParams(0.5, 0.5), ExtremalityError);
        REQUIRE_THROWS_AS(RNParams(0.5, 0.7), ExtremalityError);
    }
    SECTION("first integral holds along the orbit for random sub-extremal data") {
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> md(0.5, 2.0), qd(-0.9, 0.9);
        for (int trial = 0; trial < 10; ++trial) {
            const double m = md(rng);
            const double q = qd(rng) * m;
            const RNParams p{m, q};
            const auto pr = rn_profile(p, 8.0, 1e-3);
            REQUIRE(pr.f[0] == p.r_plus);
            REQUIRE(max_first_integral_residual(pr, p) < 1e-10);
        }
    }
    SECTION("interpolant consistency |f' - df/ds| = O(h^2)") {
        const RNParams p{1.0, 0.6};
        const auto pr = rn_profile(p, 5.0, 1e-3);
        for (Eigen::Index i = 1; i + 1 < pr.size(); i += 97) {
            const double slope = (pr.f[i + 1] - pr.f[i - 1]) / (pr.s[i + 1] - pr.s[i - 1]);
            REQUIRE(std::abs(pr.fp[i] - slope) < 10.0 * 1e-6);
        }
        // quintic Hermite stays on the orbit between nodes
        for (double x : {0.1234, 1.005, 3.87654}) {
            const double res =
                pr.deriv(x) * pr.deriv(x) - detail::rn_uprime2(p, pr.value(x));
            REQUIRE(std::abs(res) < 1e-10);
        }
    }
}

TEST_CASE("scalar_curvature: closed forms") {
    SECTION("cylinder") {
        const auto r = scalar_curvature(constant_profile(2, 0.0, 1.5));
        REQUIRE((r.array() - 2.0 / 2.25).abs().maxCoeff() < 1e-14);
    }
    SECTION("flat plane") {
        const auto pr = function_profile(
            2, 0.0, 0.5, 3.0, 51, [](double s) { return s; }, [](double) { return 1.0; },
            [](double) { return 0.0; });
        REQUIRE(scalar_curvature(pr).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("RN equals 2 Q^2 / u^4") {
        const double h = 1e-3;
        const auto pr = rn_profile(RNParams{1.0, 0.6}, 5.0, h);
        const auto r = scalar_curvature(pr);
        for (Eigen::Index i = 0; i < pr.size(); i += 53) {
            const double oracle = 2.0 * 0.36 / std::pow(pr.f[i], 4);
            REQUIRE(std::abs(r[i] - oracle) < 10.0 * h * h);
        }
    }
}

TEST_CASE("electric_field: normal component and discrete divergence") {
    SECTION("uncharged") {
        const auto pr = rn_profile(RNParams{1.0, 0.0}, 5.0, 1e-3);
        REQUIRE(electric_field(pr).normal.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("RN slice with u = 2") {
        const auto pr = rn_profile(RNParams{1.0, 0.6}, 5.0, 1e-3);
        const double s2 = bisect([&](double x) { return pr.value(x) - 2.0; }, 0.0, 5.0);
        REQUIRE(pr.Q / std::pow(pr.value(s2), 2) == Catch::Approx(0.15).margin(1e-9));
    }
    SECTION("higher-dimensional normal component") {
        const auto pr = constant_profile(3, 8.0, 2.0);
        REQUIRE(electric_field(pr).normal[0] == Catch::Approx(1.0).margin(1e-14));
    }
    SECTION("discrete divergence vanishes") {
        const auto pr = rn_profile(RNParams{1.2, -0.8}, 5.0, 1e-3);
        const auto ef = electric_field(pr);
        for (Eigen::Index i = 1; i + 1 < pr.size(); i += 211) {
            const double flux_p = std::pow(pr.f[i + 1], pr.n) * ef.normal[i + 1];
            const double flux_m = std::pow(pr.f[i - 1], pr.n) * ef.normal[i - 1];
            const double div = (flux_p - flux_m) / (pr.s[i + 1] - pr.s[i - 1]) /
                               std::pow(pr.f[i], pr.n);
            REQUIRE(std::abs(div) < 1e-8);
        }
    }
}

TEST_CASE("dec_margin: equality case, cylinder, and violation flagging") {
    SECTION("RN saturates DEC") {
        const double h = 1e-3;
        const auto pr = rn_profile(RNParams{1.0, 0.6}, 5.0, h);
        REQUIRE(dec_margin(pr).cwiseAbs().maxCoeff() < 10.0 * h * h);
    }
    SECTION("cylinder margin 1/(2c)") {
        const auto m = dec_margin(constant_profile(2, 0.0, 1.5));
        REQUIRE((m.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-14);
    }
    SECTION("cosh profile violates DEC at large s") {
        const auto pr = function_profile(
            2, 0.0, 0.0, 3.0, 301, [](double s) { return std::cosh(s); },
            [](double s) { return std::sinh(s); }, [](double s) { return std::cosh(s); });
        const auto m = dec_margin(pr);
        for (Eigen::Index i = 0; i < pr.size(); ++i) {
            const double sh = std::sinh(pr.s[i]), ch = std::cosh(pr.s[i]);
            const double oracle = (1.0 - sh * sh) / (2.0 * ch) - ch;
            REQUIRE(m[i] == Catch::Approx(oracle).margin(1e-12));
        }
        REQUIRE(m[pr.size() - 1] < 0.0); // violation correctly flagged
    }
}

TEST_CASE("charged_hawking_profile: closed forms") {
    SECTION("RN is exactly m everywhere") {
        const auto pr = rn_profile(RNParams{1.0, 0.6}, 5.0, 1e-3);
        REQUIRE((charged_hawking_profile(pr).array() - 1.0).abs().maxCoeff() < 1e-8);
    }
    SECTION("minimal round slice") {
        REQUIRE(charged_hawking_mass(2, 0.5, 1.0, 0.0) == Catch::Approx(0.625).margin(1e-15));
    }
    SECTION("flat space has zero mass") {
        const auto pr = function_profile(
            2, 0.0, 0.5, 3.0, 51, [](double s) { return s; }, [](double) { return 1.0; },
            [](double) { return 0.0; });
        REQUIRE(charged_hawking_profile(pr).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("dimension gate") {
        REQUIRE_THROWS_AS(charged_hawking_profile(constant_profile(3, 0.0, 1.0)),
                          DimensionError);
    }
}

TEST_CASE("hypotheses_34: endpoint conditions") {
    SECTION("sub-extremal RN satisfies both") {
        const auto pr = rn_profile(RNParams{1.0, 0.6}, 5.0, 1e-3);
        for (Endpoint e : {Endpoint::Left, Endpoint::Right}) {
            const auto h = hypotheses_34(pr, e);
            REQUIRE(h.radius_dominates_charge);
            REQUIRE(h.slope_within_bound);
            REQUIRE(h.hawking_exceeds_charge);
        }
    }
    SECTION("boundary case f^{n-1} = |Q|") {
        const auto h = hypotheses_34(constant_profile(2, 1.0, 1.0), Endpoint::Right);
        REQUIRE_FALSE(h.radius_dominates_charge);
    }
    SECTION("direct arithmetic case") {
        Eigen::VectorXd s(2), f(2), fp(2), fpp(2);
        s << 0.0, 1.0;
        f << 1.5, 1.5;
        fp << 0.9, 0.9;
        fpp << 0.0, 0.0;
        const RadialProfile pr{2, 0.3, s, f, fp, fpp,
                               std::vector<SegmentTag>(2, SegmentTag::RNTail)};
        const auto h = hypotheses_34(pr, Endpoint::Right);
        REQUIRE(h.slack4 == Catch::Approx(0.64 - 0.81).margin(1e-12));
        REQUIRE_FALSE(h.slope_within_bound);
    }
    SECTION("equivalence with the Hawking-mass form (n = 2)") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> fd(0.3, 3.0), pd(-1.4, 1.4), qd(-1.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd s(2), f(2), fp(2), fpp(2);
            s << 0.0, 1.0;
            f.setConstant(fd(rng));
            fp.setConstant(pd(rng));
            fpp.setZero();
            const RadialProfile pr{2, qd(rng), s, f, fp, fpp,
                                   std::vector<SegmentTag>(2, SegmentTag::RNTail)};
            const auto h = hypotheses_34(pr, Endpoint::Left);
            REQUIRE(h.slope_within_bound == h.hawking_exceeds_charge);
        }
    }
}

TEST_CASE("rotsym invariants") {
    SECTION("RN self-consistency for random parameters") {
        std::mt19937 rng(101);
        std::uniform_real_distribution<double> md(0.5, 2.0), qd(-0.9, 0.9);
        for (int trial = 0; trial < 10; ++trial) {
            const double m = md(rng), q = qd(rng) * m;
            const RNParams p{m, q};
            const double h = 2e-3;
            const auto pr = rn_profile(p, 6.0, h);
            REQUIRE(dec_margin(pr).cwiseAbs().maxCoeff() < 10 * h * h);
            const auto r = scalar_curvature(pr);
            for (Eigen::Index i = 0; i < pr.size(); i += 100)
                REQUIRE(std::abs(r[i] - 2 * q * q / std::pow(pr.f[i], 4)) < 10 * h * h);
            REQUIRE((charged_hawking_profile(pr).array() - m).abs().maxCoeff() < 1e-8);
        }
    }
    SECTION("Hawking mass monotone along strictly-DEC increasing profiles") {
        // RN geometry carrying a smaller charge: margin > 0 and f' > 0
        auto pr = rn_profile(RNParams{1.0, 0.6}, 6.0, 1e-3);
        pr.Q = 0.5;
        REQUIRE(dec_margin(pr).minCoeff() > 0.0);
        REQUIRE(pr.fp.tail(pr.size() - 1).minCoeff() > 0.0);
        const auto mh = charged_hawking_profile(pr);
        for (Eigen::Index i = 1; i < pr.size(); ++i)
            REQUIRE(mh[i] >= mh[i - 1] - 1e-12);
    }
    SECTION("dimensional covariance of the margin") {
        auto pr = rn_profile(RNParams{1.0, 0.6}, 4.0, 1e-3);
        pr.Q = 0.5;
        const auto base = dec_margin(pr);
        const double lam = 2.5;
        const RadialProfile scaled{pr.n,
                                   lam * pr.Q,
                                   lam * pr.s,
                                   lam * pr.f,
                                   pr.fp,
                                   pr.fpp / lam,
                                   pr.tags};
        const auto ms = dec_margin(scaled);
        REQUIRE((ms - base / lam).cwiseAbs().maxCoeff() < 1e-12);
    }
}
