#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "charex/errors.hpp"

namespace charex {

// ---------------------------------------------------------------------------
// C-infinity building blocks
// ---------------------------------------------------------------------------

/// exp(-1/y) for y > 0, 0 otherwise.
inline double cinf_bump(double y) {
    if (y <= 0.0) return 0.0;
    return std::exp(-1.0 / y);
}

/// Standard C-infinity smoothstep: 0 for y <= 0, 1 for y >= 1, strictly
/// increasing in between.
inline double smoothstep(double y) {
    const double a = cinf_bump(y);
    const double b = cinf_bump(1.0 - y);
    if (a == 0.0) return 0.0;
    if (b == 0.0) return 1.0;
    return a / (a + b);
}

/// First derivative of smoothstep (analytic, 0 outside (0, 1)).
inline double smoothstep_d1(double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    const double a = cinf_bump(y), b = cinf_bump(1.0 - y);
    const double t = a + b;
    if (t == 0.0) return 0.0;
    // S' = (a' b - a b') / (a+b)^2 with a' = a/y^2, b' = -b/(1-y)^2
    const double g = 1.0 / (y * y) + 1.0 / ((1.0 - y) * (1.0 - y));
    return a * b * g / (t * t);
}

/// Second derivative of smoothstep (analytic).
inline double smoothstep_d2(double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    const double a = cinf_bump(y), b = cinf_bump(1.0 - y);
    const double t = a + b;
    if (t == 0.0) return 0.0;
    const double z = 1.0 - y;
    const double ap = a / (y * y), bp = -b / (z * z);
    const double app = a / (y * y * y * y) - 2.0 * a / (y * y * y);
    const double bpp = b / (z * z * z * z) - 2.0 * b / (z * z * z);
    const double num1 = app * b - a * bpp;
    const double num0 = ap * b - a * bp;
    return num1 / (t * t) - 2.0 * num0 * (ap + bp) / (t * t * t);
}

/// C-infinity cutoff: 1 on [x1, x2], 0 outside (x0, x3), monotone ramps.
inline double cinf_cutoff(double x, double x0, double x1, double x2, double x3) {
    if (x <= x1 && x >= x0) return smoothstep((x - x0) / (x1 - x0));
    if (x >= x2 && x <= x3) return smoothstep((x3 - x) / (x3 - x2));
    return (x > x1 && x < x2) ? 1.0 : 0.0;
}

inline double cinf_cutoff_d1(double x, double x0, double x1, double x2, double x3) {
    if (x <= x1 && x >= x0) return smoothstep_d1((x - x0) / (x1 - x0)) / (x1 - x0);
    if (x >= x2 && x <= x3) return -smoothstep_d1((x3 - x) / (x3 - x2)) / (x3 - x2);
    return 0.0;
}

inline double cinf_cutoff_d2(double x, double x0, double x1, double x2, double x3) {
    if (x <= x1 && x >= x0) return smoothstep_d2((x - x0) / (x1 - x0)) / ((x1 - x0) * (x1 - x0));
    if (x >= x2 && x <= x3) return smoothstep_d2((x3 - x) / (x3 - x2)) / ((x3 - x2) * (x3 - x2));
    return 0.0;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> x, w; // nodes/weights on [-1, 1]
};

/// Nodes by Newton iteration on P_n; deterministic.
inline const GaussRule& gauss_legendre(int n) {
    static thread_local std::vector<GaussRule> cache(65);
    if (n < 1 || n > 64) throw ParameterError("gauss_legendre: order out of range");
    GaussRule& rule = cache[n];
    if (!rule.x.empty()) return rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

/// Fixed-order Gauss integral of fn over [a, b].
template <typename F>
double gauss_integrate(F&& fn, double a, double b, int order = 32) {
    const GaussRule& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * fn(mid + half * rule.x[i]);
    return acc * half;
}

/// Composite Gauss integral with panels, for integrands with localized features.
template <typename F>
double panel_integrate(F&& fn, double a, double b, int panels, int order = 16) {
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + (b - a) * k / panels;
        const double x1 = a + (b - a) * (k + 1) / panels;
        acc += gauss_integrate(fn, x0, x1, order);
    }
    return acc;
}

/// Gauss integration of fn over [a, b] split at the interior points of
/// `breaks` (for piecewise-smooth integrands with known kink locations).
template <typename F>
double integrate_with_breaks(F&& fn, double a, double b, const std::vector<double>& breaks,
                             int order = 20) {
    std::vector<double> cuts{a};
    for (double c : breaks)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (size_t k = 0; k + 1 < cuts.size(); ++k)
        acc += gauss_integrate(fn, cuts[k], cuts[k + 1], order);
    return acc;
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Bisection on a bracketing interval; fn(a) and fn(b) must differ in sign.
template <typename F>
double bisect(F&& fn, double a, double b, double tol = 0.0, int max_iter = 200) {
    double fa = fn(a), fb = fn(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw ParameterError("bisect: endpoints do not bracket a root");
    for (int i = 0; i < max_iter; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = fn(m);
        if (fm == 0.0 || (b - a) <= tol) return m;
        if ((fm > 0) == (fa > 0)) { a = m; fa = fm; }
        else { b = m; }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Cubic spline (not-a-knot) on strictly increasing nodes
// ---------------------------------------------------------------------------

class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const int n = static_cast<int>(x_.size());
        if (n < 4 || y_.size() != x_.size())
            throw ParameterError("CubicSpline: need >= 4 nodes");
        for (int i = 1; i < n; ++i)
            if (x_[i] <= x_[i - 1]) throw ParameterError("CubicSpline: nodes must increase");

        std::vector<double> h(n - 1);
        for (int i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

        // Solve for second derivatives m_i; not-a-knot end conditions are
        // eliminated into the first/last interior rows, then Thomas solve.
        m_.assign(n, 0.0);
        if (n == 4) {
            // single interior pair; fall back to a dense 4x4 solve
            solve_small(h);
            return;
        }
        const int k = n - 2; // unknowns m_1 .. m_{n-2}
        std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
        for (int i = 1; i <= n - 2; ++i) {
            const int r = i - 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
        }
        // m_0 = (1 + h0/h1) m_1 - (h0/h1) m_2
        const double c0 = h[0] / h[1];
        diag[0] += sub[0] * (1.0 + c0);
        sup[0] -= sub[0] * c0;
        // m_{n-1} = (1 + h_{n-2}/h_{n-3}) m_{n-2} - (h_{n-2}/h_{n-3}) m_{n-3}
        const double c1 = h[n - 2] / h[n - 3];
        diag[k - 1] += sup[k - 1] * (1.0 + c1);
        sub[k - 1] -= sup[k - 1] * c1;

        for (int r = 1; r < k; ++r) {
            const double f = sub[r] / diag[r - 1];
            diag[r] -= f * sup[r - 1];
            rhs[r] -= f * rhs[r - 1];
        }
        std::vector<double> sol(k);
        sol[k - 1] = rhs[k - 1] / diag[k - 1];
        for (int r = k - 2; r >= 0; --r) sol[r] = (rhs[r] - sup[r] * sol[r + 1]) / diag[r];
        for (int i = 1; i <= n - 2; ++i) m_[i] = sol[i - 1];
        m_[0] = (1.0 + c0) * m_[1] - c0 * m_[2];
        m_[n - 1] = (1.0 + c1) * m_[n - 2] - c1 * m_[n - 3];
    }

    double operator()(double x) const { return eval<0>(x); }
    double deriv(double x) const { return eval<1>(x); }
    double deriv2(double x) const { return eval<2>(x); }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    void solve_small(const std::vector<double>& h) {
        // n == 4: not-a-knot makes the spline a single cubic; fit directly.
        // Solve the 4x4 Vandermonde for cubic coefficients, then sample m_i.
        double a[4][5];
        for (int i = 0; i < 4; ++i) {
            const double t = x_[i] - x_[0];
            a[i][0] = 1.0; a[i][1] = t; a[i][2] = t * t; a[i][3] = t * t * t; a[i][4] = y_[i];
        }
        for (int c = 0; c < 4; ++c) {
            int piv = c;
            for (int r = c + 1; r < 4; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            std::swap(a[c], a[piv]);
            for (int r = 0; r < 4; ++r) {
                if (r == c) continue;
                const double f = a[r][c] / a[c][c];
                for (int cc = c; cc < 5; ++cc) a[r][cc] -= f * a[c][cc];
            }
        }
        const double c2 = a[2][4] / a[2][2], c3 = a[3][4] / a[3][3];
        for (int i = 0; i < 4; ++i) m_[i] = 2.0 * c2 + 6.0 * c3 * (x_[i] - x_[0]);
        (void)h;
    }

    template <int Order>
    double eval(double x) const {
        const int n = static_cast<int>(x_.size());
        int i = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        i = std::clamp(i, 0, n - 2);
        const double h = x_[i + 1] - x_[i];
        const double t0 = (x_[i + 1] - x) / h, t1 = (x - x_[i]) / h;
        if constexpr (Order == 0) {
            return t0 * y_[i] + t1 * y_[i + 1] +
                   h * h / 6.0 * ((t0 * t0 * t0 - t0) * m_[i] + (t1 * t1 * t1 - t1) * m_[i + 1]);
        } else if constexpr (Order == 1) {
            return (y_[i + 1] - y_[i]) / h +
                   h / 6.0 * ((3.0 * t1 * t1 - 1.0) * m_[i + 1] - (3.0 * t0 * t0 - 1.0) * m_[i]);
        } else {
            return t0 * m_[i] + t1 * m_[i + 1];
        }
    }

    std::vector<double> x_, y_, m_;
};

} // namespace charex
