#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "driftmle/errors.hpp"
#include "driftmle/expr.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"

using namespace driftmle;

namespace {

DiffusionModel make_model(const std::string& a, const std::string& b,
                          double theta = 2.0, double x0 = 1.0) {
    return DiffusionModel{parse_expression(a), parse_expression(b), theta, x0};
}

}  // namespace

TEST_CASE("scheme: N = floor(n^(1+alpha)) against precomputed values") {
    struct Row {
        int n;
        double alpha;
        std::size_t N;
    };
    // Frozen from 50-digit arithmetic; the first two are exact integer
    // powers, where naive double rounding could floor one short.
    const Row rows[] = {
        {4, 0.5, 8},           {100, 0.5, 1000},
        {100, 0.1, 158},       {250, 0.9, 35982},
        {1000, 0.8, 251188},   {1000, 0.9, 501187},
        {2000, 0.9, 1870496},  {4000, 0.9, 6980941},
        {5000, 0.9, 10667017},
    };
    for (const Row& r : rows) {
        ObservationScheme s{r.n, r.alpha, 1};
        CHECK(s.N() == r.N);
    }
    ObservationScheme s{100, 0.5, 1};
    CHECK(s.delta() == 0.01);
    CHECK(s.horizon() == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("scheme: validation rejects out-of-range fields") {
    CHECK_THROWS_AS((ObservationScheme{0, 0.5, 1}.validate()), Error);
    CHECK_THROWS_AS((ObservationScheme{10, 0.0, 1}.validate()), Error);
    CHECK_THROWS_AS((ObservationScheme{10, 1.0, 1}.validate()), Error);
    CHECK_THROWS_AS((ObservationScheme{10, -0.3, 1}.validate()), Error);
    CHECK_THROWS_AS((ObservationScheme{10, 0.5, 0}.validate()), Error);
    CHECK_NOTHROW((ObservationScheme{10, 0.5, 1}.validate()));
}

TEST_CASE("method names round-trip") {
    CHECK(method_from_string("euler") == Method::euler);
    CHECK(method_from_string("milstein") == Method::milstein);
    CHECK(std::string(to_string(Method::euler)) == "euler");
    CHECK(std::string(to_string(Method::milstein)) == "milstein");
    CHECK_THROWS_AS(method_from_string("heun"), ConfigError);
}

TEST_CASE("kernel: one Euler step with zero drift contribution") {
    // a(x0) = a(1) = 0, b = 1, h = 0.01: X1 = 1 + 0.1 z
    SchemeKernel kernel(make_model("1-x", "1"));
    CHECK(kernel.step(Method::euler, 1.0, 0.01, 0.3, nullptr) ==
          doctest::Approx(1.03).epsilon(1e-15));
    CHECK(kernel.theta() == 2.0);

    // and the first recorded observation uses exactly the stream's first draw
    DiffusionModel m = make_model("1-x", "1");
    ObservationScheme s{100, 0.1, 1};
    ObservedPath p = simulate_path(m, s, Method::euler, 7);
    NormalStream stream(7);
    CHECK(p.values[1] == 1.0 + 0.1 * stream.normal());
}

TEST_CASE("kernel: Milstein correction vanishes when Z^2 = 1") {
    SchemeKernel kernel(make_model("0", "x"));
    for (double z : {1.0, -1.0}) {
        double mil = kernel.step(Method::milstein, 1.0, 0.01, z, nullptr);
        double eul = kernel.step(Method::euler, 1.0, 0.01, z, nullptr);
        CHECK(mil == eul);
    }
}

TEST_CASE("path: starts at x0 exactly and has N+1 values") {
    DiffusionModel m = make_model("-x", "1", 2.0, 1.25);
    ObservationScheme s{50, 0.5, 1};
    ObservedPath p = simulate_path(m, s, Method::milstein, 11);
    CHECK(p.values.size() == s.N() + 1);
    CHECK(p.values[0] == 1.25);
    CHECK(p.seed == 11);
    CHECK(p.fingerprint == model_fingerprint(m));
    CHECK(p.scheme.n == 50);
}

TEST_CASE("path: same seed reproduces bitwise, different seed differs") {
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{100, 0.5, 1};
    ObservedPath p1 = simulate_path(m, s, Method::milstein, 42);
    ObservedPath p2 = simulate_path(m, s, Method::milstein, 42);
    ObservedPath p3 = simulate_path(m, s, Method::milstein, 43);
    CHECK(p1.values == p2.values);
    CHECK(p1.values != p3.values);
}

TEST_CASE("path: Milstein equals Euler bitwise for constant diffusion") {
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{100, 0.5, 1};
    ObservedPath mil = simulate_path(m, s, Method::milstein, 5);
    ObservedPath eul = simulate_path(m, s, Method::euler, 5);
    CHECK(mil.values == eul.values);
    CHECK(mil.derivative_fallbacks == 0);
}

TEST_CASE("path: substeps refine without changing the recorded grid") {
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s1{50, 0.5, 1};
    ObservationScheme s8{50, 0.5, 8};
    ObservedPath p1 = simulate_path(m, s1, Method::milstein, 3);
    ObservedPath p8 = simulate_path(m, s8, Method::milstein, 3);
    CHECK(p1.values.size() == p8.values.size());
    CHECK(p8.values[0] == 1.0);
    CHECK(p1.values[1] != p8.values[1]);  // same draws spent differently
}

TEST_CASE("path: derivative kink falls back to finite differences") {
    // b = abs(x) + 1 has no symbolic slope at x = 0; starting there forces
    // the fallback on the first substep.
    DiffusionModel m = make_model("1", "abs(x)+1", 2.0, 0.0);
    ObservationScheme s{50, 0.5, 1};
    ObservedPath mil = simulate_path(m, s, Method::milstein, 9);
    CHECK(mil.derivative_fallbacks >= 1);
    ObservedPath eul = simulate_path(m, s, Method::euler, 9);
    CHECK(eul.derivative_fallbacks == 0);
}

TEST_CASE("path: explosive drift raises NumericalBlowup") {
    DiffusionModel m = make_model("x^3", "1");
    ObservationScheme s{100, 0.5, 1};
    CHECK_THROWS_AS(simulate_path(m, s, Method::milstein, 1), NumericalBlowup);
    try {
        simulate_path(m, s, Method::milstein, 1);
    } catch (const NumericalBlowup& e) {
        CHECK(e.step > 0);
        CHECK(std::fabs(e.x) > 1e12);
    }
}

TEST_CASE("stationary variance of the linear model at T = 10") {
    // X_T is nearly stationary: var = 1/(2 theta) = 0.25. The discrete
    // recursion has variance 1/(2 theta - theta^2 h) = 0.2525...; with 10^4
    // replicates the 3-standard-error band comfortably contains both.
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{100, 0.5, 1};
    const int reps = 10'000;
    const std::size_t N = s.N();
    SchemeKernel kernel(m);
    std::vector<double> xT(reps);
    for (int r = 0; r < reps; ++r) {
        NormalStream stream(derive_seed(77, static_cast<std::uint64_t>(r)));
        double x = m.x0;
        const double h = s.delta();
        for (std::size_t k = 0; k < N; ++k)
            x = kernel.step(Method::milstein, x, h, stream.normal(), nullptr);
        xT[r] = x;
    }
    double mean = 0.0;
    for (double v : xT) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : xT) var += (v - mean) * (v - mean);
    var /= reps - 1;

    const double se3 = 3.0 * 0.25 * std::sqrt(2.0 / (reps - 1));
    CHECK(std::fabs(var - 0.25) < se3 + 0.003);  // + discretization bias room
}

TEST_CASE("strong order: Milstein ~ h^1 vs Euler ~ h^0.5 on state-dependent noise") {
    // dX = X dW (drift suppressed): exact solution x0 exp(W_T - T/2).
    // Coarse paths reuse the same Brownian increments as the fine grid, so
    // the error measured is purely the scheme's.
    DiffusionModel m = make_model("0", "x");
    SchemeKernel kernel(m);
    const int kmin = 4, kmax = 10;
    const int fine = 1 << kmax;
    const double hfine = 1.0 / fine;
    const int reps = 256;

    std::vector<double> sq_mil(kmax - kmin + 1, 0.0);
    std::vector<double> sq_eul(kmax - kmin + 1, 0.0);
    std::vector<double> dw(fine);
    NormalStream stream(2024);
    for (int r = 0; r < reps; ++r) {
        double wT = 0.0;
        for (int i = 0; i < fine; ++i) {
            dw[i] = std::sqrt(hfine) * stream.normal();
            wT += dw[i];
        }
        const double exact = std::exp(wT - 0.5);
        for (int k = kmin; k <= kmax; ++k) {
            const int steps = 1 << k;
            const int per = fine / steps;
            const double h = 1.0 / steps;
            double xm = 1.0, xe = 1.0;
            for (int s = 0; s < steps; ++s) {
                double inc = 0.0;
                for (int i = 0; i < per; ++i) inc += dw[s * per + i];
                const double z = inc / std::sqrt(h);
                xm = kernel.step(Method::milstein, xm, h, z, nullptr);
                xe = kernel.step(Method::euler, xe, h, z, nullptr);
            }
            sq_mil[k - kmin] += (xm - exact) * (xm - exact);
            sq_eul[k - kmin] += (xe - exact) * (xe - exact);
        }
    }

    auto slope_vs_h = [&](const std::vector<double>& sq) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int mpts = kmax - kmin + 1;
        for (int k = kmin; k <= kmax; ++k) {
            double lx = -k * std::log(2.0);  // log h
            double ly = 0.5 * std::log(sq[k - kmin] / reps);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        return (mpts * sxy - sx * sy) / (mpts * sxx - sx * sx);
    };

    double mil = slope_vs_h(sq_mil);
    double eul = slope_vs_h(sq_eul);
    INFO("milstein slope ", mil, ", euler slope ", eul);
    CHECK(std::fabs(mil - 1.0) < 0.2);
    CHECK(std::fabs(eul - 0.5) < 0.2);
}
