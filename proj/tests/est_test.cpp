#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "driftmle/errors.hpp"
#include "driftmle/est.hpp"
#include "driftmle/expr.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"

using namespace driftmle;

namespace {

DiffusionModel make_model(const std::string& a, const std::string& b,
                          double theta = 2.0, double x0 = 1.0) {
    return DiffusionModel{parse_expression(a), parse_expression(b), theta, x0};
}

ObservedPath synthetic_path(const ObservationScheme& scheme,
                            std::vector<double> values) {
    ObservedPath p;
    p.scheme = scheme;
    p.values = std::move(values);
    return p;
}

}  // namespace

TEST_CASE("estimate: telescoping sum with unit coefficients") {
    // a = b = 1: numerator telescopes to X_T - x0, every d-term is 1.
    // Values are multiples of 0.25, so all increments are exact binary and
    // the result is exact: (1 - 0)/((1/4)*8) = 0.5.
    ObservationScheme s{4, 0.5, 1};
    REQUIRE(s.N() == 8);
    ObservedPath p = synthetic_path(
        s, {0.0, 0.25, -0.5, 0.75, 1.25, -0.25, 0.5, 2.0, 1.0});
    EstimateResult r = estimate(p, parse_expression("1"), parse_expression("1"));
    CHECK(r.theta_hat == 0.5);
    CHECK(r.numerator == 1.0);
    CHECK(r.denominator_raw == 2.0);
    CHECK(r.denominator_Dn == 1.0);
    CHECK(r.N_used == 8);
}

TEST_CASE("estimate: constant path gives zero") {
    ObservationScheme s{4, 0.5, 1};
    ObservedPath p = synthetic_path(s, std::vector<double>(9, 2.0));
    EstimateResult r = estimate(p, parse_expression("x"), parse_expression("1"));
    CHECK(r.theta_hat == 0.0);
    CHECK(r.numerator == 0.0);
    CHECK(r.denominator_raw == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("estimate: null drift factor raises DegenerateDenominator") {
    ObservationScheme s{4, 0.5, 1};
    ObservedPath p = synthetic_path(
        s, {0.0, 0.25, -0.5, 0.75, 1.25, -0.25, 0.5, 2.0, 1.0});
    CHECK_THROWS_AS(estimate(p, parse_expression("0"), parse_expression("1")),
                    DegenerateDenominator);
}

TEST_CASE("estimate: vanishing diffusion on the path raises") {
    ObservationScheme s{4, 0.5, 1};
    ObservedPath p = synthetic_path(s, {1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(estimate(p, parse_expression("1"), parse_expression("x")),
                    DegenerateDiffusion);
}

TEST_CASE("estimate: path length must match the scheme") {
    ObservationScheme s{4, 0.5, 1};
    ObservedPath p = synthetic_path(s, {0.0, 1.0});
    CHECK_THROWS_AS(estimate(p, parse_expression("1"), parse_expression("1")), Error);
}

TEST_CASE("estimate: raw denominator = n^alpha * Dn") {
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{200, 0.7, 1};
    ObservedPath p = simulate_path(m, s, Method::milstein, 31);
    EstimateResult r = estimate(p, m.a, m.b);
    double lhs = r.denominator_raw;
    double rhs = std::pow(200.0, 0.7) * r.denominator_Dn;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(r.N_used == s.N());
}

TEST_CASE("estimate: scaling every increment by lambda scales theta_hat") {
    ObservationScheme s{4, 0.5, 1};
    std::vector<double> base = {0.0, 0.25, -0.5, 0.75, 1.25, -0.25, 0.5, 2.0, 1.0};
    const double lambda = 3.0;
    std::vector<double> scaled(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        scaled[i] = base[0] + lambda * (base[i] - base[0]);

    auto one = parse_expression("1");
    EstimateResult r1 = estimate(synthetic_path(s, base), one, one);
    EstimateResult r2 = estimate(synthetic_path(s, scaled), one, one);
    CHECK(r2.numerator == doctest::Approx(lambda * r1.numerator).epsilon(1e-14));
    CHECK(r2.denominator_raw == r1.denominator_raw);
    CHECK(r2.theta_hat == doctest::Approx(lambda * r1.theta_hat).epsilon(1e-14));
}

TEST_CASE("streaming accumulator matches whole-path estimate bitwise") {
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{100, 0.5, 1};
    ObservedPath p = simulate_path(m, s, Method::milstein, 17);
    EstimateResult whole = estimate(p, m.a, m.b);

    EstimatorAccumulator acc(m.a, m.b);
    acc.start(p.values[0]);
    for (std::size_t k = 1; k < p.values.size(); ++k) acc.add(p.values[k]);
    EstimateResult streamed = acc.finish(s);

    CHECK(streamed.theta_hat == whole.theta_hat);
    CHECK(streamed.numerator == whole.numerator);
    CHECK(streamed.denominator_Dn == whole.denominator_Dn);
}

TEST_CASE("accumulator misuse is rejected") {
    EstimatorAccumulator acc(parse_expression("1"), parse_expression("1"));
    CHECK_THROWS_AS(acc.add(1.0), Error);
    acc.start(0.0);
    CHECK_THROWS_AS((void)acc.finish(ObservationScheme{4, 0.5, 1}), Error);
}

TEST_CASE("standardized error: spot value and guard") {
    EstimateResult r;
    r.theta_hat = 2.1;
    ObservationScheme s{100, 0.5, 1};
    double z = standardized_error(r, 2.0, 0.25, s);
    // 100^{0.25} * 0.1 * 0.5
    CHECK(z == doctest::Approx(0.15811388300841897).epsilon(1e-12));
    CHECK_THROWS_AS((void)standardized_error(r, 2.0, 0.0, s), NonPositiveInformation);
}

TEST_CASE("estimate: linear model at n = 1000, alpha = 0.9 is tightly centered") {
    // Predicted std here is ~0.0089, so a +-0.25 band should capture
    // essentially every replicate.
    DiffusionModel m = make_model("-x", "1");
    ObservationScheme s{1000, 0.9, 1};
    int hits = 0;
    for (int r = 0; r < 100; ++r) {
        ObservedPath p = simulate_path(m, s, Method::milstein,
                                       derive_seed(1001, static_cast<std::uint64_t>(r)));
        EstimateResult e = estimate(p, m.a, m.b);
        if (std::fabs(e.theta_hat - 2.0) <= 0.25) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("estimate: mean squared error shrinks as n grows") {
    DiffusionModel m = make_model("-x", "1");
    const int ns[] = {50, 200, 1000};
    const int reps = 100;
    double mse[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        ObservationScheme s{ns[i], 0.9, 1};
        for (int r = 0; r < reps; ++r) {
            ObservedPath p = simulate_path(
                m, s, Method::milstein,
                derive_seed(555 + i, static_cast<std::uint64_t>(r)));
            EstimateResult e = estimate(p, m.a, m.b);
            mse[i] += (e.theta_hat - 2.0) * (e.theta_hat - 2.0);
        }
        mse[i] /= reps;
    }
    // strictly decreasing, with at most one adjacent inversion tolerated
    int inversions = 0;
    if (mse[1] >= mse[0]) ++inversions;
    if (mse[2] >= mse[1]) ++inversions;
    CHECK(inversions <= 1);
    CHECK(mse[2] < mse[0]);
}

TEST_CASE("estimate: D_n approaches the information as n grows") {
    DiffusionModel m = make_model("-x", "1");
    const int ns[] = {100, 500, 2000};
    const int reps = 40;
    double dev[3], mean_dn[3];
    for (int i = 0; i < 3; ++i) {
        ObservationScheme s{ns[i], 0.9, 1};
        double acc_dev = 0.0, acc_dn = 0.0;
        for (int r = 0; r < reps; ++r) {
            ObservedPath p = simulate_path(
                m, s, Method::milstein,
                derive_seed(9090 + i, static_cast<std::uint64_t>(r)));
            EstimateResult e = estimate(p, m.a, m.b);
            acc_dev += std::fabs(e.denominator_Dn - 0.25);
            acc_dn += e.denominator_Dn;
        }
        dev[i] = acc_dev / reps;
        mean_dn[i] = acc_dn / reps;
    }
    CHECK(dev[1] < dev[0]);
    CHECK(dev[2] < dev[1]);
    CHECK(std::fabs(mean_dn[2] / 0.25 - 1.0) < 0.05);
}
