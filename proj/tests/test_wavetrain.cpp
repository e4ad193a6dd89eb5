#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"

using namespace fkwave;
using Catch::Matchers::WithinAbs;

namespace {

double max_abs_P_minus_4(double eps, double* max_slope) {
    ModelParams p = make_params(1.0, eps);
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) grid.push_back(0.1 + 0.05 * i);
    auto rows = period_map(grid, fixtures::spec(eps), p);
    double m = 0.0, s = 0.0;
    for (const auto& r : rows) {
        m = std::max(m, std::abs(r.P - 4.0));
        s = std::max(s, std::abs(r.dP_da));
    }
    if (max_slope) *max_slope = s;
    return m;
}

}  // namespace

TEST_CASE("harmonic limit at zero smoothing", "[wavetrain]") {
    ModelParams p = make_params(1.0, 0.0);
    WaveTrain t = compute_wavetrain(0.5, fixtures::spec(0.0), p);
    CHECK_THAT(t.omega, WithinAbs(p.k0, 1e-14));
    CHECK(t.coeffs[1] == 0.5);
    for (size_t n = 0; n < t.coeffs.size(); ++n)
        if (n != 1) CHECK(std::abs(t.coeffs[n]) <= 1e-12);
    CHECK_THAT(t.period(), WithinAbs(4.0, 1e-14));
    std::vector<double> grid{0.2, 0.4, 0.6};
    for (const auto& r : period_map(grid, fixtures::spec(0.0), p)) {
        CHECK_THAT(r.P, WithinAbs(4.0, 1e-12));
        CHECK(std::abs(r.dP_da) <= 1e-10);
    }
}

TEST_CASE("anharmonic trains stay close to the harmonic one", "[wavetrain]") {
    const double eps = 0.01;
    ModelParams p = make_params(1.0, eps);
    PotentialSpec s = fixtures::spec(eps);
    WaveTrain t = compute_wavetrain(0.5, s, p);
    CHECK(std::abs(t.omega - p.k0) <= eps);
    for (size_t n = 0; n < t.coeffs.size(); ++n)
        if (n != 1) CHECK(std::abs(t.coeffs[n]) <= eps);
    CHECK(t.residual_sup <= 1e-9);
    CHECK(train_residual(t, s, p) <= 1e-9);
    for (int n : {0, 2, 3, 4}) CHECK(std::abs(dispersion_D(n * t.omega, p)) >= 0.1);
}

TEST_CASE("lower-well train is the odd reflection", "[wavetrain]") {
    const double eps = 0.01;
    ModelParams p = make_params(1.0, eps);
    PotentialSpec s = fixtures::spec(eps);
    WaveTrain up = compute_wavetrain(0.4, s, p, 24, 1), dn = compute_wavetrain(0.4, s, p, 24, -1);
    CHECK_THAT(dn.omega, WithinAbs(up.omega, 1e-14));
    for (double th = 0.0; th < 2 * pi; th += 0.3) CHECK_THAT(dn.eval(th), WithinAbs(-up.eval(th + pi), 1e-12));
}

TEST_CASE("coefficient structure", "[wavetrain][property]") {
    for (double eps : {1e-3, 1e-2}) {
        ModelParams p = make_params(1.0, eps);
        PotentialSpec s = fixtures::spec(eps);
        for (double a : {0.2, 0.52, 0.8}) {
            WaveTrain t = compute_wavetrain(a, s, p);
            // The tail gate is symmetric about the well, so the mean shift and even harmonics vanish.
            for (size_t n = 0; n < t.coeffs.size(); n += 2) CHECK(std::abs(t.coeffs[n]) <= 1e-14);
            // Odd harmonics decay geometrically.
            std::vector<double> xs, ys;
            for (size_t n = 3; n < t.coeffs.size(); n += 2)
                if (std::abs(t.coeffs[n]) > 1e-15) {
                    xs.push_back(static_cast<double>(n));
                    ys.push_back(std::log(std::abs(t.coeffs[n])));
                }
            REQUIRE(xs.size() >= 3);
            double mx = 0, my = 0;
            for (size_t i = 0; i < xs.size(); ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= xs.size();
            my /= xs.size();
            double sxy = 0, sxx = 0;
            for (size_t i = 0; i < xs.size(); ++i) {
                sxy += (xs[i] - mx) * (ys[i] - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            double rho = std::exp(sxy / sxx);
            CHECK(rho < 1.0);
            for (size_t i = 0; i < xs.size(); ++i)
                CHECK(std::abs(t.coeffs[static_cast<size_t>(xs[i])]) <=
                      std::abs(t.coeffs[3]) * std::pow(rho, xs[i] - 3) * 1e3);
        }
    }
}

TEST_CASE("amplitude recovery from the train's own orbit", "[wavetrain]") {
    const double eps = 0.01;
    ModelParams p = make_params(1.0, eps);
    WaveTrain t = compute_wavetrain(0.6, fixtures::spec(eps), p);
    double acc = 0.0;
    const int n = 256;
    for (int k = 0; k < n; ++k) {
        double th = 2 * pi * k / n;
        double v = t.eval(th), dv = t.omega * t.eval(th, 1);
        acc += std::hypot(v - 1.0, dv / p.k0);
    }
    CHECK(std::abs(acc / n - t.a) <= 10 * eps);
}

TEST_CASE("period map converges to the harmonic period", "[wavetrain]") {
    double s1, s3, s10;
    double m1 = max_abs_P_minus_4(1e-3, &s1), m3 = max_abs_P_minus_4(3e-3, &s3), m10 = max_abs_P_minus_4(1e-2, &s10);
    CHECK(m1 < m3);
    CHECK(m3 < m10);
    CHECK(s1 < s3);
    CHECK(s3 < s10);
    // Measured ratio is about 10.16: the shift is linear in eps with a same-sign quadratic term.
    CHECK(m10 <= 10 * m1);
}

TEST_CASE("period map and train errors", "[wavetrain][errors]") {
    ModelParams p = make_params(1.0, 1e-3);
    PotentialSpec s = fixtures::spec(1e-3);
    CHECK_THROWS_WITH(compute_wavetrain(0.5, s, p, 6), "wavetrain: N must be >= 8");
    CHECK_THROWS_WITH(compute_wavetrain(1.2, s, p), "wavetrain: amplitude must lie in (0, 1)");
    CHECK_THROWS_WITH(period_map({0.3, 0.3005}, s, p), "period_map: amplitude grid must increase with spacing >= 1e-3");
}

TEST_CASE("train cache interpolation and serialisation", "[wavetrain]") {
    const FamilyContext& ctx = fixtures::context(1.0, 1e-2);
    const TrainCache& c = ctx.cache;
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> A(0.1, 0.9);
    for (int t = 0; t < 6; ++t) {
        double a = A(rng);
        WaveTrain fresh = compute_wavetrain(a, ctx.spec, ctx.p);
        WaveTrain in = c.at(a);
        CHECK_THAT(in.omega, WithinAbs(fresh.omega, 1e-12));
        for (size_t n = 0; n < fresh.coeffs.size(); ++n) CHECK_THAT(in.coeffs[n], WithinAbs(fresh.coeffs[n], 1e-12));
    }
    TrainCache back = TrainCache::from_csv(c.to_csv(), ctx.p, c.a_lo(), c.a_hi());
    CHECK(back.to_csv() == c.to_csv());
    CHECK(back.omega(0.37) == c.omega(0.37));
    CHECK_THROWS_WITH(c.at(0.95), "amplitude window exceeded");
}

TEST_CASE("point map H1", "[wavetrain]") {
    SECTION("identity without smoothing") {
        const FamilyContext& ctx = fixtures::context(1.0, 0.0);
        for (double u : {0.05, 0.5, 1.3, 1.7})
            for (double v : {-0.6, 0.0, 0.4}) CHECK_THAT(H1_eval(u, v, ctx.p, ctx.cache), WithinAbs(u, 1e-15));
    }
    const FamilyContext& ctx = fixtures::context(1.0, 1e-2);
    const ModelParams& p = ctx.p;
    SECTION("odd and pinned near zero") {
        std::mt19937 rng(2);
        std::uniform_real_distribution<double> U(-1.8, 1.8), V(-1.0, 1.0);
        for (int t = 0; t < 200; ++t) {
            double u = U(rng), v = V(rng);
            CHECK_THAT(H1_eval(-u, -v, p, ctx.cache), WithinAbs(-H1_eval(u, v, p, ctx.cache), 1e-15));
        }
        for (double u : {-0.099, 0.0, 0.05, 0.0999}) CHECK(H1_eval(u, 0.3, p, ctx.cache) == u);
    }
    SECTION("reproduces the train along the harmonic orbit") {
        for (double a : {0.3, 0.52, 0.7}) {
            WaveTrain t = compute_wavetrain(a, ctx.spec, p);
            for (double th = 0.0; th < 2 * pi; th += 0.25)
                CHECK_THAT(H1_eval(1 + a * std::cos(th), -a * p.k0 * std::sin(th), p, ctx.cache),
                           WithinAbs(t.eval(th), 1e-10));
            double sum = 1.0;
            for (double b : t.coeffs) sum += b;
            CHECK_THAT(H1_eval(1 + a, 0.0, p, ctx.cache), WithinAbs(sum, 1e-10));
        }
    }
    SECTION("strict window") {
        H1Options o;
        o.strict = true;
        CHECK_THROWS_WITH(H1_eval(1.95, 0.0, p, ctx.cache, o), "amplitude window exceeded");
    }
}
