#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace fkwave;
using Catch::Matchers::WithinAbs;

TEST_CASE("asymptotic amplitude of the baseline", "[exact_core]") {
    const double k0 = pi / 2;
    const double lam = (k0 * k0 - 2) / (k0 * k0 - k0);
    CHECK_THAT(lambda_star(make_params(1.0)), WithinAbs(lam, 1e-15));
    CHECK_THAT(lambda_star(make_params(1.0)), WithinAbs(0.5213011509, 1e-10));
    for (double c : {0.97, 0.98, 0.99, 1.0}) {
        double l = lambda_star(make_params(c));
        CHECK(l > 0.0);
        CHECK(l < 1.0);
    }
    Tail plus = asymptotic_up(+1, make_params(1.0)), minus = asymptotic_up(-1, make_params(1.0));
    CHECK(plus.mean == 1.0);
    CHECK(minus.mean == -1.0);
    CHECK_THAT(plus.cos_amp[0], WithinAbs(-lam, 1e-15));
    CHECK_THAT(minus.cos_amp[0], WithinAbs(lam, 1e-15));
    CHECK(plus.freq == k0);
}

TEST_CASE("baseline heteroclinic at c = 1", "[exact_core]") {
    const HeteroclinicProfile& up = fixtures::baseline(1.0);
    const GridProfile& u = up.profile;
    const ModelParams p = make_params(1.0);
    CHECK(u.values[u.center()] == 0.0);
    CHECK(oddness_defect(u) <= 1e-10);
    for (int i = 0; i < u.n(); ++i)
        if (i != u.center()) REQUIRE(u.values[i] * u.x(i) > 0.0);
    CHECK(up.slope0 > 0.0);

    TailFitResult tf = fit_tail(u, p.k0);
    CHECK_THAT(tf.mean, WithinAbs(1.0, 1e-6));
    CHECK_THAT(-tf.cos_amp, WithinAbs(up.lambda_star, 1e-3));
    CHECK(std::abs(tf.sin_amp) <= 1e-3);

    GridProfile R = baseline_residual(u, p);
    double off = 0.0;
    for (int i = 0; i < R.n(); ++i)
        if (i != R.center()) off = std::max(off, std::abs(R.values[i]));
    CHECK(off <= 1e-6);
    CHECK(up.residual_sup <= 1e-6);
    // Continuity of the residual across the origin in the discrete sense.
    CHECK(std::abs(R.values[R.center() + 1] - R.values[R.center() - 1]) <= 10 * u.h());
}

TEST_CASE("baseline approaches its asymptote exponentially", "[exact_core]") {
    const HeteroclinicProfile& up = fixtures::baseline(1.0);
    const ModelParams p = make_params(1.0);
    GridProfile d = up.profile;
    for (int i = 0; i < d.n(); ++i) {
        double x = d.x(i);
        if (x != 0.0) d.values[i] -= x > 0 ? up.profile.right->eval(x) : up.profile.left->eval(x);
    }
    double rate = fit_decay_rate(d, 2.0);
    CHECK(rate >= 0.5 * std::min(std::abs(p.nu), spectral_gap_p0(p)));
}

TEST_CASE("baseline is W2,inf on the grid", "[exact_core]") {
    const GridProfile& u = fixtures::baseline(1.0).profile;
    CHECK(sup_norm(u) <= 2.0);
    CHECK(sup_norm(first_derivative(u)) <= 2.0);
    CHECK(sup_norm(second_derivative(u)) <= 5.0);
}

TEST_CASE("baseline at slower speed", "[exact_core]") {
    const HeteroclinicProfile& up = fixtures::baseline(0.97);
    const ModelParams p = make_params(0.97);
    CHECK(up.residual_sup <= 1e-6);
    CHECK(up.slope0 > 0.0);
    TailFitResult tf = fit_tail(up.profile, p.k0);
    CHECK_THAT(-tf.cos_amp, WithinAbs(lambda_star(p), 1e-3));
}

TEST_CASE("jump cascade starts from the sign discontinuity", "[exact_core]") {
    const ModelParams p = make_params(1.0);
    KinkSet ks = jump_cascade(p);
    const Kink* origin = nullptr;
    for (const auto& k : ks)
        if (k.x == 0.0) origin = &k;
    REQUIRE(origin != nullptr);
    // c^2 [u''](0) = 2 alpha from the jump of alpha sgn(u); lower derivatives are continuous.
    CHECK(origin->jump[0] == 0.0);
    CHECK(origin->jump[1] == 0.0);
    CHECK_THAT(origin->jump[2], WithinAbs(2 * p.alpha / (p.c * p.c), 1e-14));
}
