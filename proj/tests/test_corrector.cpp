#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"

using namespace fkwave;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GridProfile odd_bump(const GridProfile& like_me, double x0, double w, double amp) {
    GridProfile g = like(like_me);
    for (int i = 0; i < g.n(); ++i) {
        double x = g.x(i);
        g.values[i] = amp * (fixtures::bump(x, x0, w) - fixtures::bump(x, -x0, w));
    }
    g.left = Tail{};
    g.right = Tail{};
    g.odd = true;
    return g;
}

double max_abs_diff(const GridProfile& a, const GridProfile& b) {
    double d = 0.0;
    for (int i = 0; i < a.n(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

}  // namespace

TEST_CASE("full residual", "[corrector]") {
    SECTION("equilibrium") {
        ModelParams p = make_params(1.0);
        GridProfile one = sample([](double) { return 1.0; }, 60.0, 16);
        Tail t;
        t.mean = 1.0;
        one.left = t;
        one.right = t;
        CHECK(sup_norm(residual_full(one, fixtures::spec(0.0), p)) <= 1e-14);
    }
    SECTION("baseline at zero smoothing") {
        const FamilyContext& ctx = fixtures::context(1.0, 0.0);
        GridProfile R = residual_full(ctx.up.profile, ctx.spec, ctx.p);
        double off = 0.0;
        for (int i = 0; i < R.n(); ++i)
            if (i != R.center()) off = std::max(off, std::abs(R.values[i]));
        CHECK(off <= 1e-6);
    }
    SECTION("wave train") {
        const double eps = 1e-2;
        ModelParams p = make_params(1.0, eps);
        PotentialSpec s = fixtures::spec(eps);
        WaveTrain t = compute_wavetrain(0.5, s, p);
        GridProfile v = sample([&](double x) { return t.eval(t.omega * x); }, 60.0, 16);
        v.right = t.as_tail(0.0);
        v.left = t.as_tail(0.0);
        CHECK(sup_norm(residual_full(v, s, p)) <= 1e-9);
    }
    SECTION("untailed profile") {
        GridProfile g = make_grid(60.0, 16);
        CHECK_THROWS_WITH(residual_full(g, fixtures::spec(0.0), make_params(1.0)), "untailed margin");
    }
}

TEST_CASE("Gamma", "[corrector]") {
    const FamilyContext& ctx = fixtures::context(1.0, 1e-2);
    const double beta = 0.3;
    GridProfile w = w_beta(beta, ctx);
    GridProfile Lw = apply_L(w, ctx.p);
    GridProfile zero = like(w);
    zero.left = Tail{};
    zero.right = Tail{};

    GridProfile G0 = Gamma(zero, beta, ctx);
    for (int i = 0; i < G0.n(); ++i)
        REQUIRE_THAT(G0.values[i], WithinAbs(Lw.values[i] - ctx.p.alpha * ctx.spec.dpsi(w.values[i]), 1e-11));

    GridProfile r = odd_bump(w, 3.0, 1.5, 0.01);
    GridProfile G = Gamma(r, beta, ctx);
    double id = 0.0;
    for (int i = 0; i < G.n(); ++i) {
        double lhs = G.values[i] + ctx.p.alpha * ctx.spec.dpsi(w.values[i], 1) * r.values[i];
        double rhs = Lw.values[i] - ctx.p.alpha * ctx.spec.dpsi(w.values[i] - r.values[i]);
        id = std::max(id, std::abs(lhs - rhs));
    }
    CHECK(id <= 1e-10);

    // Second order in r: doubling r quadruples the remainder, which Taylor bounds by alpha/2 sup|psi'''| r^2.
    GridProfile r2 = odd_bump(w, 3.0, 1.5, 0.02);
    double d1 = max_abs_diff(Gamma(r, beta, ctx), G0), d2 = max_abs_diff(Gamma(r2, beta, ctx), G0);
    REQUIRE(d1 > 0.0);
    CHECK_THAT(d2 / d1, WithinAbs(4.0, 0.2));
    double d3 = 0.0;
    for (int i = 0; i < 20001; ++i) d3 = std::max(d3, std::abs(ctx.spec.dpsi(0.2 + 1.8 * i / 20000.0, 2)));
    CHECK(d1 <= 0.5 * ctx.p.alpha * d3 * sup_norm(r) * sup_norm(r) * 1.01);
}

TEST_CASE("defect moment is linear in beta without smoothing", "[corrector]") {
    const FamilyContext& ctx = fixtures::context(1.0, 0.0);
    GridProfile zero = like(ctx.up.profile);
    zero.left = Tail{};
    zero.right = Tail{};
    const double base = defect_moment(0.0, zero, ctx);
    CHECK(std::abs(base) <= 1e-9);
    for (double b : {-1.0, -0.4, 0.5, 1.0})
        CHECK_THAT(defect_moment(b, zero, ctx) - base, WithinAbs(b * ctx.cfg.B * (2.0 - pi), 1e-8));
    CHECK(std::abs(beta_of_r(zero, ctx, 0.05707)) <= 1e-8);
}

TEST_CASE("transversality constant", "[corrector]") {
    const double limit = 0.05 * (pi - 2.0);
    CHECK_THAT(limit, WithinAbs(0.05707, 1e-5));
    K0Report rep = K0_estimate(fixtures::context(1.0, 1e-3));
    CHECK_THAT(rep.K0, WithinRel(limit, 0.1));
    for (double s : rep.slopes) CHECK_THAT(s, WithinAbs(-0.0571, 1e-3));

    ModelParams p = make_params(1.0, 1e-3);
    FamilyContext fine = make_family_context(p, fixtures::spec(1e-3), FamilyConfig{}, fixtures::kernel(1.0), 60.0, 32);
    CHECK_THAT(K0_estimate(fine).K0, WithinRel(rep.K0, 1e-3));
}

TEST_CASE("beta root against a dense scan", "[corrector]") {
    const FamilyContext& ctx = fixtures::context(1.0, 1e-3);
    const SolveState& st = fixtures::solved(1.0, 1e-3);
    double beta = beta_of_r(st.r, ctx, st.K0);
    CHECK(std::abs(defect_moment(beta, st.r, ctx)) <= 1e-10 * st.K0 * 1.0001);

    const double step = 0.005;
    double prev_b = -1.0, prev_h = defect_moment(-1.0, st.r, ctx), root = 2.0;
    for (int k = 1; k <= 400 && root > 1.5; ++k) {
        double b = -1.0 + k * step, h = defect_moment(b, st.r, ctx);
        if (prev_h * h <= 0.0) {
            // Quadratic through the bracket and the next point.
            double b3 = b + step, h3 = defect_moment(b3, st.r, ctx);
            double lo = prev_b, hi = b;
            auto q = [&](double x) {
                return prev_h * (x - b) * (x - b3) / ((prev_b - b) * (prev_b - b3)) +
                       h * (x - prev_b) * (x - b3) / ((b - prev_b) * (b - b3)) +
                       h3 * (x - prev_b) * (x - b) / ((b3 - prev_b) * (b3 - b));
            };
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (q(lo) * q(mid) <= 0.0 ? hi : lo) = mid;
            }
            root = 0.5 * (lo + hi);
        }
        prev_b = b;
        prev_h = h;
    }
    REQUIRE(root <= 1.0);
    CHECK_THAT(beta, WithinAbs(root, 1e-6));
}

TEST_CASE("solve at zero smoothing is immediate", "[corrector]") {
    const SolveState& st = fixtures::solved(1.0, 0.0);
    CHECK(st.converged);
    CHECK(st.iter == 0);
    CHECK(std::abs(st.beta) <= 1e-10);
    CHECK(sup_norm(st.r) == 0.0);
    CHECK(st.residual_history.back() <= 1e-6);
}

TEST_CASE("solve at small smoothing", "[corrector]") {
    const double eps = 1e-3;
    const FamilyContext& ctx = fixtures::context(1.0, eps);
    const SolveState& st = fixtures::solved(1.0, eps);
    REQUIRE(st.converged);
    CHECK(st.residual_history.back() <= 1e-8);
    CHECK(std::abs(st.beta) <= 5 * eps);
    CHECK(std::abs(st.beta) > 0.0);
    CHECK(sup_norm(st.r) <= 5 * eps);
    CHECK(sup_norm(st.r) <= st.rho_guard);
    CHECK_FALSE(st.flagged);
    CHECK(oddness_defect(st.r) <= 1e-10);
    CHECK(oddness_defect(st.u) <= 1e-10);
    CHECK(fit_decay_rate(st.r) >= 0.5 * std::abs(ctx.p.nu));
    for (double m : st.moment_history) CHECK(m <= 1e-9);
    CHECK(whole_period_mean(st.u, 40.0, 60.0, ctx.period_of_beta(st.beta)) == Catch::Approx(1.0).margin(1e-3));
    CHECK(whole_period_mean(st.u, -60.0, -40.0, ctx.period_of_beta(st.beta)) == Catch::Approx(-1.0).margin(1e-3));
    CHECK(lemma_half_K0_value(st, ctx) <= 0.5 * st.K0);
    check_layer_resolution(st.u, ctx.spec);
}

TEST_CASE("iteration modes agree", "[corrector]") {
    const double eps = 1e-3;
    const SolveState& a = fixtures::solved(1.0, eps, CorrectorMode::picard);
    const SolveState& b = fixtures::solved(1.0, eps, CorrectorMode::semi_implicit);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK_THAT(a.beta, WithinAbs(b.beta, 1e-7));
    CHECK(max_abs_diff(a.r, b.r) <= 1e-7);
    CHECK(b.iter <= a.iter);
}

TEST_CASE("corrector errors", "[corrector][errors]") {
    const FamilyContext& ctx = fixtures::context(1.0, 1e-3);
    const GreenKernel& K = fixtures::kernel(1.0);
    CorrectorConfig cfg;
    cfg.damping = 0.0;
    CHECK_THROWS_WITH(solve_corrector(ctx, K, cfg), "damping must lie in (0, 1]");
    cfg = {};
    cfg.max_iter = -1;
    CHECK_THROWS_WITH(solve_corrector(ctx, K, cfg), "max_iter must be non-negative");
    cfg = {};
    cfg.max_iter = 1;
    CHECK_THROWS_WITH(solve_corrector(ctx, K, cfg), "max_iter exceeded");
    cfg = {};
    cfg.rho_guard = 1e-7;
    CHECK_THROWS_WITH(solve_corrector(ctx, K, cfg), "leave the validated ball: reduce epsilon");

    FamilyContext wide = fixtures::context(1.0, 1e-2);
    wide.spec = fixtures::spec(0.03);
    CHECK_THROWS_WITH(solve_corrector(wide, K, {}), "corrector requires epsilon <= 0.02");

    FamilyContext weak = fixtures::context(1.0, 1e-2);
    weak.cfg.B = 1e-4;
    GridProfile zero = like(weak.up.profile);
    zero.left = Tail{};
    zero.right = Tail{};
    CHECK_THROWS_WITH(beta_of_r(zero, weak, 1.0), "transversality bracket failed (epsilon too large or B too small)");

    // A shallow profile puts many nodes inside the smoothing layer.
    GridProfile flat = sample([](double x) { return 1e-4 * x; }, 60.0, 16);
    CHECK_THROWS_WITH(check_layer_resolution(flat, ctx.spec),
                      "smoothing layer spans more than one node; refine grid or reduce epsilon");
}
