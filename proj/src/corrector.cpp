#include "fkwave/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fkwave {

namespace {

GridProfile odd_decaying(GridProfile g) {
    const int n = g.n();
    for (int i = 0; i < n / 2; ++i) {  // round-off leaves a spurious cos-moment otherwise
        double a = 0.5 * (g.values[i] - g.values[n - 1 - i]);
        g.values[i] = a;
        g.values[n - 1 - i] = -a;
    }
    g.values[n / 2] = 0.0;
    g.left = Tail{};
    g.right = Tail{};
    g.kinks.reset();
    g.odd = true;
    return g;
}

GridProfile minus(const GridProfile& w, const GridProfile& r) {
    GridProfile u = w;
    for (int i = 0; i < u.n(); ++i) u.values[i] -= r.values[i];
    return u;
}

// L w_beta - alpha psi'(w_beta - r) together with w_beta itself.
GridProfile defect(const GridProfile& w, const GridProfile& r, const FamilyContext& ctx) {
    GridProfile Lw = apply_L(w, ctx.p);
    for (int i = 0; i < Lw.n(); ++i)
        Lw.values[i] -= ctx.p.alpha * ctx.spec.dpsi(w.values[i] - r.values[i], 0);
    return odd_decaying(Lw);
}

}  // namespace

void check_layer_resolution(const GridProfile& u, const PotentialSpec& spec) {
    if (spec.epsilon == 0.0) return;
    for (int i = 0; i < u.n(); ++i)
        if (i != u.center() && std::abs(u.values[i]) < spec.epsilon)
            throw Error(ErrorKind::numerical, "smoothing layer spans more than one node; refine grid or reduce epsilon");
}

GridProfile residual_full(const GridProfile& w, const PotentialSpec& spec, const ModelParams& p) {
    GridProfile Lw = apply_L(w, p);
    for (int i = 0; i < Lw.n(); ++i) Lw.values[i] -= p.alpha * spec.dpsi(w.values[i], 0);
    Lw.left.reset();
    Lw.right.reset();
    return Lw;
}

GridProfile Gamma(const GridProfile& r, double beta, const FamilyContext& ctx) {
    GridProfile w = w_beta(beta, ctx);
    GridProfile g = defect(w, r, ctx);
    for (int i = 0; i < g.n(); ++i) g.values[i] -= ctx.p.alpha * ctx.spec.dpsi(w.values[i], 1) * r.values[i];
    return g;
}

double defect_moment(double beta, const GridProfile& r, const FamilyContext& ctx) {
    return moment_sin(defect(w_beta(beta, ctx), r, ctx), ctx.p);
}

double beta_of_r(const GridProfile& r, const FamilyContext& ctx, double K0) {
    auto h = [&](double b) { return defect_moment(b, r, ctx); };
    double lo = -1.0, hi = 1.0, hlo = h(lo), hhi = h(hi);
    if (hlo * hhi > 0.0)
        throw Error(ErrorKind::numerical, "transversality bracket failed (epsilon too large or B too small)");
    if (hlo == 0.0) return lo;
    if (hhi == 0.0) return hi;
    const double target = 1e-10 * K0;
    // Secant steps kept inside the bracket; bisection when a step would leave it.
    double b0 = lo, h0 = hlo, b1 = hi, h1 = hhi;
    double best = lo, hbest = std::abs(hlo);
    for (int it = 0; it < 100; ++it) {
        double b = b1 - h1 * (b1 - b0) / (h1 - h0);
        if (!(b > lo && b < hi) || !std::isfinite(b)) b = 0.5 * (lo + hi);
        double hb = h(b);
        if (std::abs(hb) < hbest) {
            best = b;
            hbest = std::abs(hb);
        }
        if (hb == 0.0 || (std::abs(hb) <= 1e-3 * target) || hi - lo < 1e-15) break;
        if ((hb < 0) == (hlo < 0)) {
            lo = b;
            hlo = hb;
        } else {
            hi = b;
            hhi = hb;
        }
        b0 = b1;
        h0 = h1;
        b1 = b;
        h1 = hb;
    }
    if (hbest > target) throw Error(ErrorKind::numerical, "beta root not resolved");
    return best;
}

K0Report K0_estimate(const FamilyContext& ctx, const std::vector<double>& betas) {
    K0Report rep;
    GridProfile zero = like(ctx.up.profile);
    zero.odd = true;
    const double s = 1e-2;
    double floor = 0.0;
    for (double b : betas) {
        auto m = [&](double bb) { return defect_moment(bb, zero, ctx); };
        double d1 = (m(b + s) - m(b - s)) / (2 * s);
        double d2 = (m(b + s / 2) - m(b - s / 2)) / s;
        double d = (4 * d2 - d1) / 3;
        floor = std::max(floor, std::abs(d - d2));
        rep.betas.push_back(b);
        rep.slopes.push_back(d);
    }
    rep.K0 = std::abs(rep.slopes.front());
    for (double d : rep.slopes) rep.K0 = std::min(rep.K0, std::abs(d));
    bool same_sign = true;
    for (double d : rep.slopes) same_sign = same_sign && (d < 0) == (rep.slopes.front() < 0);
    if (!(rep.K0 > 10 * floor) || !same_sign) throw Error(ErrorKind::numerical, "transversality lost");
    return rep;
}

SolveState solve_corrector(const FamilyContext& ctx, const GreenKernel& kernel, const CorrectorConfig& cfg) {
    const ModelParams& p = ctx.p;
    if (ctx.spec.epsilon > 0.02) throw Error(ErrorKind::config, "corrector requires epsilon <= 0.02");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw Error(ErrorKind::config, "damping must lie in (0, 1]");
    if (cfg.max_iter < 0) throw Error(ErrorKind::config, "max_iter must be non-negative");
    SolveState st;
    st.rho_guard = cfg.rho_guard;
    st.r = odd_decaying(like(ctx.up.profile));
    st.K0 = K0_estimate(ctx).K0;

    for (int n = 0;; ++n) {
        st.beta = beta_of_r(st.r, ctx, st.K0);
        GridProfile w = w_beta(st.beta, ctx);
        GridProfile u = minus(w, st.r);
        check_layer_resolution(u, ctx.spec);
        GridProfile R = residual_full(u, ctx.spec, p);
        st.residual_history.push_back(sup_norm(R));
        st.iter = n;
        st.u = u;
        if (std::getenv("FKWAVE_TRACE"))
            std::fprintf(stderr, "corrector iter %d beta %.6e residual %.3e |r| %.3e\n", n, st.beta,
                         st.residual_history.back(), sup_norm(st.r));
        if (st.residual_history.back() <= cfg.tol) {
            st.converged = true;
            break;
        }
        if (n >= cfg.max_iter) break;

        // beta(r) zeroes this moment in both modes
        GridProfile Q0 = defect(w, st.r, ctx);
        double q1 = l1_norm(Q0);
        st.moment_history.push_back(q1 > 0 ? std::abs(moment_sin(Q0, p)) / q1 : 0.0);

        if (cfg.mode == CorrectorMode::picard) {
            GridProfile Q = taper_far_field(Q0);
            Projection pr = project_sin(Q, ctx.Luo, p);
            GridProfile rn = apply_Linv(pr.Q, kernel);
            for (int i = 0; i < rn.n(); ++i)
                st.r.values[i] = (1 - cfg.damping) * st.r.values[i] + cfg.damping * rn.values[i];
        } else {
            // (L - alpha psi''(u)) d = R by inner fixed point; u <- u - d.
            GridProfile Rq = taper_far_field(odd_decaying(R));
            std::vector<double> G(u.n());
            for (int i = 0; i < u.n(); ++i) G[i] = p.alpha * ctx.spec.dpsi(u.values[i], 1);
            GridProfile d = like(Rq);
            for (int k = 0; k < 100; ++k) {
                GridProfile rhs = Rq;
                for (int i = 0; i < rhs.n(); ++i) rhs.values[i] += G[i] * d.values[i];
                Projection pr = project_sin(rhs, ctx.Luo, p);
                GridProfile dn = apply_Linv(pr.Q, kernel);
                double change = 0.0;
                for (int i = 0; i < dn.n(); ++i) change = std::max(change, std::abs(dn.values[i] - d.values[i]));
                d = dn;
                if (change <= 1e-3 * cfg.tol) break;
            }
            for (int i = 0; i < d.n(); ++i) st.r.values[i] += d.values[i];
        }
        if (sup_norm(st.r) > cfg.rho_guard) throw Error(ErrorKind::numerical, "leave the validated ball: reduce epsilon");
    }
    const auto& h = st.residual_history;
    for (size_t i = 4; i < h.size(); ++i)
        if (!(h[i] < h[i - 1])) st.flagged = true;
    if (!st.converged) throw Error(ErrorKind::numerical, "max_iter exceeded");
    return st;
}

}  // namespace fkwave
