#include "fkwave/family.hpp"

#include <algorithm>
#include <cmath>

namespace fkwave {

namespace {

double binom(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

}  // namespace

double uo_eval(double x, const FamilyConfig& cfg, const ModelParams& p, int deriv) {
    double ax = std::abs(x);
    if (ax <= cfg.x_a) return 0.0;
    const double w = cfg.x_b - cfg.x_a;
    // For x > 0: chi(x) cos(k0 x). The odd extension has derivatives of parity (-1)^(d+1).
    double s = 0.0;
    for (int j = 0; j <= deriv; ++j) {
        double chi = smoothstep9((ax - cfg.x_a) / w, j) / std::pow(w, j);
        if (chi == 0.0) continue;
        int m = deriv - j;
        double cs = std::pow(p.k0, m) * std::cos(p.k0 * ax + m * pi / 2);
        s += binom(deriv, j) * chi * cs;
    }
    if (x < 0) s *= (deriv % 2 == 0) ? -1.0 : 1.0;
    return s;
}

GridProfile build_uo(const FamilyConfig& cfg, const ModelParams& p, double x_max, int inv_h) {
    if (!(0.0 < cfg.x_a && cfg.x_a < cfg.x_b)) throw Error(ErrorKind::config, "cutoff radii must satisfy 0 < x_a < x_b");
    if (cfg.x_b >= 1.0) throw Error(ErrorKind::config, "support must keep L u_o compact in [-2,2]");
    GridProfile g = sample([&](double x) { return uo_eval(x, cfg, p); }, x_max, inv_h);
    Tail r;
    r.freq = p.k0;
    r.cos_amp = {1.0};
    r.sin_amp = {0.0};
    g.right = r;
    g.left = r.scaled(-1.0);
    g.odd = true;
    return g;
}

double orthogonality_constant(const GridProfile& uo, const ModelParams& p) {
    GridProfile Luo = apply_L(uo, p);
    Luo.left = Tail{};
    Luo.right = Tail{};
    double v = moment_sin(Luo, p);
    if (std::abs(v - dispersion_Dprime(p.k0, p)) > 1e-6) throw Error(ErrorKind::invariant, "cutoff or grid defect");
    return v;
}

double amplitude_of_beta(double beta, const FamilyConfig& cfg, const ModelParams& p) {
    double a = std::abs(cfg.B * beta - lambda_star(p));
    if (a < cfg.a1 || a > cfg.a2) throw Error(ErrorKind::config, "enlarge (a1,a2) or shrink B");
    return a;
}

H1Options FamilyContext::h1() const {
    H1Options o;
    o.eps0 = cfg.eps0;
    o.a1 = cfg.a1;
    o.a2 = cfg.a2;
    o.strict = cfg.strict;
    return o;
}

double FamilyContext::amplitude(double beta) const {
    amplitude_of_beta(beta, cfg, p);
    return std::abs(cfg.B * beta + up.profile.right->cos_amp[0]);
}

double FamilyContext::omega_of_beta(double beta) const { return cache.omega(amplitude(beta)); }

FamilyContext make_family_context(const ModelParams& p, const PotentialSpec& spec, const FamilyConfig& cfg,
                                  const GreenKernel& kernel, double x_max, int inv_h) {
    TrainCache cache(spec, p, cfg.a1, cfg.a2, cfg.N, cfg.cache_nodes);
    return make_family_context(p, spec, cfg, kernel, std::move(cache), x_max, inv_h);
}

FamilyContext make_family_context(const ModelParams& p, const PotentialSpec& spec, const FamilyConfig& cfg,
                                  const GreenKernel& kernel, TrainCache cache, double x_max, int inv_h) {
    double lam = lambda_star(p);
    if (!(cfg.a1 < lam - cfg.B && lam + cfg.B < cfg.a2))
        throw Error(ErrorKind::config, "enlarge (a1,a2) or shrink B");
    FamilyContext ctx;
    ctx.p = p;
    ctx.spec = spec;
    ctx.cfg = cfg;
    ctx.up = compute_up(p, kernel, x_max, inv_h);
    ctx.uo = build_uo(cfg, p, x_max, inv_h);
    ctx.Luo = apply_L(ctx.uo, p);
    ctx.Luo.left = Tail{};
    ctx.Luo.right = Tail{};
    ctx.cache = std::move(cache);
    return ctx;
}

GridProfile w_beta(double beta, const FamilyContext& ctx) {
    const ModelParams& p = ctx.p;
    const double a = ctx.amplitude(beta);
    const WaveTrain tr = ctx.cache.at(a);
    const double kappa = tr.omega / p.k0;
    const double Bb = ctx.cfg.B * beta;
    const H1Options opt = ctx.h1();
    const GridProfile& up = ctx.up.profile;

    GridProfile w = like(up);
    const int n = w.n(), c = w.center();
    for (int i = c + 1; i < n; ++i) {
        double xt = kappa * up.x(i);
        double u = eval_at(up, xt, 0) + Bb * uo_eval(xt, ctx.cfg, p, 0);
        double v = eval_at(up, xt, 1) + Bb * uo_eval(xt, ctx.cfg, p, 1);
        double val = H1_eval(u, v, p, ctx.cache, opt);
        w.values[i] = val;
        w.values[n - 1 - i] = -val;
    }
    w.values[c] = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = w.x(i);
        if (x != 0.0 && !(w.values[i] * x > 0.0)) throw Error(ErrorKind::numerical, "family sign property violated");
    }
    // w0 -> 1 + a cos(k0 x + pi) at +infinity, so the right tail is the train at phase pi.
    w.right = tr.as_tail(pi);
    for (double& s : w.right->sin_amp) s = 0.0;
    w.left = w.right->scaled(-1.0);
    w.odd = true;
    w.kinks = up.kinks;
    return w;
}

GridProfile dw_dbeta(double beta, const FamilyContext& ctx, double step) {
    auto diff = [&](double hstep) {
        GridProfile wp = w_beta(beta + hstep, ctx), wm = w_beta(beta - hstep, ctx);
        GridProfile d = like(wp);
        for (int i = 0; i < d.n(); ++i) d.values[i] = (wp.values[i] - wm.values[i]) / (2 * hstep);
        return d;
    };
    GridProfile d1 = diff(step), d2 = diff(0.5 * step);
    GridProfile out = like(d1);
    double noise = 0.0;
    for (int i = 0; i < out.n(); ++i) {
        out.values[i] = (4.0 * d2.values[i] - d1.values[i]) / 3.0;
        noise = std::max(noise, std::abs(out.values[i] - d2.values[i]));
    }
    if (noise > 1e-5) throw Error(ErrorKind::numerical, "tighten caches");
    out.odd = true;
    return out;
}

}  // namespace fkwave
