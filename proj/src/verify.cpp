#include "fkwave/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fkwave {

namespace {

// Interior 9-point derivative where the stencil stays on the grid; margins use tails when present.
GridProfile derivative_any(const GridProfile& f, int order) {
    if (order == 0) return f;
    if (f.left && f.right) return order == 1 ? first_derivative(f) : second_derivative(f);
    GridProfile g = f;
    g.left = Tail{};
    g.right = Tail{};
    GridProfile d = order == 1 ? first_derivative(g) : second_derivative(g);
    for (int i = 0; i < 4 && i < d.n(); ++i) {
        d.values[i] = 0.0;
        d.values[d.n() - 1 - i] = 0.0;
    }
    return d;
}

}  // namespace

double weighted_norm(const GridProfile& f, const WeightedNormSpec& s) {
    if (!(s.nu < 0.0)) throw Error(ErrorKind::config, "weighted norm: nu must be negative");
    if (s.kind == NormKind::l2) {
        double acc = 0.0;
        for (int i = 0; i < f.n(); ++i) {
            double w = std::exp(-s.nu * std::abs(f.x(i))) * f.values[i];
            acc += w * w;
        }
        return std::sqrt(acc * f.h());
    }
    if (s.m < 0 || s.m > 2) throw Error(ErrorKind::config, "weighted norm: m must be 0, 1 or 2");
    double best = 0.0;
    for (int j = 0; j <= s.m; ++j) {
        GridProfile d = derivative_any(f, j);
        for (int i = 0; i < d.n(); ++i)
            best = std::max(best, std::exp(-s.nu * std::abs(d.x(i))) * std::abs(d.values[i]));
    }
    return best;
}

OrthogonalityResult orthogonality_check(const ModelParams& p, const FamilyConfig& cfg, double x_max, int inv_h) {
    OrthogonalityResult r;
    r.value = orthogonality_constant(build_uo(cfg, p, x_max, inv_h), p);
    r.deviation = std::abs(r.value - dispersion_Dprime(p.k0, p));
    return r;
}

double fit_decay_rate(const GridProfile& f, double x_lo) {
    const int K = static_cast<int>(std::floor(f.x_max));
    std::vector<double> env(K, 0.0);
    for (int i = 0; i < f.n(); ++i) {
        double ax = std::abs(f.x(i));
        int k = static_cast<int>(std::floor(ax));
        if (k < K) env[k] = std::max(env[k], std::abs(f.values[i]));
    }
    double noise = 0.0;
    for (int k = std::max(0, K - 10); k < K; ++k) noise = std::max(noise, env[k]);
    double thresh = std::max(100.0 * noise, 1e-300);
    std::vector<double> xs, ys;
    for (int k = static_cast<int>(std::ceil(x_lo)); k < K; ++k) {
        if (env[k] <= thresh) break;
        xs.push_back(k + 0.5);
        ys.push_back(std::log(env[k]));
    }
    if (xs.size() < 3) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = static_cast<double>(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TailFitResult fit_tail(const GridProfile& u, double freq, double x_lo, double x_hi) {
    std::vector<int> idx;
    for (int i = 0; i < u.n(); ++i)
        if (u.x(i) >= x_lo - 1e-12 && u.x(i) <= x_hi + 1e-12) idx.push_back(i);
    Eigen::MatrixXd A(idx.size(), 3);
    Eigen::VectorXd b(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        double x = u.x(idx[r]);
        A(r, 0) = 1.0;
        A(r, 1) = std::cos(freq * x);
        A(r, 2) = std::sin(freq * x);
        b(r) = u.values[idx[r]];
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    TailFitResult t;
    t.mean = c(0);
    t.cos_amp = c(1);
    t.sin_amp = c(2);
    t.rms = std::sqrt((A * c - b).squaredNorm() / std::max<size_t>(1, idx.size()));
    return t;
}

double whole_period_mean(const GridProfile& u, double x0, double x1, double period) {
    int m = static_cast<int>(std::floor((x1 - x0) / period));
    if (m < 1) throw Error(ErrorKind::config, "window shorter than one period");
    const int per = 256;
    const int n = m * per;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += eval_at(u, x0 + period * m * (k + 0.5) / n);  // periodic midpoint rule
    return s / n;
}

double window_mean(const GridProfile& u, double x0, double x1) {
    double s = 0.0, wsum = 0.0;
    for (int i = 0; i < u.n(); ++i) {
        double x = u.x(i);
        if (x < x0 - 1e-12 || x > x1 + 1e-12) continue;
        double w = (std::abs(x - x0) < 1e-12 || std::abs(x - x1) < 1e-12) ? 0.5 : 1.0;
        s += w * u.values[i];
        wsum += w;
    }
    return s / wsum;
}

LatticeState initial_state(const GridProfile& u, const ModelParams& p, int J) {
    LatticeState s;
    s.J = J;
    s.pos.resize(2 * J + 1);
    s.vel.resize(2 * J + 1);
    for (int j = -J; j <= J; ++j) {
        s.pos[j + J] = eval_at(u, j);
        s.vel[j + J] = -p.c * eval_at(u, j, 1);
    }
    return s;
}

namespace {

struct Chain {
    const GridProfile& u;
    const ModelParams& p;
    const PotentialSpec& spec;
    int J;

    double ghost(int side, double t, int deriv = 0) const {
        double x = side * (J + 1) - p.c * t;
        return std::pow(-p.c, deriv) * eval_at(u, x, deriv);
    }
    void force(const std::vector<double>& x, double t, std::vector<double>& F) const {
        const int n = static_cast<int>(x.size());
        double bl = ghost(-1, t), br = ghost(1, t);
        for (int i = 0; i < n; ++i) {
            double l = i == 0 ? bl : x[i - 1];
            double r = i + 1 == n ? br : x[i + 1];
            F[i] = (r - 2 * x[i] + l) - p.alpha * (x[i] - spec.dpsi(x[i], 0));
        }
    }
    double energy(const LatticeState& s) const {
        const int n = static_cast<int>(s.pos.size());
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            double y = s.pos[i];
            e += 0.5 * s.vel[i] * s.vel[i] + p.alpha * (0.5 * y * y - spec.psi(y));
            if (i + 1 < n) e += 0.5 * (s.pos[i + 1] - y) * (s.pos[i + 1] - y);
        }
        double bl = ghost(-1, s.t), br = ghost(1, s.t);
        e += 0.5 * (s.pos[0] - bl) * (s.pos[0] - bl) + 0.5 * (br - s.pos[n - 1]) * (br - s.pos[n - 1]);
        return e;
    }
    // Rate of work done on the chain by the prescribed ghosts.
    double power(const LatticeState& s) const {
        const int n = static_cast<int>(s.pos.size());
        return (ghost(-1, s.t) - s.pos[0]) * ghost(-1, s.t, 1) + (ghost(1, s.t) - s.pos[n - 1]) * ghost(1, s.t, 1);
    }
    bool near_layer(const LatticeState& s, double h) const {
        if (spec.epsilon == 0.0) return false;
        for (size_t i = 0; i < s.pos.size(); ++i)
            if (std::abs(s.pos[i]) < spec.epsilon + 2 * std::abs(s.vel[i] * h)) return true;
        return false;
    }
    void verlet(LatticeState& s, double h, std::vector<double>& F) const {
        const int n = static_cast<int>(s.pos.size());
        force(s.pos, s.t, F);
        for (int i = 0; i < n; ++i) s.vel[i] += 0.5 * h * F[i];
        for (int i = 0; i < n; ++i) s.pos[i] += h * s.vel[i];
        s.t += h;
        force(s.pos, s.t, F);
        for (int i = 0; i < n; ++i) s.vel[i] += 0.5 * h * F[i];
    }
};

}  // namespace

EvolveResult evolve_state(LatticeState s, const GridProfile& u, const ModelParams& p, const PotentialSpec& spec,
                          const EvolveOptions& opt) {
    if (!(opt.dt > 0.0 && opt.dt <= 0.01)) throw Error(ErrorKind::config, "evolve: dt must lie in (0, 0.01]");
    if (!u.left || !u.right) throw Error(ErrorKind::numerical, "untailed margin");
    Chain ch{u, p, spec, s.J};
    const double dir = opt.T < 0 ? -1.0 : 1.0;
    const long steps = std::lround(std::abs(opt.T) / opt.dt);
    const double h = dir * opt.dt;
    const long every = std::max(1L, std::lround(opt.checkpoint_every / opt.dt));
    // Substep count depends only on (dt, eps) so forward and backward runs make the same choice.
    int sub = 1;
    if (spec.epsilon > 0.0)
        while (sub < 4096 && opt.dt / sub > spec.epsilon / 32) sub *= 2;

    EvolveResult res;
    std::vector<double> F(s.pos.size());
    const double t0 = s.t;
    res.energy0 = ch.energy(s);
    double work = 0.0;
    std::vector<double> ts{0.0}, es{res.energy0};
    res.history.push_back({s.t, s.pos});
    for (long k = 1; k <= steps; ++k) {
        LatticeState trial = s;
        ch.verlet(trial, h, F);
        bool fine = sub > 1 && (ch.near_layer(s, h) || ch.near_layer(trial, h));
        if (fine) {
            ++res.substepped_steps;
            const double hs = h / sub;
            for (int q = 0; q < sub; ++q) {
                double p0 = ch.power(s);
                ch.verlet(s, hs, F);
                work += 0.5 * hs * (p0 + ch.power(s));
            }
        } else {
            double p0 = ch.power(s);
            s = trial;
            work += 0.5 * h * (p0 + ch.power(s));
        }
        if (k % every == 0 || k == steps) {
            res.history.push_back({s.t, s.pos});
            ts.push_back(s.t - t0);
            es.push_back(ch.energy(s) - work);
        }
    }
    res.final_state = s;
    if (ts.size() >= 3) {
        double n = static_cast<double>(ts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            sx += ts[i];
            sy += es[i];
            sxx += ts[i] * ts[i];
            sxy += ts[i] * es[i];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        res.drift_rate = std::abs(slope) / std::max(1e-300, std::abs(res.energy0));
    }
    if (res.drift_rate > opt.drift_limit) throw Error(ErrorKind::numerical, "reduce dt");
    return res;
}

EvolveResult evolve_lattice(const GridProfile& u, const ModelParams& p, const PotentialSpec& spec,
                            const EvolveOptions& opt) {
    if (!(spec.epsilon > 0.0)) throw Error(ErrorKind::config, "evolve: requires a smooth force (epsilon > 0)");
    if (opt.J < 1) throw Error(ErrorKind::config, "evolve: J must be positive");
    return evolve_state(initial_state(u, p, opt.J), u, p, spec, opt);
}

double propagation_error(const EvolveResult& res, const GridProfile& u, double c) {
    double worst = 0.0;
    for (const auto& cp : res.history) {
        const int J = static_cast<int>(cp.pos.size() / 2);
        for (int j = -J; j <= J; ++j)
            worst = std::max(worst, std::abs(cp.pos[j + J] - eval_at(u, j - c * cp.t)));
    }
    return worst;
}

void InvariantReport::add(const std::string& name, bool ok, double value, double bound) {
    rows.push_back({name, ok, value, bound});
    pass = pass && ok;
}

double lemma_half_K0_value(const SolveState& st, const FamilyContext& ctx) {
    GridProfile w = w_beta(st.beta, ctx);
    GridProfile dw = dw_dbeta(st.beta, ctx);
    double s = 0.0;
    for (int i = 0; i < w.n(); ++i) {
        double d = ctx.spec.dpsi(w.values[i], 1) - ctx.spec.dpsi(w.values[i] - st.r.values[i], 1);
        s += ctx.p.alpha * d * dw.values[i] * std::sin(ctx.p.k0 * w.x(i));
    }
    return std::abs(s * w.h());
}

InvariantReport invariant_suite(const SolveState& st, const FamilyContext& ctx, double tol) {
    InvariantReport rep;
    const GridProfile& u = st.u;
    const ModelParams& p = ctx.p;
    const double eps = ctx.spec.epsilon;

    rep.add("u_odd", oddness_defect(u) <= 1e-10, oddness_defect(u), 1e-10);
    int bad = 0;
    for (int i = 0; i < u.n(); ++i)
        if (u.x(i) != 0.0 && !(u.values[i] * u.x(i) > 0.0)) ++bad;
    rep.add("sign_property", bad == 0, bad, 0);

    const double P = 2 * pi / u.right->freq;
    double mr = whole_period_mean(u, 40.0, 60.0, P), ml = whole_period_mean(u, -60.0, -40.0, P);
    double mean_dev = std::max(std::abs(mr - 1.0), std::abs(ml + 1.0));
    rep.add("heteroclinic_means", mean_dev <= 1e-3, mean_dev, 1e-3);

    double res = st.residual_history.empty() ? 0.0 : st.residual_history.back();
    rep.add("residual_sup", res <= tol, res, tol);

    double tail = 0.0;
    for (int i = 0; i < u.n(); ++i)
        if (u.x(i) >= 40.0) tail = std::max(tail, std::abs(u.values[i] - u.right->eval(u.x(i))));
    rep.add("tail_train_match", tail <= 1e-6, tail, 1e-6);

    rep.add("r_odd", oddness_defect(st.r) <= 1e-10, oddness_defect(st.r), 1e-10);
    double rs = sup_norm(st.r);
    double rate = fit_decay_rate(st.r);
    double need = 0.5 * std::abs(p.nu);
    // A corrector at round-off level has no measurable decay and needs none.
    bool decay_ok = rs <= 1e-12 || rate >= need;
    rep.add("r_decay_rate", decay_ok, rate, need);
    rep.add("r_within_guard", rs <= st.rho_guard, rs, st.rho_guard);

    rep.add("K0_positive", st.K0 > 0.0, st.K0, 0.0);
    double lemma = lemma_half_K0_value(st, ctx);
    rep.add("lemma_half_K0", lemma <= 0.5 * st.K0, lemma, 0.5 * st.K0);

    double mom = 0.0;
    for (double m : st.moment_history) mom = std::max(mom, m);
    rep.add("moment_consistency", mom <= 1e-9, mom, 1e-9);

    double bb = eps > 0 ? 5 * eps : 1e-10;
    rep.add("beta_scale", std::abs(st.beta) <= bb, std::abs(st.beta), bb);
    rep.add("residual_monotone", !st.flagged, st.flagged ? 1.0 : 0.0, 0.0);
    return rep;
}

}  // namespace fkwave
