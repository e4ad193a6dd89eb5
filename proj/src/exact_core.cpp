#include "fkwave/exact_core.hpp"

#include <cmath>

#include "fkwave/family.hpp"
#include "fkwave/potential.hpp"

namespace fkwave {

double lambda_star(const ModelParams& p) {
    double ck = p.c * p.c * p.k0 * p.k0;
    return (ck - 2.0) / (ck - p.k0);
}

Tail asymptotic_up(int side, const ModelParams& p) {
    Tail t;
    t.mean = side;
    t.freq = p.k0;
    t.cos_amp = {-side * lambda_star(p)};
    t.sin_amp = {0.0};
    return t;
}

KinkSet jump_cascade(const ModelParams& p, int n_max, int m_max) {
    const int W = 2 * m_max + 1;
    std::vector<std::vector<double>> J(n_max + 1, std::vector<double>(W, 0.0));
    auto get = [&](int n, int m) { return (m < -m_max || m > m_max) ? 0.0 : J[n][m + m_max]; };
    const double c2 = p.c * p.c;
    for (int n = 0; n + 2 <= n_max; ++n) {
        for (int m = -m_max; m <= m_max; ++m) {
            double s = get(n, m + 1) - (2.0 + p.alpha) * get(n, m) + get(n, m - 1);
            if (n == 0 && m == 0) s += 2.0 * p.alpha;
            J[n + 2][m + m_max] = s / c2;
        }
    }
    KinkSet ks;
    for (int m = -m_max; m <= m_max; ++m) {
        Kink k;
        k.x = m;
        k.jump.resize(n_max + 1);
        bool any = false;
        for (int n = 0; n <= n_max; ++n) {
            k.jump[n] = J[n][m + m_max];
            any = any || k.jump[n] != 0.0;
        }
        if (any) ks.push_back(k);
    }
    return ks;
}

GridProfile baseline_residual(const GridProfile& u, const ModelParams& p) {
    GridProfile Lu = apply_L(u, p);
    for (int i = 0; i < Lu.n(); ++i) {
        double x = u.x(i);
        Lu.values[i] -= p.alpha * (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0));
    }
    Lu.left.reset();
    Lu.right.reset();
    return Lu;
}

HeteroclinicProfile compute_up(const ModelParams& p, const GreenKernel& kernel, double x_max, int inv_h) {
    const double lam = lambda_star(p);
    auto kinks = std::make_shared<const KinkSet>(jump_cascade(p));

    // Odd template: slope-one line near 0 blended into the asymptote on [1/2, 1].
    auto s0 = [&](double x) {
        double a = std::abs(x), sg = x < 0 ? -1.0 : 1.0;
        double w = smoothstep5(2.0 * a - 1.0);
        return (1.0 - w) * x + w * sg * (1.0 - lam * std::cos(p.k0 * x));
    };
    GridProfile s = sample(s0, x_max, inv_h);
    s.left = asymptotic_up(-1, p);
    s.right = asymptotic_up(+1, p);
    s.kinks = kinks;
    s.odd = true;

    FamilyConfig fc;
    GridProfile uo = build_uo(fc, p, x_max, inv_h);
    GridProfile Luo = apply_L(uo, p);

    GridProfile Q0 = baseline_residual(s, p);
    for (double& v : Q0.values) v = -v;
    const double mu = moment_sin(Q0, p) / moment_sin(Luo, p);
    for (int i = 0; i < s.n(); ++i) {
        s.values[i] += mu * uo.values[i];
        Q0.values[i] -= mu * Luo.values[i];
    }
    s.right->cos_amp[0] += mu;
    s.left->cos_amp[0] -= mu;
    Q0.odd = true;

    GridProfile r = apply_Linv(project_sin(taper_far_field(Q0), Luo, p).Q, kernel);
    HeteroclinicProfile hp;
    hp.profile = s;
    for (int i = 0; i < s.n(); ++i) hp.profile.values[i] += r.values[i];
    hp.profile.values[hp.profile.center()] = 0.0;
    hp.lambda_star = lam;
    hp.mu = mu;
    hp.slope0 = first_derivative(hp.profile).values[hp.profile.center()];

    GridProfile res = baseline_residual(hp.profile, p);
    double rs = 0.0;
    for (int i = 0; i < res.n(); ++i)
        if (i != res.center()) rs = std::max(rs, std::abs(res.values[i]));
    hp.residual_sup = rs;

    bool sign_ok = true;
    for (int i = 0; i < s.n(); ++i) {
        double x = s.x(i), u = hp.profile.values[i];
        if (x != 0.0 && !(u * x > 0.0)) sign_ok = false;
    }
    if (!sign_ok || !(hp.slope0 > 0.0) || rs > 1e-6)
        throw Error(ErrorKind::numerical, "baseline construction failed: sign=" + std::to_string(sign_ok) +
                                              " slope0=" + std::to_string(hp.slope0) +
                                              " residual=" + std::to_string(rs));
    return hp;
}

}  // namespace fkwave
