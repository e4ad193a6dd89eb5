#include "fkwave/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fkwave {

namespace {

// 8th-order central weights for u'' and u' on the 9-point stencil.
constexpr std::array<double, 9> kD2 = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                                       8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
constexpr std::array<double, 9> kD1 = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                                       4.0 / 5,   -1.0 / 5,   4.0 / 105, -1.0 / 280};

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::optional<Tail> derive_tail(const std::optional<Tail>& t, int d) {
    if (!t) return std::nullopt;
    Tail out;
    out.freq = t->freq;
    out.mean = 0.0;
    // Derivatives rotate cos/sin; store the rotated amplitudes explicitly.
    size_t m = std::max(t->cos_amp.size(), t->sin_amp.size());
    out.cos_amp.assign(m, 0.0);
    out.sin_amp.assign(m, 0.0);
    for (size_t j = 0; j < m; ++j) {
        double a = j < t->cos_amp.size() ? t->cos_amp[j] : 0.0;
        double b = j < t->sin_amp.size() ? t->sin_amp[j] : 0.0;
        double w = (j + 1) * t->freq;
        double s = std::pow(w, d);
        for (int r = 0; r < d; ++r) {  // (a cos + b sin)' = w(b cos - a sin)
            double na = b, nb = -a;
            a = na;
            b = nb;
        }
        out.cos_amp[j] = s * a;
        out.sin_amp[j] = s * b;
    }
    return out;
}

// Applies a per-harmonic multiplier to a tail (used for operators diagonal on cos(n f x)).
std::optional<Tail> map_tail(const std::optional<Tail>& t, double mean_factor,
                             const std::function<double(double)>& symbol) {
    if (!t) return std::nullopt;
    Tail out = *t;
    out.mean = mean_factor * t->mean;
    for (size_t j = 0; j < out.cos_amp.size(); ++j) out.cos_amp[j] *= symbol((j + 1) * t->freq);
    for (size_t j = 0; j < out.sin_amp.size(); ++j) out.sin_amp[j] *= symbol((j + 1) * t->freq);
    return out;
}

void apply_kink_correction(const GridProfile& u, GridProfile& out, int order) {
    if (!u.kinks) return;
    const double h = u.h();
    const auto& w = order == 2 ? kD2 : kD1;
    const double scale = order == 2 ? h * h : h;
    for (const Kink& k : *u.kinks) {
        long ic = std::lround((k.x + u.x_max) * u.inv_h);
        for (long i = ic - 5; i <= ic + 5; ++i) {
            if (i < 0 || i >= u.n()) continue;
            double xi = u.x(i);
            if (std::abs(xi - k.x) > 4 * h + 1e-12) continue;
            double st = 0.0;
            for (int j = -4; j <= 4; ++j) st += w[j + 4] * kink_piece(k, u.x(i + j), 0);
            out.values[i] -= st / scale - kink_piece(k, xi, order);
        }
    }
}

}  // namespace

ModelParams make_params(double c, double epsilon, double B, double nu) {
    if (!std::isfinite(c) || c < 0.95 || c > 1.0)
        throw Error(ErrorKind::config, "speed outside admissible range");
    if (!std::isfinite(epsilon) || epsilon < 0.0 || epsilon >= 0.5)
        throw Error(ErrorKind::config, "epsilon out of range");
    if (!(B > 0.0)) throw Error(ErrorKind::config, "family coupling B must be positive");
    if (!(nu < 0.0)) throw Error(ErrorKind::config, "decay rate nu must be negative");
    ModelParams p;
    p.c = c;
    p.k0 = pi / 2;
    p.alpha = c * c * p.k0 * p.k0 - 2.0;
    p.epsilon = epsilon;
    p.B = B;
    p.nu = nu;
    return p;
}

double Tail::eval(double x, int deriv) const {
    double s = deriv == 0 ? mean : 0.0;
    for (size_t j = 0; j < cos_amp.size(); ++j) {
        double w = (j + 1) * freq;
        s += cos_amp[j] * std::pow(w, deriv) * std::cos(w * x + deriv * pi / 2);
    }
    for (size_t j = 0; j < sin_amp.size(); ++j) {
        double w = (j + 1) * freq;
        s += sin_amp[j] * std::pow(w, deriv) * std::sin(w * x + deriv * pi / 2);
    }
    return s;
}

bool Tail::oscillates(double tol) const {
    for (double a : cos_amp)
        if (std::abs(a) > tol) return true;
    for (double a : sin_amp)
        if (std::abs(a) > tol) return true;
    return false;
}

Tail Tail::scaled(double s) const {
    Tail t = *this;
    t.mean *= s;
    for (double& a : t.cos_amp) a *= s;
    for (double& a : t.sin_amp) a *= s;
    return t;
}

double kink_piece(const Kink& k, double x, int d) {
    double y = x - k.x;
    if (y < 0.0) return 0.0;
    double H = y == 0.0 ? 0.5 : 1.0;
    double s = 0.0;
    for (int n = static_cast<int>(k.jump.size()) - 1; n >= d; --n) {
        if (k.jump[n] == 0.0) continue;
        s += k.jump[n] * std::pow(y, n - d) / factorial(n - d);
    }
    return H * s;
}

double GridProfile::at(long i) const {
    if (i >= 0 && i < n()) return values[i];
    const std::optional<Tail>& t = i < 0 ? left : right;
    if (!t) throw Error(ErrorKind::numerical, "untailed margin");
    return t->eval(x(i));
}

GridProfile make_grid(double x_max, int inv_h) {
    if (inv_h < 8) throw Error(ErrorKind::config, "grid: 1/h must be an integer >= 8");
    double steps = x_max * inv_h;
    if (!(x_max > 0) || std::abs(steps - std::round(steps)) > 1e-9)
        throw Error(ErrorKind::config, "grid: x_max must be a multiple of h");
    GridProfile g;
    g.x_max = x_max;
    g.inv_h = inv_h;
    g.values.assign(2 * static_cast<size_t>(std::lround(steps)) + 1, 0.0);
    return g;
}

GridProfile sample(const std::function<double(double)>& f, double x_max, int inv_h) {
    GridProfile g = make_grid(x_max, inv_h);
    for (int i = 0; i < g.n(); ++i) g.values[i] = f(g.x(i));
    return g;
}

GridProfile like(const GridProfile& g) {
    GridProfile out;
    out.x_max = g.x_max;
    out.inv_h = g.inv_h;
    out.values.assign(g.values.size(), 0.0);
    return out;
}

double oddness_defect(const GridProfile& u) {
    double d = 0.0;
    int n = u.n();
    for (int i = 0; i < n; ++i) d = std::max(d, std::abs(u.values[i] + u.values[n - 1 - i]));
    return d;
}

double sup_norm(const GridProfile& u) {
    double s = 0.0;
    for (double v : u.values) s = std::max(s, std::abs(v));
    return s;
}

double l1_norm(const GridProfile& u) {
    double s = 0.0;
    for (double v : u.values) s += std::abs(v);
    return s * u.h();
}

std::vector<double> fd_weights(double z, const std::vector<double>& xs, int order) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> C(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - z;
    C[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, order);
        double c2 = 1.0, c5 = c4;
        c4 = xs[i] - z;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) C[i][k] = c1 * (k * C[i - 1][k - 1] - c5 * C[i - 1][k]) / c2;
                C[i][0] = -c1 * c5 * C[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) C[j][k] = (c4 * C[j][k] - k * C[j][k - 1]) / c3;
            C[j][0] = c4 * C[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = C[i][order];
    return w;
}

GridProfile discrete_laplacian(const GridProfile& u) {
    GridProfile out = like(u);
    const long M = u.inv_h;
    for (long i = 0; i < u.n(); ++i) out.values[i] = u.at(i + M) - 2.0 * u.at(i) + u.at(i - M);
    auto sym = [](double k) { return 2.0 * (std::cos(k) - 1.0); };
    out.left = map_tail(u.left, 0.0, sym);
    out.right = map_tail(u.right, 0.0, sym);
    out.odd = u.odd;
    return out;
}

GridProfile second_derivative(const GridProfile& u) {
    GridProfile out = like(u);
    const double ih2 = static_cast<double>(u.inv_h) * u.inv_h;
    for (long i = 0; i < u.n(); ++i) {
        double s = 0.0;
        for (int j = -4; j <= 4; ++j) s += kD2[j + 4] * u.at(i + j);
        out.values[i] = s * ih2;
    }
    apply_kink_correction(u, out, 2);
    out.left = derive_tail(u.left, 2);
    out.right = derive_tail(u.right, 2);
    out.odd = u.odd;
    return out;
}

GridProfile first_derivative(const GridProfile& u) {
    GridProfile out = like(u);
    for (long i = 0; i < u.n(); ++i) {
        double s = 0.0;
        for (int j = -4; j <= 4; ++j) s += kD1[j + 4] * u.at(i + j);
        out.values[i] = s * u.inv_h;
    }
    apply_kink_correction(u, out, 1);
    out.left = derive_tail(u.left, 1);
    out.right = derive_tail(u.right, 1);
    return out;
}

GridProfile apply_L(const GridProfile& u, const ModelParams& p) {
    GridProfile d2 = second_derivative(u);
    GridProfile out = like(u);
    const long M = u.inv_h;
    const double c2 = p.c * p.c;
    for (long i = 0; i < u.n(); ++i) {
        double lap = u.at(i + M) - 2.0 * u.at(i) + u.at(i - M);
        out.values[i] = c2 * d2.values[i] - lap + p.alpha * u.values[i];
    }
    auto sym = [&p](double k) { return dispersion_D(k, p); };
    out.left = map_tail(u.left, p.alpha, sym);
    out.right = map_tail(u.right, p.alpha, sym);
    out.odd = u.odd;
    return out;
}

double eval_at(const GridProfile& u, double x, int deriv) {
    const double h = u.h();
    if (x < -u.x_max - 1e-12 || x > u.x_max + 1e-12) {
        const std::optional<Tail>& t = x < 0 ? u.left : u.right;
        if (!t) throw Error(ErrorKind::numerical, "untailed margin");
        return t->eval(x, deriv);
    }
    long i0 = static_cast<long>(std::floor((x + u.x_max) * u.inv_h));
    i0 = std::min<long>(i0, u.n() - 1);
    std::vector<double> xs(10), vs(10);
    for (int j = 0; j < 10; ++j) {
        long i = i0 - 4 + j;
        xs[j] = u.x(i);
        vs[j] = u.at(i);
    }
    double add = 0.0;
    if (u.kinks) {
        for (const Kink& k : *u.kinks) {
            if (k.x < xs.front() - h || k.x > xs.back() + h) continue;
            for (int j = 0; j < 10; ++j) vs[j] -= kink_piece(k, xs[j], 0);
            add += kink_piece(k, x, deriv);
        }
    }
    std::vector<double> w = fd_weights(x, xs, deriv);
    double s = add;
    for (int j = 0; j < 10; ++j) s += w[j] * vs[j];
    return s;
}

std::complex<double> dispersion_D(std::complex<double> k, const ModelParams& p) {
    return -p.c * p.c * k * k + 2.0 * (1.0 - std::cos(k)) + p.alpha;
}

std::complex<double> dispersion_Dprime(std::complex<double> k, const ModelParams& p) {
    return -2.0 * p.c * p.c * k + 2.0 * std::sin(k);
}

double dispersion_D(double k, const ModelParams& p) {
    return -p.c * p.c * k * k + 2.0 * (1.0 - std::cos(k)) + p.alpha;
}

double dispersion_Dprime(double k, const ModelParams& p) { return -2.0 * p.c * p.c * k + 2.0 * std::sin(k); }

double grid_symbol(double k, const ModelParams& p, int inv_h) {
    const double h = 1.0 / inv_h;
    double s = kD2[4];
    for (int j = 1; j <= 4; ++j) s += 2.0 * kD2[4 + j] * std::cos(j * k * h);
    return p.c * p.c * s * inv_h * inv_h + 2.0 * (1.0 - std::cos(k)) + p.alpha;
}

std::vector<double> real_roots(const ModelParams& p, double k_max) {
    if (k_max < 3 * p.k0) throw Error(ErrorKind::config, "real_roots: k_max must be >= 3 k0");
    if (!(p.alpha > 0.0)) throw Error(ErrorKind::config, "speed outside admissible range");
    const int samples = std::max(20000, static_cast<int>(k_max * 2000));
    const double dk = 2 * k_max / samples;
    std::vector<double> roots;
    double a = -k_max, fa = dispersion_D(a, p);
    for (int i = 1; i <= samples; ++i) {
        double b = -k_max + i * dk, fb = dispersion_D(b, p);
        if (fa == 0.0) roots.push_back(a);
        else if (fa * fb < 0.0) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                double mid = 0.5 * (lo + hi), fm = dispersion_D(mid, p);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            double r = 0.5 * (lo + hi);
            for (int it = 0; it < 3; ++it) {
                double d = dispersion_Dprime(r, p);
                if (d == 0.0) break;
                double step = dispersion_D(r, p) / d;
                if (std::abs(step) > dk) break;
                r -= step;
            }
            roots.push_back(r);
        }
        a = b;
        fa = fb;
    }
    std::sort(roots.begin(), roots.end());
    if (roots.size() != 2) throw Error(ErrorKind::config, "speed outside admissible range");
    return roots;
}

double spectral_gap_p0(const ModelParams& p) {
    std::vector<std::complex<double>> found;
    for (double re = -30.0; re <= 30.0 + 1e-9; re += 0.5) {
        for (double im = 0.25; im <= 5.0 + 1e-9; im += 0.25) {
            std::complex<double> k(re, im);
            bool ok = false;
            for (int it = 0; it < 100; ++it) {
                std::complex<double> d = dispersion_Dprime(k, p);
                if (std::abs(d) < 1e-300) break;
                std::complex<double> step = dispersion_D(k, p) / d;
                k -= step;
                if (std::abs(step) < 1e-12 * std::max(1.0, std::abs(k))) {
                    ok = true;
                    break;
                }
                if (std::abs(k) > 1e3) break;
            }
            if (!ok || std::abs(dispersion_D(k, p)) > 1e-10) continue;
            if (std::abs(k.imag()) < 1e-8 || std::abs(k.real()) > 30.0 || std::abs(k.imag()) > 5.0) continue;
            k = {k.real(), std::abs(k.imag())};
            bool dup = false;
            for (auto& f : found)
                if (std::abs(f - k) < 1e-6) dup = true;
            if (!dup) found.push_back(k);
        }
    }
    if (found.empty()) throw Error(ErrorKind::numerical, "widen search window");
    double p0 = found.front().imag();
    for (auto& f : found) p0 = std::min(p0, f.imag());
    return p0;
}

}  // namespace fkwave
