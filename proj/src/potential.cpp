#include "fkwave/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fkwave/model.hpp"

namespace fkwave {

namespace {

double poly_eval(const std::vector<double>& c, double t) {  // c[k] t^k
    double s = 0.0;
    for (size_t k = c.size(); k-- > 0;) s = s * t + c[k];
    return s;
}

std::vector<double> poly_deriv(std::vector<double> c, int d) {
    for (int r = 0; r < d; ++r) {
        if (c.size() <= 1) return {0.0};
        std::vector<double> n(c.size() - 1);
        for (size_t k = 1; k < c.size(); ++k) n[k - 1] = c[k] * k;
        c = n;
    }
    return c;
}

std::vector<double> poly_integral(const std::vector<double>& c) {
    std::vector<double> n(c.size() + 1, 0.0);
    for (size_t k = 0; k < c.size(); ++k) n[k + 1] = c[k] / (k + 1);
    return n;
}

const std::vector<double>& s9_coeffs() {
    static const std::vector<double> c = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
    return c;
}

double step_poly(const std::vector<double>& c, double t, int d) {
    if (t <= 0.0) return d == 0 ? 0.0 : 0.0;
    if (t >= 1.0) return d == 0 ? 1.0 : 0.0;
    return poly_eval(poly_deriv(c, d), t);
}

// 20-point Gauss-Legendre rule on [-1, 1].
const std::array<std::pair<double, double>, 20>& gauss20() {
    static const auto rule = [] {
        std::array<std::pair<double, double>, 20> r{};
        const int n = 20;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) {
                    r[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
                    break;
                }
            }
        }
        return r;
    }();
    return rule;
}

}  // namespace

double smoothstep5(double t, int d) {
    static const std::vector<double> c = {0, 0, 0, 10, -15, 6};
    return step_poly(c, t, d);
}

double smoothstep9(double t, int d) { return step_poly(s9_coeffs(), t, d); }

double PotentialSpec::bump(double s, int d) const {
    const double r = bump_ramp;
    const double Z = 2.0 - r;
    double a = std::abs(s);
    if (a >= 1.0) return 0.0;
    double sg = s < 0 ? -1.0 : 1.0;
    double fac = std::pow(-sg / r, d);
    return fac * smoothstep9((1.0 - a) / r, d) / Z;
}

double PotentialSpec::tail_q(double u, int d) const {
    double a = std::abs(u);
    if (a <= epsilon || a >= 2.0 - epsilon) return 0.0;
    // Gate (1 - s^2)^5 with s = (|u| - 1)/(1 - eps): symmetric about the well, zero of order 5 at
    // |u| = eps and |u| = 2 - eps.
    static const std::vector<double> gate = {1, 0, -5, 0, 10, 0, -10, 0, 5, 0, -1};
    const double L = 1.0 - epsilon;
    const double sv = (a - 1.0) / L;
    double s = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= d; ++k) {
        if (k > 0) binom = binom * (d - k + 1) / k;
        double g = poly_eval(poly_deriv(gate, k), sv) / std::pow(L, k);
        int m = d - k;
        double sn = std::pow(pi, m) * std::sin(pi * (a - 1.0) + m * pi / 2);
        s += binom * g * sn;
    }
    // q is odd; its d-th derivative has parity (-1)^(d+1).
    if (u < 0) s *= (d % 2 == 0) ? -1.0 : 1.0;
    return s;
}

double PotentialSpec::dpsi(double u, int d) const {
    if (custom) return custom(u, d);
    double base = 0.0;
    if (epsilon == 0.0) {
        if (d == 0) base = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
    } else if (d == 0) {
        // 2 * int_0^{u/eps} bump
        double t = u / epsilon, a = std::abs(t);
        const double r = bump_ramp, Z = 2.0 - r;
        static const std::vector<double> I = poly_integral(s9_coeffs());
        double phi;
        if (a >= 1.0) phi = 0.5;
        else if (a <= 1.0 - r) phi = a / Z;
        else phi = ((1.0 - r) + r * (0.5 - poly_eval(I, (1.0 - a) / r))) / Z;
        base = 2.0 * (t < 0 ? -phi : phi);
    } else {
        base = 2.0 * bump(u / epsilon, d - 1) / std::pow(epsilon, d);
    }
    if (perturbation_gain != 0.0 && epsilon > 0.0) base += perturbation_gain * epsilon * tail_q(u, d);
    return base;
}

double PotentialSpec::psi(double u) const {
    double a = std::abs(u);
    double base;
    if (epsilon == 0.0) {
        base = a;
    } else {
        const double r = bump_ramp, Z = 2.0 - r;
        static const std::vector<double> I = poly_integral(s9_coeffs());
        static const std::vector<double> II = poly_integral(I);
        auto Psi = [&](double t) {
            double t0 = 1.0 - r;
            if (t <= t0) return t * t / (2 * Z);
            double v0 = t0 * t0 / (2 * Z);
            double tt = std::min(t, 1.0);
            double v = v0 + (((1.0 - r) + 0.5 * r) * (tt - t0) + r * r * (poly_eval(II, (1.0 - tt) / r) - poly_eval(II, 1.0))) / Z;
            if (t > 1.0) v += (t - 1.0) / 2;
            return v;
        };
        base = 2.0 * epsilon * Psi(a / epsilon);
    }
    if (perturbation_gain != 0.0 && epsilon > 0.0 && a > epsilon) {
        // int_eps^a q, q smooth on the interval
        const int panels = 8;
        double top = std::min(a, 2.0 - epsilon);
        double acc = 0.0, w = (top - epsilon) / panels;
        for (int k = 0; k < panels; ++k) {
            double lo = epsilon + k * w;
            for (const auto& [xg, wg] : gauss20()) acc += wg * 0.5 * w * tail_q(lo + 0.5 * w * (xg + 1.0), 0);
        }
        base += perturbation_gain * epsilon * acc;
    }
    return base;
}

PotentialSpec make_mollified_sign(double epsilon) {
    if (!std::isfinite(epsilon) || epsilon < 0.0 || epsilon >= 0.5)
        throw Error(ErrorKind::config, "epsilon out of range");
    PotentialSpec s;
    s.epsilon = epsilon;
    s.core_halfwidth = epsilon;
    s.certified_C = 1.0;
    return s;
}

PotentialSpec add_anharmonic_tail(const PotentialSpec& spec, double gain, double C_ceiling) {
    if (!std::isfinite(gain) || std::abs(gain) > 1.0) throw Error(ErrorKind::config, "gain must satisfy |gain| <= 1");
    PotentialSpec s = spec;
    s.perturbation_gain = gain;
    if (gain == 0.0 || spec.epsilon == 0.0) return s;
    CertifyReport rep = certify_bounds(s, C_ceiling);
    if (!rep.pass) throw Error(ErrorKind::config, "perturbation violates potential bounds");
    s.certified_C = std::max(1.0, rep.smallest_C);
    return s;
}

CertifyReport certify_bounds(const PotentialSpec& spec, double C, int grid_n) {
    CertifyReport rep;
    rep.C = C;
    const double eps = spec.epsilon;
    const char* names[] = {"psi2prime_core", "psiprime_outside", "d2_outside", "d3_outside", "d4_outside", "d5_outside"};
    rep.rows.resize(6);
    for (int k = 0; k < 6; ++k) {
        rep.rows[k].condition = names[k];
        rep.rows[k].bound = k == 0 ? (eps > 0 ? 2.0 / eps : 0.0) : C * eps;
    }
    std::vector<double> us;
    us.reserve(grid_n + 4);
    for (int i = 0; i < grid_n; ++i) us.push_back(-3.0 + 6.0 * i / (grid_n - 1));
    us.push_back(eps);
    us.push_back(-eps);
    double worst_ratio = 0.0;
    for (double u : us) {
        bool inside = std::abs(u) < eps;
        if (inside) {
            double v = std::abs(spec.dpsi(u, 1));
            auto& row = rep.rows[0];
            if (v > row.worst_value) {
                row.worst_value = v;
                row.worst_u = u;
            }
            continue;
        }
        double sg = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
        for (int k = 1; k < 6; ++k) {
            double v = k == 1 ? std::abs(spec.dpsi(u, 0) - sg) : std::abs(spec.dpsi(u, k - 1));
            auto& row = rep.rows[k];
            if (v > row.worst_value) {
                row.worst_value = v;
                row.worst_u = u;
            }
            if (eps > 0) worst_ratio = std::max(worst_ratio, v / eps);
        }
    }
    for (auto& row : rep.rows) {
        row.pass = row.worst_value <= row.bound;
        rep.pass = rep.pass && row.pass;
    }
    rep.smallest_C = worst_ratio;
    return rep;
}

}  // namespace fkwave
