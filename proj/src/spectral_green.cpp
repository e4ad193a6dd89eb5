#include "fkwave/spectral_green.hpp"

#include "fkwave/potential.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

namespace fkwave {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

bool decaying(const std::optional<Tail>& t) {
    return !t || (std::abs(t->mean) <= 1e-14 && !t->oscillates());
}

double moment(const GridProfile& Q, const ModelParams& p, bool use_sin) {
    if (!decaying(Q.left) || !decaying(Q.right)) throw Error(ErrorKind::numerical, "moment undefined");
    double s = 0.0;
    for (int i = 0; i < Q.n(); ++i) {
        double x = Q.x(i);
        s += Q.values[i] * (use_sin ? std::sin(p.k0 * x) : std::cos(p.k0 * x));
    }
    return s * Q.h();
}

// Running integral of g over [x_0, x_i], cubic cell rule, zero outside the grid.
std::vector<double> cumulative(const std::vector<double>& g, double h) {
    const int n = static_cast<int>(g.size());
    auto G = [&](int i) { return (i < 0 || i >= n) ? 0.0 : g[i]; };
    std::vector<double> c(n, 0.0);
    for (int i = 0; i + 1 < n; ++i)
        c[i + 1] = c[i] + h / 1440.0 *
                              (11.0 * G(i - 2) - 93.0 * G(i - 1) + 802.0 * G(i) + 802.0 * G(i + 1) -
                               93.0 * G(i + 2) + 11.0 * G(i + 3));
    return c;
}

Tail zero_tail() { return Tail{}; }

}  // namespace

double GreenKernel::H_at(double xx) const {
    double analytic = smooth_A / (2 * smooth_kappa) * std::exp(-smooth_kappa * std::abs(xx));
    const int n = static_cast<int>(x.size());
    double pos = (xx - x.front()) / dx;
    long i0 = static_cast<long>(std::floor(pos));
    if (i0 < 3 || i0 + 4 >= n) return analytic;
    std::vector<double> xs(6), vs(6);
    for (int j = 0; j < 6; ++j) {
        xs[j] = x[i0 - 2 + j];
        vs[j] = H[i0 - 2 + j] - smooth_A / (2 * smooth_kappa) * std::exp(-smooth_kappa * std::abs(xs[j]));
    }
    std::vector<double> w = fd_weights(xx, xs, 0);
    double s = analytic;
    for (int j = 0; j < 6; ++j) s += w[j] * vs[j];
    return s;
}

double H_hat_eval(double k, const ModelParams& p) {
    const double k0 = p.k0, c2 = p.c * p.c;
    const double D1 = -2 * c2 * k0 + 2 * std::sin(k0);
    const double fc = D1 / (2 * k0);
    double a = std::abs(k);
    double t = a - k0;
    if (std::abs(t) < 1e-3) {
        const double D2 = -2 * c2 + 2 * std::cos(k0), D3 = -2 * std::sin(k0), D4 = -2 * std::cos(k0),
                     D5 = 2 * std::sin(k0);
        double d = D1 + D2 * t / 2 + D3 * t * t / 6 + D4 * t * t * t / 24 + D5 * t * t * t * t / 120;
        double phi = D1 + fc * t;
        double num = (fc - D2 / 2) - D3 * t / 6 - D4 * t * t / 24 - D5 * t * t * t / 120;
        return num / (d * phi);
    }
    return 1.0 / dispersion_D(a, p) - 1.0 / (fc * (a * a - k0 * k0));
}

GreenKernel kernel_from_samples(const ModelParams& p, double k_max, int n_k, std::vector<double> H_hat) {
    if (k_max < 40.0) throw Error(ErrorKind::config, "kernel: k_max must be >= 40");
    if (n_k < (1 << 14) || (n_k & (n_k - 1)) != 0)
        throw Error(ErrorKind::config, "kernel: n_k must be a power of two >= 2^14");
    if (static_cast<int>(H_hat.size()) != n_k) throw Error(ErrorKind::config, "kernel: sample count mismatch");
    GreenKernel K;
    K.p = p;
    K.k_max = k_max;
    K.n_k = n_k;
    const double dk = 2 * k_max / n_k;
    K.k.resize(n_k);
    for (int j = 0; j < n_k; ++j) K.k[j] = -k_max + j * dk;
    K.H_hat = std::move(H_hat);
    const double D1 = dispersion_Dprime(p.k0, p);
    K.f_coeff = D1 / (2 * p.k0);
    K.smooth_A = -1.0 / (p.c * p.c) - 2 * p.k0 / D1;
    const double A = K.smooth_A, kap = K.smooth_kappa;

    fftw_complex* buf = fftw_alloc_complex(n_k);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n_k, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (int j = 0; j < n_k; ++j) {
        int jj = ((j - n_k / 2) % n_k + n_k) % n_k;  // centred index -> FFT order
        double kk = K.k[j];
        buf[jj][0] = K.H_hat[j] - A / (kk * kk + kap * kap);
        buf[jj][1] = 0.0;
    }
    fftw_execute(plan);
    K.dx = 2 * pi / (n_k * dk);
    K.x.resize(n_k);
    K.H.resize(n_k);
    for (int m = 0; m < n_k; ++m) {
        int mm = ((m - n_k / 2) % n_k + n_k) % n_k;
        double xx = (m - n_k / 2) * K.dx;
        K.x[m] = xx;
        K.H[m] = dk / (2 * pi) * buf[mm][0] + A / (2 * kap) * std::exp(-kap * std::abs(xx));
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);

    // Exponential rate from the part of the right half that sits above the round-off floor.
    double hmax = 0.0;
    for (double v : K.H) hmax = std::max(hmax, std::abs(v));
    int m0 = n_k / 2, m_end = m0;
    while (m_end + 1 < n_k && std::abs(K.H[m_end + 1]) > 1e-10 * hmax) ++m_end;
    int m_start = m0 + (m_end - m0) / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int m = m_start; m <= m_end; ++m) {
        double xx = K.x[m], yy = std::log(std::abs(K.H[m]));
        sx += xx;
        sy += yy;
        sxx += xx * xx;
        sxy += xx * yy;
        ++cnt;
    }
    double slope = cnt > 1 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    // The fit window still carries faster poles; the nearest one bounds the true rate.
    K.decay_delta = std::min(-slope, spectral_gap_p0(p));
    if (!(K.decay_delta > 0.0)) throw Error(ErrorKind::numerical, "kernel not decaying; increase k_max/n_k");
    return K;
}

GreenKernel build_kernel(const ModelParams& p, double k_max, int n_k) {
    if (k_max < 40.0) throw Error(ErrorKind::config, "kernel: k_max must be >= 40");
    if (n_k < (1 << 14) || (n_k & (n_k - 1)) != 0)
        throw Error(ErrorKind::config, "kernel: n_k must be a power of two >= 2^14");
    const double dk = 2 * k_max / n_k;
    std::vector<double> hh(n_k);
    for (int j = 0; j < n_k; ++j) hh[j] = H_hat_eval(-k_max + j * dk, p);
    return kernel_from_samples(p, k_max, n_k, std::move(hh));
}

double moment_sin(const GridProfile& Q, const ModelParams& p) { return moment(Q, p, true); }
double moment_cos(const GridProfile& Q, const ModelParams& p) { return moment(Q, p, false); }

GridProfile solve_L0(const GridProfile& Q, const ModelParams& p) {
    const int n = Q.n();
    const double k0 = p.k0;
    std::vector<double> gc(n), gs(n);
    for (int i = 0; i < n; ++i) {
        gc[i] = Q.values[i] * std::cos(k0 * Q.x(i));
        gs[i] = Q.values[i] * std::sin(k0 * Q.x(i));
    }
    std::vector<double> C = cumulative(gc, Q.h()), S = cumulative(gs, Q.h());
    const double Ct = C.back(), St = S.back();
    GridProfile r = like(Q);
    double mismatch = 0.0;
    for (int i = 0; i < n; ++i) {
        double sx = std::sin(k0 * Q.x(i)), cx = std::cos(k0 * Q.x(i));
        double left = (sx * C[i] - cx * S[i]) / k0;
        double right = -(sx * (Ct - C[i]) - cx * (St - S[i])) / k0;
        mismatch = std::max(mismatch, std::abs(left - right));
        r.values[i] = left;
    }
    if (mismatch > 1e-6 * l1_norm(Q) + 1e-300) throw Error(ErrorKind::numerical, "solvability violated");
    r.left = zero_tail();
    r.right = zero_tail();
    r.odd = Q.odd;
    return r;
}

GridProfile taper_far_field(const GridProfile& Q, double inner, double outer) {
    GridProfile out = Q;
    const double a = Q.x_max - inner, b = Q.x_max - outer;
    for (int i = 0; i < Q.n(); ++i) {
        double ax = std::abs(Q.x(i));
        if (ax > a) out.values[i] *= smoothstep9((b - ax) / (b - a));
    }
    return out;
}

int padded_period(double x_max) {
    int P = static_cast<int>(std::ceil(2 * x_max + 80.0));
    while (P % 4 != 2) ++P;
    return P;
}

GridProfile apply_Linv(const GridProfile& Q, const GreenKernel& kernel, double tol_lin) {
    const ModelParams& p = kernel.p;
    const double q1 = l1_norm(Q);
    const double ms = moment_sin(Q, p), mc = moment_cos(Q, p);
    if (std::abs(ms) > 1e-8 * q1 + 1e-15 || std::abs(mc) > 1e-8 * q1 + 1e-15)
        throw Error(ErrorKind::numerical, "project first");

    const int P = padded_period(Q.x_max);
    const int N = P * Q.inv_h;
    double* in = fftw_alloc_real(N);
    fftw_complex* out = fftw_alloc_complex(N / 2 + 1);
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(N, in, out, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(N, out, in, FFTW_ESTIMATE);
    }
    std::fill(in, in + N, 0.0);
    const int c = Q.center();
    for (int i = 0; i < Q.n(); ++i) in[((i - c) % N + N) % N] = Q.values[i];
    fftw_execute(fwd);
    // 1/f + H_hat on the grid, i.e. the reciprocal of the grid operator's symbol.
    for (int j = 0; j <= N / 2; ++j) {
        double kj = 2 * pi * j / P;
        double m = 1.0 / grid_symbol(kj, p, Q.inv_h) / N;
        out[j][0] *= m;
        out[j][1] *= m;
    }
    fftw_execute(bwd);
    GridProfile r = like(Q);
    for (int i = 0; i < Q.n(); ++i) r.values[i] = in[((i - c) % N + N) % N];
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    fftw_free(in);
    fftw_free(out);
    r.left = zero_tail();
    r.right = zero_tail();
    r.odd = Q.odd;
    if (Q.odd) {  // remove round-off asymmetry
        const int n = r.n();
        for (int i = 0; i < c; ++i) {
            double a = 0.5 * (r.values[i] - r.values[n - 1 - i]);
            r.values[i] = a;
            r.values[n - 1 - i] = -a;
        }
        r.values[c] = 0.0;
    }

    GridProfile Lr = apply_L(r, p);
    double res = 0.0;
    for (int i = 0; i < r.n(); ++i) res = std::max(res, std::abs(Lr.values[i] - Q.values[i]));
    if (res > tol_lin * (1.0 + sup_norm(Q))) throw Error(ErrorKind::numerical, "resolution insufficient");
    return r;
}

GridProfile apply_Linv_quadrature(const GridProfile& Q, const GreenKernel& kernel) {
    const ModelParams& p = kernel.p;
    GridProfile r0 = solve_L0(Q, p);
    const double D1 = dispersion_Dprime(p.k0, p);
    const double h = Q.h();
    // Truncate the kernel where it drops below 1e-14 of its peak.
    double hmax = 0.0;
    for (double v : kernel.H) hmax = std::max(hmax, std::abs(v));
    double reach = 0.0;
    for (size_t m = 0; m < kernel.x.size(); ++m)
        if (std::abs(kernel.H[m]) >= 1e-14 * hmax) reach = std::max(reach, std::abs(kernel.x[m]));
    const int R = static_cast<int>(std::ceil(reach * Q.inv_h));
    std::vector<double> Hs(2 * R + 1);
    for (int d = -R; d <= R; ++d) Hs[d + R] = kernel.H_at(d * h);
    GridProfile r = like(Q);
    const int n = Q.n();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        int lo = std::max(0, i - R), hi = std::min(n - 1, i + R);
        for (int j = lo; j <= hi; ++j) s += Hs[i - j + R] * Q.values[j];
        r.values[i] = -(2 * p.k0 / D1) * r0.values[i] + s * h;
    }
    r.left = zero_tail();
    r.right = zero_tail();
    r.odd = Q.odd;
    return r;
}

Projection project_sin(const GridProfile& Q, const GridProfile& Luo, const ModelParams& p) {
    Projection pr;
    pr.delta = moment_sin(Q, p) / dispersion_Dprime(p.k0, p);
    pr.Q = Q;
    for (int i = 0; i < Q.n(); ++i) pr.Q.values[i] -= pr.delta * Luo.values[i];
    return pr;
}

}  // namespace fkwave
