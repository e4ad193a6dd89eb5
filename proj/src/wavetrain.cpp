#include "fkwave/wavetrain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace fkwave {

double WaveTrain::eval(double theta, int deriv) const {
    double s = deriv == 0 ? well + coeffs[0] : 0.0;
    for (size_t n = 1; n < coeffs.size(); ++n)
        s += coeffs[n] * std::pow(static_cast<double>(n), deriv) * std::cos(n * theta + deriv * pi / 2);
    return s;
}

double WaveTrain::period() const { return 2 * pi / omega; }

Tail WaveTrain::as_tail(double phase) const {
    Tail t;
    t.mean = well + coeffs[0];
    t.freq = omega;
    for (size_t n = 1; n < coeffs.size(); ++n) {
        t.cos_amp.push_back(coeffs[n] * std::cos(n * phase));
        t.sin_amp.push_back(-coeffs[n] * std::sin(n * phase));
    }
    return t;
}

WaveTrain compute_wavetrain(double a, const PotentialSpec& spec, const ModelParams& p, int N, int well) {
    if (N < 8) throw Error(ErrorKind::config, "wavetrain: N must be >= 8");
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::config, "wavetrain: amplitude must lie in (0, 1)");
    if (well != 1 && well != -1) throw Error(ErrorKind::config, "wavetrain: well must be +1 or -1");
    const int M = 512;
    std::vector<std::vector<double>> cosm(N + 1, std::vector<double>(M));
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j < M; ++j) cosm[n][j] = std::cos(n * 2 * pi * j / M);

    WaveTrain t;
    t.well = well;
    t.a = a;
    t.epsilon = spec.epsilon;
    t.omega = p.k0;
    t.coeffs.assign(N + 1, 0.0);
    t.coeffs[1] = a;

    // unknown index: 0 -> omega, 1 -> b0, m >= 2 -> b_m
    auto col_coeff = [](int m) { return m == 0 ? -1 : (m == 1 ? 0 : m); };
    std::vector<double> v(M), F(M), G(M);
    Eigen::VectorXd E(N + 1);
    Eigen::MatrixXd J(N + 1, N + 1);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        for (int j = 0; j < M; ++j) {
            double s = well + t.coeffs[0];
            for (int n = 1; n <= N; ++n) s += t.coeffs[n] * cosm[n][j];
            v[j] = s;
            F[j] = spec.dpsi(s, 0);
            G[j] = spec.dpsi(s, 1);
        }
        auto proj = [&](const std::vector<double>& f, int n, const std::vector<double>* w) {
            double s = 0.0;
            for (int j = 0; j < M; ++j) s += f[j] * cosm[n][j] * (w ? (*w)[j] : 1.0);
            return s * (n == 0 ? 1.0 : 2.0) / M;
        };
        for (int n = 0; n <= N; ++n) {
            double cn = n == 0 ? well + t.coeffs[0] : t.coeffs[n];
            E(n) = dispersion_D(n * t.omega, p) * cn - p.alpha * proj(F, n, nullptr);
        }
        for (int n = 0; n <= N; ++n) {
            J(n, 0) = n == 0 ? 0.0 : n * dispersion_Dprime(n * t.omega, p) * t.coeffs[n];
            for (int m = 1; m <= N; ++m) {
                int cm = col_coeff(m);
                std::vector<double> gc(M);
                for (int j = 0; j < M; ++j) gc[j] = G[j] * cosm[cm][j];
                J(n, m) = (n == cm ? dispersion_D(n * t.omega, p) : 0.0) - p.alpha * proj(gc, n, nullptr);
            }
        }
        Eigen::VectorXd step = J.partialPivLu().solve(E);
        if (!step.allFinite()) break;
        t.omega -= step(0);
        t.coeffs[0] -= step(1);
        for (int m = 2; m <= N; ++m) t.coeffs[m] -= step(m);
        t.newton_iterations = it + 1;
        if (!std::isfinite(t.omega) || std::abs(t.omega - p.k0) > 0.5) break;
        if (step.cwiseAbs().maxCoeff() < 1e-14 || E.cwiseAbs().maxCoeff() < 1e-15) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(ErrorKind::numerical, "reduce epsilon or enlarge N");
    for (int n = 0; n <= N; ++n) {
        if (n == 1) continue;
        if (std::abs(dispersion_D(n * t.omega, p)) < 0.1)
            throw Error(ErrorKind::numerical, "amplitude/speed outside validated window");
    }
    t.residual_sup = train_residual(t, spec, p, 64);
    if (t.residual_sup > 1e-9) throw Error(ErrorKind::numerical, "reduce epsilon or enlarge N");
    return t;
}

double train_residual(const WaveTrain& t, const PotentialSpec& spec, const ModelParams& p, int samples) {
    double worst = 0.0;
    const double c2 = p.c * p.c, w = t.omega;
    for (int j = 0; j < samples; ++j) {
        double th = 2 * pi * j / samples;
        double v = t.eval(th);
        double lap = t.eval(th + w) - 2 * v + t.eval(th - w);
        double r = c2 * w * w * t.eval(th, 2) - lap + p.alpha * v - p.alpha * spec.dpsi(v, 0);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

std::vector<PeriodRow> period_map(const std::vector<double>& a_grid, const PotentialSpec& spec, const ModelParams& p,
                                  int N) {
    for (size_t i = 1; i < a_grid.size(); ++i)
        if (a_grid[i] - a_grid[i - 1] < 1e-3 - 1e-15)
            throw Error(ErrorKind::config, "period_map: amplitude grid must increase with spacing >= 1e-3");
    std::vector<PeriodRow> rows(a_grid.size());
    for (size_t i = 0; i < a_grid.size(); ++i) {
        rows[i].a = a_grid[i];
        rows[i].P = compute_wavetrain(a_grid[i], spec, p, N).period();
    }
    const size_t n = rows.size();
    for (size_t i = 0; i < n && n > 1; ++i) {
        size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? i : i + 1;
        rows[i].dP_da = (rows[hi].P - rows[lo].P) / (rows[hi].a - rows[lo].a);
    }
    return rows;
}

TrainCache::TrainCache(const PotentialSpec& spec, const ModelParams& p, double a_lo, double a_hi, int N, int nodes)
    : a_lo_(a_lo), a_hi_(a_hi), eps_(spec.epsilon), N_(N), p_(p) {
    if (!(0.0 < a_lo && a_lo < a_hi && a_hi < 1.0)) throw Error(ErrorKind::config, "train cache: need 0 < a1 < a2 < 1");
    if (nodes < 3) throw Error(ErrorKind::config, "train cache: need at least 3 nodes");
    x_.resize(nodes);
    for (int k = 0; k < nodes; ++k) x_[k] = std::cos(pi * k / (nodes - 1));
    trains_.resize(nodes);
    std::vector<std::string> errors(nodes);
    unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < hw; ++w) {
        pool.emplace_back([&, w] {
            for (int k = static_cast<int>(w); k < nodes; k += static_cast<int>(hw)) {
                double a = 0.5 * (a_lo_ + a_hi_) + 0.5 * (a_hi_ - a_lo_) * x_[k];
                try {
                    trains_[k] = compute_wavetrain(a, spec, p, N);
                } catch (const std::exception& e) {
                    errors[k] = e.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error(ErrorKind::numerical, e);
    finish();
}

void TrainCache::finish() {
    const int nodes = static_cast<int>(trains_.size());
    bw_.resize(nodes);
    for (int k = 0; k < nodes; ++k) bw_[k] = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == nodes - 1) ? 0.5 : 1.0);
    omega_.resize(nodes);
    coeff_.assign(N_ + 1, std::vector<double>(nodes));
    for (int k = 0; k < nodes; ++k) {
        omega_[k] = trains_[k].omega;
        for (int n = 0; n <= N_; ++n) coeff_[n][k] = trains_[k].coeffs[n];
    }
}

double TrainCache::interp(const std::vector<double>& vals, double a) const {
    double x = (2 * a - a_lo_ - a_hi_) / (a_hi_ - a_lo_);
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < x_.size(); ++k) {
        double d = x - x_[k];
        if (d == 0.0) return vals[k];
        double w = bw_[k] / d;
        num += w * vals[k];
        den += w;
    }
    return num / den;
}

double TrainCache::omega(double a) const {
    if (a < a_lo_ - 1e-12 || a > a_hi_ + 1e-12) throw Error(ErrorKind::numerical, "amplitude window exceeded");
    return interp(omega_, a);
}

WaveTrain TrainCache::at(double a) const {
    if (a < a_lo_ - 1e-12 || a > a_hi_ + 1e-12) throw Error(ErrorKind::numerical, "amplitude window exceeded");
    WaveTrain t;
    t.well = 1;
    t.a = a;
    t.epsilon = eps_;
    t.omega = interp(omega_, a);
    t.coeffs.resize(N_ + 1);
    for (int n = 0; n <= N_; ++n) t.coeffs[n] = n == 1 ? a : interp(coeff_[n], a);
    for (const auto& tr : trains_) t.residual_sup = std::max(t.residual_sup, tr.residual_sup);
    return t;
}

std::string TrainCache::to_csv() const {
    std::ostringstream os;
    os << "a,omega";
    for (int n = 0; n <= N_; ++n) os << ",b" << n;
    os << "\n";
    char buf[64];
    for (const auto& t : trains_) {
        std::snprintf(buf, sizeof buf, "%.17g", t.a);
        os << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", t.omega);
        os << buf;
        for (double b : t.coeffs) {
            std::snprintf(buf, sizeof buf, ",%.17g", b);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

TrainCache TrainCache::from_csv(const std::string& text, const ModelParams& p) {
    std::istringstream is(text);
    std::string line;
    TrainCache c;
    c.p_ = p;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
        if (f.size() < 4) throw Error(ErrorKind::numerical, "train cache: malformed row");
        WaveTrain t;
        t.a = f[0];
        t.omega = f[1];
        t.coeffs.assign(f.begin() + 2, f.end());
        c.trains_.push_back(t);
    }
    if (c.trains_.size() < 3) throw Error(ErrorKind::numerical, "train cache: too few rows");
    c.N_ = static_cast<int>(c.trains_.front().coeffs.size()) - 1;
    const int nodes = static_cast<int>(c.trains_.size());
    c.a_hi_ = c.trains_.front().a;
    c.a_lo_ = c.trains_.back().a;
    c.eps_ = p.epsilon;
    c.x_.resize(nodes);
    for (int k = 0; k < nodes; ++k) c.x_[k] = std::cos(pi * k / (nodes - 1));
    c.finish();
    return c;
}

TrainCache TrainCache::from_csv(const std::string& text, const ModelParams& p, double a_lo, double a_hi) {
    TrainCache c = from_csv(text, p);
    const double tol = 1e-12 * (a_hi - a_lo);
    if (std::abs(c.a_lo_ - a_lo) > tol || std::abs(c.a_hi_ - a_hi) > tol)
        throw Error(ErrorKind::numerical, "train cache: amplitude window mismatch");
    c.a_lo_ = a_lo;
    c.a_hi_ = a_hi;
    return c;
}

double H1_eval(double u, double v, const ModelParams& p, const TrainCache& cache, const H1Options& opt) {
    if (u < 0.0) return -H1_eval(-u, -v, p, cache, opt);
    const double half = 0.5 * opt.eps0;
    if (u < half) return u;
    double S = smoothstep5((u - half) / half);
    double a = std::hypot(u - 1.0, v / p.k0);
    if (a < opt.a1 || a > opt.a2) {
        if (opt.strict) throw Error(ErrorKind::numerical, "amplitude window exceeded");
        return u;
    }
    double chi = smoothstep5((a - opt.a1) / opt.taper) * smoothstep5((opt.a2 - a) / opt.taper);
    if (chi == 0.0) return u;
    double th = std::atan2(-v / (a * p.k0), (u - 1.0) / a);
    WaveTrain t = cache.at(a);
    double d = t.coeffs[0];
    for (size_t n = 2; n < t.coeffs.size(); ++n) d += t.coeffs[n] * std::cos(n * th);
    return u + S * chi * d;
}

}  // namespace fkwave
