#pragma once

#include <string>
#include <vector>

#include "fkwave/model.hpp"
#include "fkwave/potential.hpp"

namespace fkwave {

// Reversible periodic solution inside one well:
// v(theta) = well + coeffs[0] + a cos(theta) + sum_{n>=2} coeffs[n] cos(n theta), theta = omega x.
struct WaveTrain {
    int well = 1;
    double a = 0.0;
    double omega = 0.0;
    double epsilon = 0.0;
    std::vector<double> coeffs;  // index n; coeffs[1] == a
    double residual_sup = 0.0;
    int newton_iterations = 0;

    double eval(double theta, int deriv = 0) const;  // d^k/dtheta^k
    double period() const;
    // Tail descriptor of v(omega x + phase) for phase in {0, pi}.
    Tail as_tail(double phase) const;
};

WaveTrain compute_wavetrain(double a, const PotentialSpec& spec, const ModelParams& p, int N = 24, int well = 1);

// Full-equation residual sampled at `samples` phases over one period.
double train_residual(const WaveTrain& t, const PotentialSpec& spec, const ModelParams& p, int samples = 64);

struct PeriodRow {
    double a = 0.0;
    double P = 0.0;
    double dP_da = 0.0;
};
std::vector<PeriodRow> period_map(const std::vector<double>& a_grid, const PotentialSpec& spec, const ModelParams& p,
                                  int N = 24);

// Trains on Chebyshev points of [a_lo, a_hi]; omega and every coefficient interpolated in a.
class TrainCache {
public:
    TrainCache() = default;
    TrainCache(const PotentialSpec& spec, const ModelParams& p, double a_lo, double a_hi, int N = 24,
               int nodes = 33);

    WaveTrain at(double a) const;
    double omega(double a) const;
    double a_lo() const { return a_lo_; }
    double a_hi() const { return a_hi_; }
    int harmonics() const { return N_; }
    const std::vector<WaveTrain>& nodes() const { return trains_; }
    double epsilon() const { return eps_; }

    // Rows "a,omega,b0,b1,...,bN" with 17 significant digits.
    std::string to_csv() const;
    static TrainCache from_csv(const std::string& text, const ModelParams& p);
    // Same, with the window endpoints known exactly (the node values carry round-off).
    static TrainCache from_csv(const std::string& text, const ModelParams& p, double a_lo, double a_hi);

private:
    double interp(const std::vector<double>& vals, double a) const;
    void finish();

    double a_lo_ = 0.1, a_hi_ = 0.9, eps_ = 0.0;
    int N_ = 24;
    ModelParams p_;
    std::vector<WaveTrain> trains_;
    std::vector<double> x_;      // nodes on [-1, 1]
    std::vector<double> bw_;     // barycentric weights
    std::vector<double> omega_;  // per node
    std::vector<std::vector<double>> coeff_;  // [n][node]
};

struct H1Options {
    double eps0 = 0.2;
    double a1 = 0.1;
    double a2 = 0.9;
    double taper = 0.1;  // width of the amplitude ramps inside [a1, a2]
    bool strict = false;
};

// Point map from harmonic coordinates (u, v = u') to the anharmonic train value.
double H1_eval(double u, double v, const ModelParams& p, const TrainCache& cache, const H1Options& opt = {});

}  // namespace fkwave
