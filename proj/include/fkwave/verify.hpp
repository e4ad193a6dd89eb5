#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fkwave/corrector.hpp"

namespace fkwave {

enum class NormKind { sup, l2 };

// sup kind: max_{j<=m} sup e^{-nu|x|} |f^(j)|; l2 kind: (int e^{-2 nu|x|} f^2)^{1/2}.
struct WeightedNormSpec {
    double nu = -0.5;
    int m = 0;
    NormKind kind = NormKind::sup;
};

double weighted_norm(const GridProfile& f, const WeightedNormSpec& s);

struct OrthogonalityResult {
    double value = 0.0;
    double deviation = 0.0;
};
OrthogonalityResult orthogonality_check(const ModelParams& p, const FamilyConfig& cfg, double x_max = 60.0,
                                        int inv_h = 16);

// Exponential rate of |f| from per-unit-interval maxima on x >= x_lo, using only points above the
// profile's far-field noise level. Returns 0 when fewer than three usable points exist.
double fit_decay_rate(const GridProfile& f, double x_lo = 1.0);

struct TailFitResult {
    double mean = 0.0;
    double cos_amp = 0.0;
    double sin_amp = 0.0;
    double rms = 0.0;
};
// Least squares of u on {1, cos(freq x), sin(freq x)} over [x_lo, x_hi].
TailFitResult fit_tail(const GridProfile& u, double freq, double x_lo = 40.0, double x_hi = 60.0);

// Mean over the largest whole number of periods that fits in [x0, x1].
double whole_period_mean(const GridProfile& u, double x0, double x1, double period);
// Plain trapezoid mean over [x0, x1] on the grid.
double window_mean(const GridProfile& u, double x0, double x1);

struct LatticeState {
    std::vector<double> pos;  // j = -J..J
    std::vector<double> vel;
    double t = 0.0;
    int J = 0;
};

struct EvolveOptions {
    double T = 40.0;  // signed: negative runs backwards in time
    double dt = 0.005;
    int J = 200;
    double checkpoint_every = 1.0;
    double drift_limit = 1e-6;  // per unit time, relative to |E|
};

struct Checkpoint {
    double t = 0.0;
    std::vector<double> pos;
};

struct EvolveResult {
    std::vector<Checkpoint> history;
    LatticeState final_state;
    double energy0 = 0.0;
    double drift_rate = 0.0;  // fitted slope of (E - boundary work), relative to |energy0|
    long substepped_steps = 0;
};

// Ghost atoms at +-(J+1) follow the profile's travelling tails, u(j - c t).
LatticeState initial_state(const GridProfile& u, const ModelParams& p, int J);
EvolveResult evolve_state(LatticeState s, const GridProfile& u, const ModelParams& p, const PotentialSpec& spec,
                          const EvolveOptions& opt);
EvolveResult evolve_lattice(const GridProfile& u, const ModelParams& p, const PotentialSpec& spec,
                            const EvolveOptions& opt = {});

double propagation_error(const EvolveResult& res, const GridProfile& u, double c);

struct InvariantRow {
    std::string name;
    bool pass = true;
    double value = 0.0;
    double bound = 0.0;
};
struct InvariantReport {
    std::vector<InvariantRow> rows;
    bool pass = true;
    void add(const std::string& name, bool ok, double value, double bound);
};

// |int alpha (psi''(w_beta) - psi''(w_beta - r)) dw/dbeta sin(k0 x) dx|.
double lemma_half_K0_value(const SolveState& st, const FamilyContext& ctx);

InvariantReport invariant_suite(const SolveState& st, const FamilyContext& ctx, double tol = 1e-8);

}  // namespace fkwave
