#pragma once

#include "fkwave/exact_core.hpp"
#include "fkwave/model.hpp"
#include "fkwave/potential.hpp"
#include "fkwave/spectral_green.hpp"
#include "fkwave/wavetrain.hpp"

namespace fkwave {

struct FamilyConfig {
    double B = 0.05;
    double x_a = 0.25;
    double x_b = 0.75;
    double a1 = 0.1;
    double a2 = 0.9;
    double eps0 = 0.2;
    bool strict = false;
    int N = 24;
    int cache_nodes = 33;
};

// Cutoff mode chi(x) sgn(x) cos(k0 x), chi a C^4 step from x_a to x_b; derivatives up to 4.
double uo_eval(double x, const FamilyConfig& cfg, const ModelParams& p, int deriv = 0);
GridProfile build_uo(const FamilyConfig& cfg, const ModelParams& p, double x_max, int inv_h);

// sin(k0 x)-moment of L u_o; equals D'(k0) for any admissible cutoff.
double orthogonality_constant(const GridProfile& uo, const ModelParams& p);

double amplitude_of_beta(double beta, const FamilyConfig& cfg, const ModelParams& p);

// Everything the family needs, built once per (c, epsilon).
struct FamilyContext {
    ModelParams p;
    PotentialSpec spec;
    FamilyConfig cfg;
    HeteroclinicProfile up;
    GridProfile uo;
    GridProfile Luo;
    TrainCache cache;

    H1Options h1() const;
    // a(beta) measured against the computed baseline's own asymptotic amplitude (equal to lambda* up to
    // the grid's solvability correction).
    double amplitude(double beta) const;
    // omega of the train with amplitude a(beta), and the rescaling factor kappa = omega / k0.
    double omega_of_beta(double beta) const;
    double period_of_beta(double beta) const { return 2 * pi / omega_of_beta(beta); }
};

FamilyContext make_family_context(const ModelParams& p, const PotentialSpec& spec, const FamilyConfig& cfg,
                                  const GreenKernel& kernel, double x_max = 60.0, int inv_h = 16);
// Same, with a train cache supplied by the caller (e.g. loaded from disk).
FamilyContext make_family_context(const ModelParams& p, const PotentialSpec& spec, const FamilyConfig& cfg,
                                  const GreenKernel& kernel, TrainCache cache, double x_max = 60.0,
                                  int inv_h = 16);

// w_beta(x) = H1(w0(kappa x), w0'(kappa x)), w0 = u_p + B beta u_o. Odd; tails are the cached train.
GridProfile w_beta(double beta, const FamilyContext& ctx);

// Central difference in beta with one Richardson step. Tails are not attached.
GridProfile dw_dbeta(double beta, const FamilyContext& ctx, double step = 1e-4);

}  // namespace fkwave
