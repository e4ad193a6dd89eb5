#pragma once

#include <string>
#include <vector>

#include "fkwave/family.hpp"

namespace fkwave {

enum class CorrectorMode { picard, semi_implicit };

struct CorrectorConfig {
    CorrectorMode mode = CorrectorMode::picard;
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 0.7;
    double rho_guard = 0.2;
};

struct SolveState {
    GridProfile r;
    GridProfile u;  // w_beta - r
    double beta = 0.0;
    int iter = 0;
    std::vector<double> residual_history;
    std::vector<double> moment_history;  // |moment_sin(Q_n)| / ||Q_n||_1
    double K0 = 0.0;
    double rho_guard = 0.2;
    bool flagged = false;  // residual failed to decrease monotonically after iteration 3
    bool converged = false;
};

// c^2 w'' - Delta_D w + alpha w - alpha psi'(w), no tails attached.
GridProfile residual_full(const GridProfile& w, const PotentialSpec& spec, const ModelParams& p);

// L w_beta - alpha psi'(w_beta - r) - alpha psi''(w_beta) r.
GridProfile Gamma(const GridProfile& r, double beta, const FamilyContext& ctx);

// sin-moment of L w_beta - alpha psi'(w_beta - r).
double defect_moment(double beta, const GridProfile& r, const FamilyContext& ctx);

// Root of defect_moment in beta on [-1, 1].
double beta_of_r(const GridProfile& r, const FamilyContext& ctx, double K0);

struct K0Report {
    double K0 = 0.0;
    std::vector<double> betas;
    std::vector<double> slopes;  // d/dbeta of the defect moment
};
K0Report K0_estimate(const FamilyContext& ctx, const std::vector<double>& betas = {-1.0, -0.5, 0.0, 0.5, 1.0});

SolveState solve_corrector(const FamilyContext& ctx, const GreenKernel& kernel, const CorrectorConfig& cfg = {});

// Node-0 only may sit inside the smoothing layer; anything else invalidates the sharp-layer grid model.
void check_layer_resolution(const GridProfile& u, const PotentialSpec& spec);

}  // namespace fkwave
