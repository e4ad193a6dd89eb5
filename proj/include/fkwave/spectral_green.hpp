#pragma once

#include <vector>

#include "fkwave/model.hpp"

namespace fkwave {

// Regular part of the inverse symbol: 1/D = 1/f + H_hat with f(k) = f_coeff (k^2 - k0^2).
struct GreenKernel {
    ModelParams p;
    double k_max = 40.0;
    int n_k = 1 << 14;
    std::vector<double> k;
    std::vector<double> H_hat;
    std::vector<double> x;
    std::vector<double> H;
    double dx = 0.0;
    double f_coeff = 0.0;
    double decay_delta = 0.0;
    // H_hat = A / (k^2 + kappa^2) + remainder; the first term is transformed analytically.
    double smooth_A = 0.0;
    double smooth_kappa = 2.0;

    double H_at(double xx) const;
};

double H_hat_eval(double k, const ModelParams& p);
GreenKernel build_kernel(const ModelParams& p, double k_max = 40.0, int n_k = 1 << 14);
// Rebuilds the real-space part from cached H_hat samples.
GreenKernel kernel_from_samples(const ModelParams& p, double k_max, int n_k, std::vector<double> H_hat);

double moment_sin(const GridProfile& Q, const ModelParams& p);
double moment_cos(const GridProfile& Q, const ModelParams& p);

// r0 = (1/k0) int_{-inf}^x sin(k0 (x - y)) Q(y) dy, cross-checked against the right-sided formula.
GridProfile solve_L0(const GridProfile& Q, const ModelParams& p);

// Decaying solution of apply_L(r) = Q for Q with vanishing moments. The resonant part
// -(2k0/D'(k0)) r0 and the regular convolution H*Q are both realised on a zero-padded periodic
// extension of the grid with the grid operator's own symbol, so the inverse is exact on the grid.
GridProfile apply_Linv(const GridProfile& Q, const GreenKernel& kernel, double tol_lin = 1e-7);

// Same split evaluated by real-space quadrature with the continuous kernel (cross-check only).
GridProfile apply_Linv_quadrature(const GridProfile& Q, const GreenKernel& kernel);

struct Projection {
    GridProfile Q;
    double delta = 0.0;
};
Projection project_sin(const GridProfile& Q, const GridProfile& Luo, const ModelParams& p);

// Q times a window that is 1 for |x| <= x_max - inner and falls smoothly to 0 at x_max - outer.
// For right-hand sides whose far field is only the stencil's truncation error on an exact periodic
// tail: that part does not decay, so no decaying corrector can absorb it.
GridProfile taper_far_field(const GridProfile& Q, double inner = 15.0, double outer = 5.0);

// Padded period used by apply_Linv; congruent to 2 mod 4 so k0 sits between DFT frequencies.
int padded_period(double x_max);

}  // namespace fkwave
