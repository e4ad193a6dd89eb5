#pragma once

#include "fkwave/model.hpp"
#include "fkwave/spectral_green.hpp"

namespace fkwave {

struct HeteroclinicProfile {
    GridProfile profile;
    double lambda_star = 0.0;
    double slope0 = 0.0;
    double residual_sup = 0.0;
    double mu = 0.0;  // weight of the cutoff mode added to the template
};

double lambda_star(const ModelParams& p);

// side = +1 or -1: mean side, cosine amplitude -side*lambda*, frequency k0.
Tail asymptotic_up(int side, const ModelParams& p);

// Derivative jumps forced by the sign nonlinearity at x = 0 and propagated to the integers
// by the shifts: c^2 J_{n+2}(m) = J_n(m+1) - (2+alpha) J_n(m) + J_n(m-1) + 2 alpha [n=0, m=0].
KinkSet jump_cascade(const ModelParams& p, int n_max = 18, int m_max = 8);

// u_p = s + L^{-1} Q with s an odd template matching the asymptotes and Q = alpha sgn - L s.
HeteroclinicProfile compute_up(const ModelParams& p, const GreenKernel& kernel, double x_max = 60.0,
                               int inv_h = 16);

// Residual L u - alpha sgn(x) on the grid.
GridProfile baseline_residual(const GridProfile& u, const ModelParams& p);

}  // namespace fkwave
