#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fkwave {

// On-site force law psi' and its derivatives up to order 5.
// Built from a mollified sign (compact plateau bump) plus an optional odd anharmonic tail.
class PotentialSpec {
public:
    double epsilon = 0.0;
    double core_halfwidth = 0.0;
    double perturbation_gain = 0.0;
    double certified_C = 0.0;
    double bump_ramp = 0.3;

    // d-th derivative of psi' (d = 0 gives psi' itself), d in [0, 4].
    double dpsi(double u, int d = 0) const;
    double psi(double u) const;  // antiderivative with psi(0) = 0

    double eval_dpsi(double u) const { return dpsi(u, 0); }
    double eval_d2psi(double u) const { return dpsi(u, 1); }
    double eval_d3psi(double u) const { return dpsi(u, 2); }
    double eval_d4psi(double u) const { return dpsi(u, 3); }
    double eval_d5psi(double u) const { return dpsi(u, 4); }

    // Custom evaluator overriding the built-in construction (used to probe certification).
    std::function<double(double, int)> custom;

    double bump(double s, int d = 0) const;  // unit-mass plateau bump on [-1, 1]
    double tail_q(double u, int d = 0) const;
};

PotentialSpec make_mollified_sign(double epsilon);
PotentialSpec add_anharmonic_tail(const PotentialSpec& spec, double gain, double C_ceiling = 1000.0);

struct CertifyRow {
    std::string condition;
    bool pass = true;
    double worst_value = 0.0;
    double worst_u = 0.0;
    double bound = 0.0;
};

struct CertifyReport {
    double C = 0.0;
    bool pass = true;
    std::vector<CertifyRow> rows;
    double smallest_C = 0.0;  // least C for which every outside bound holds
};

CertifyReport certify_bounds(const PotentialSpec& spec, double C, int grid_n = 20001);

// Smooth steps on [0, 1] and their derivatives.
double smoothstep5(double t, int d = 0);   // quintic, C^2
double smoothstep9(double t, int d = 0);  // degree 9, C^4

}  // namespace fkwave
