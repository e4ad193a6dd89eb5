#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fkwave {

enum class ErrorKind { config, numerical, invariant };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline constexpr double pi = 3.14159265358979323846;

struct ModelParams {
    double c = 1.0;
    double k0 = pi / 2;
    double alpha = 0.0;
    double epsilon = 0.0;
    double B = 0.05;
    double nu = -0.5;
};

// Validates the speed window c in [0.95, 1] and derives alpha = c^2 k0^2 - 2.
ModelParams make_params(double c, double epsilon = 0.0, double B = 0.05, double nu = -0.5);

// Asymptotic description of a profile beyond the grid:
// mean + sum_n cos_amp[n-1] cos(n freq x) + sin_amp[n-1] sin(n freq x).
struct Tail {
    double mean = 0.0;
    double freq = 0.0;
    std::vector<double> cos_amp;
    std::vector<double> sin_amp;

    double eval(double x, int deriv = 0) const;
    bool oscillates(double tol = 1e-14) const;
    Tail scaled(double s) const;
};

// Known jump of a profile's derivatives at x: jump[n] = u^(n)(x+) - u^(n)(x-).
struct Kink {
    double x = 0.0;
    std::vector<double> jump;
};
using KinkSet = std::vector<Kink>;

// d-th derivative of the one-sided polynomial sum_n jump[n] H(y) y^n / n!, y = x - kink.x,
// with H(0) = 1/2.
double kink_piece(const Kink& k, double x, int d = 0);

struct GridProfile {
    double x_max = 60.0;
    int inv_h = 16;
    std::vector<double> values;
    std::optional<Tail> left;
    std::optional<Tail> right;
    bool odd = false;
    std::shared_ptr<const KinkSet> kinks;

    int n() const { return static_cast<int>(values.size()); }
    double h() const { return 1.0 / inv_h; }
    int center() const { return n() / 2; }
    double x(long i) const { return -x_max + static_cast<double>(i) / inv_h; }
    // Node value with margin extension from the tails; throws "untailed margin".
    double at(long i) const;
};

GridProfile make_grid(double x_max, int inv_h);
GridProfile sample(const std::function<double(double)>& f, double x_max, int inv_h);
GridProfile like(const GridProfile& g);  // same grid, zero values, no tails or kinks

double oddness_defect(const GridProfile& u);
double sup_norm(const GridProfile& u);
double l1_norm(const GridProfile& u);

// Stencil weights (Fornberg) for derivative `order` at z from nodes xs.
std::vector<double> fd_weights(double z, const std::vector<double>& xs, int order);

GridProfile discrete_laplacian(const GridProfile& u);
// u'' by the 9-point central stencil, corrected for the profile's known derivative jumps.
GridProfile second_derivative(const GridProfile& u);
GridProfile first_derivative(const GridProfile& u);
GridProfile apply_L(const GridProfile& u, const ModelParams& p);

// Off-grid evaluation by local 10-point interpolation with jump subtraction; tails beyond the grid.
double eval_at(const GridProfile& u, double x, int deriv = 0);

std::complex<double> dispersion_D(std::complex<double> k, const ModelParams& p);
std::complex<double> dispersion_Dprime(std::complex<double> k, const ModelParams& p);
double dispersion_D(double k, const ModelParams& p);
double dispersion_Dprime(double k, const ModelParams& p);
// Symbol of the grid operator (central stencil, exact shifts) at wavenumber k.
double grid_symbol(double k, const ModelParams& p, int inv_h);

std::vector<double> real_roots(const ModelParams& p, double k_max);
double spectral_gap_p0(const ModelParams& p);

}  // namespace fkwave
