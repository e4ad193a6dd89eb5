#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <tuple>
#include <utility>

#include "fkwave/verify.hpp"

namespace fixtures {

using namespace fkwave;

// Expensive objects shared across test cases, built on first use.
inline const GreenKernel& kernel(double c) {
    static std::map<double, std::unique_ptr<GreenKernel>> cache;
    auto& slot = cache[c];
    if (!slot) slot = std::make_unique<GreenKernel>(build_kernel(make_params(c)));
    return *slot;
}

inline PotentialSpec spec(double eps, double gain = 1.0) {
    return add_anharmonic_tail(make_mollified_sign(eps), gain);
}

inline const FamilyContext& context(double c, double eps) {
    static std::map<std::pair<double, double>, std::unique_ptr<FamilyContext>> cache;
    auto& slot = cache[{c, eps}];
    if (!slot)
        slot = std::make_unique<FamilyContext>(
            make_family_context(make_params(c, eps), spec(eps), FamilyConfig{}, kernel(c)));
    return *slot;
}

inline const SolveState& solved(double c, double eps, CorrectorMode mode = CorrectorMode::picard) {
    static std::map<std::tuple<double, double, int>, std::unique_ptr<SolveState>> cache;
    auto& slot = cache[{c, eps, static_cast<int>(mode)}];
    if (!slot) {
        CorrectorConfig cfg;
        cfg.mode = mode;
        slot = std::make_unique<SolveState>(solve_corrector(context(c, eps), kernel(c), cfg));
    }
    return *slot;
}

inline const HeteroclinicProfile& baseline(double c) {
    static std::map<double, std::unique_ptr<HeteroclinicProfile>> cache;
    auto& slot = cache[c];
    if (!slot) slot = std::make_unique<HeteroclinicProfile>(compute_up(make_params(c), kernel(c)));
    return *slot;
}

// Smooth compactly supported bump centred at x0 with half-width w.
inline double bump(double x, double x0, double w) {
    double s = (x - x0) / w;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

inline GridProfile decaying(GridProfile g) {
    g.left = Tail{};
    g.right = Tail{};
    return g;
}

}  // namespace fixtures
