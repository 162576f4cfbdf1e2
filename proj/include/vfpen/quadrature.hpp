#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "vfpen/errors.hpp"

namespace vfpen {

// 16-node Gauss-Legendre rule on [-1,1], stored as the positive half of the
// symmetric node set.
struct GaussLegendre16 {
    static constexpr std::array<double, 8> nodes = {
        9.50125098376374544e-02, 2.81603550779258915e-01, 4.58016777657227370e-01,
        6.17876244402643771e-01, 7.55404408355002999e-01, 8.65631202387831755e-01,
        9.44575023073232600e-01, 9.89400934991649939e-01,
    };
    static constexpr std::array<double, 8> weights = {
        1.89450610455068585e-01, 1.82603415044923612e-01, 1.69156519395002619e-01,
        1.49595988816576764e-01, 1.24628971255534030e-01, 9.51585116824925914e-02,
        6.22535239386477063e-02, 2.71524594117540374e-02,
    };
};

template <typename F>
double gauss16(F&& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        const double dx = h * GaussLegendre16::nodes[i];
        acc += GaussLegendre16::weights[i] * (f(c - dx) + f(c + dx));
    }
    return acc * h;
}

namespace detail {

template <typename F>
double adapt_panel(F&& f, double lo, double hi, double whole, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return whole;  // interval at floating-point resolution
    const double left = gauss16(f, lo, mid);
    const double right = gauss16(f, mid, hi);
    const double both = left + right;
    const double diff = std::abs(both - whole);
    if (diff <= tol ||
        diff <= 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right))) {
        return both;
    }
    if (depth >= 48) {
        throw quadrature_failure("adaptive quadrature did not reach tolerance");
    }
    return adapt_panel(f, lo, mid, left, tol, depth + 1) +
           adapt_panel(f, mid, hi, right, tol, depth + 1);
}

}  // namespace detail

// Integrates f over [lo,hi], splitting first at the supplied interior
// breakpoints (discontinuities of the integrand) and then bisecting each
// smooth piece until the 16-node estimates stabilise. The tolerance is
// relative to the L1 magnitude of the first-pass estimate, so pieces that
// cancel each other do not force runaway refinement.
template <typename F>
double integrate(F&& f, double lo, double hi, std::span<const double> breakpoints,
                 double rel_tol = 1e-13) {
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double b : breakpoints) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    double magnitude = 0.0;
    std::vector<double> first_pass(cuts.size() - 1);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        first_pass[k] = gauss16(f, cuts[k], cuts[k + 1]);
        magnitude += std::abs(first_pass[k]);
    }
    const double tol = rel_tol * std::max(magnitude, 1e-300);

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        total += detail::adapt_panel(f, cuts[k], cuts[k + 1], first_pass[k], tol, 0);
    }
    return total;
}

template <typename F>
double integrate(F&& f, double lo, double hi, double rel_tol = 1e-13) {
    return integrate(std::forward<F>(f), lo, hi, std::span<const double>{}, rel_tol);
}

}  // namespace vfpen
