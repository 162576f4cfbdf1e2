#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "vfpen/errors.hpp"

namespace vfpen {

// One histogram cell under V-fold subsampling: count = aV + b with
// 0 <= b <= V-1. V larger than the count is allowed.
struct VFoldCellSpec {
    std::int64_t count = 2;
    std::int64_t v = 2;

    std::int64_t a() const noexcept { return count / v; }
    std::int64_t b() const noexcept { return count % v; }
};

struct WeightMoments {
    double r1 = 0.0;
    double r2 = 0.0;
};

// Second moments (R1, R2) of the cell's subsampling weights under the
// within-cell exchangeable (stratified) V-fold scheme. R2 = 1/(V-1) always;
// R1 picks up a correction when V does not divide the cell count.
inline WeightMoments vfold_weight_moments(const VFoldCellSpec& spec) {
    if (spec.v < 2) throw invalid_fold_count("V must be >= 2");
    if (spec.count < 2) {
        throw degenerate_cell("cell with fewer than 2 points: removing its block empties it");
    }
    const double v = static_cast<double>(spec.v);
    const double r2 = 1.0 / (v - 1.0);
    const std::int64_t b = spec.b();
    if (b == 0) return {r2, r2};
    const double a = static_cast<double>(spec.a());
    const double bd = static_cast<double>(b);
    const double keep = a * (v - 1.0) + bd;  // training count when a low-load block is held out
    // E[1/W_tilde] over the two possible held-out loads (a w.p. (V-b)/V, a+1 w.p. b/V).
    const double inv_mean =
        1.0 - bd / (v * keep) + (v - 1.0) * (a * v + bd) * bd / (v * v * (keep - 1.0) * keep);
    return {v / (v - 1.0) * inv_mean - 1.0, r2};
}

// delta^(penV)_{n,phat}: exact correction to the closed-form penalty's
// expectation; zero when V divides the count and always within [0, 2/(count-2)].
inline double vfold_penalty_correction(const VFoldCellSpec& spec) {
    if (spec.v < 2) throw invalid_fold_count("V must be >= 2");
    if (spec.count < 3) throw invalid_size("correction requires cell count >= 3");
    const std::int64_t b = spec.b();
    if (b == 0) return 0.0;
    const double r = static_cast<double>(spec.count);
    const double a = static_cast<double>(spec.a());
    const double v = static_cast<double>(spec.v);
    return static_cast<double>(b) / (r - a) * ((v - 1.0) / v * r / (r - a - 1.0) - 1.0);
}

// kappa(V) = (2^{2/3}/3) (1 - ((V-1)/V)^{1/3})^2, the asymptotic excess of the
// V-fold cross-validation loss ratio over 1. Strictly decreasing in V.
inline double vfcv_excess_constant(std::int64_t v) {
    if (v < 2) throw invalid_fold_count("V must be >= 2");
    const double ratio = std::cbrt((static_cast<double>(v) - 1.0) / static_cast<double>(v));
    const double d = 1.0 - ratio;
    return std::cbrt(4.0) / 3.0 * d * d;
}

// K(C) = (2^{2/3}/3) (C^{-1/3} - 1)^2: loss-ratio inflation from scaling an
// unbiased penalty by C. K(1) = 0 and K(V/(V-1)) = kappa(V).
inline double overpen_excess_constant(double c) {
    if (!(c > 0.0)) throw invalid_size("C must be positive");
    const double d = std::cbrt(1.0 / c) - 1.0;
    return std::cbrt(4.0) / 3.0 * d * d;
}

// f(x) = 2^{-2/3} (1+x)^{-2} + 2^{1/3} (1+x) on x > -1; bounded below by
// 3*2^{-2/3} + 3*2^{-14/3} min(x^2, 1).
inline double crit_ratio_profile(double x) {
    if (!(x > -1.0)) throw error("crit_ratio_profile requires x > -1");
    const double u = 1.0 + x;
    return std::exp2(-2.0 / 3.0) / (u * u) + std::exp2(1.0 / 3.0) * u;
}

struct ArgminShift {
    double ratio = 1.0;               // crit1(dim_overpenalized) / crit1(dim_unbiased)
    std::int64_t dim_unbiased = 0;    // argmin of a/D^2 + bD/n
    std::int64_t dim_overpenalized = 0;  // argmin of a/D^2 + CbD/n
};

// Deterministic comparison of the penalized criteria a/D^2 + bD/n and
// a/D^2 + CbD/n over a dimension list: where each attains its minimum and how
// much the shifted argmin inflates the unbiased criterion.
inline ArgminShift overpenalized_argmin_shift(double a, double b, double c, double n,
                                              std::span<const std::int64_t> dims) {
    if (!(a > 0.0) || !(b > 0.0) || !(c >= 1.0) || !(n > 0.0) || dims.empty()) {
        throw invalid_size("need a,b > 0, C >= 1, n > 0 and a nonempty dimension list");
    }
    auto crit = [&](double mult, std::int64_t dim) {
        const double d = static_cast<double>(dim);
        return a / (d * d) + mult * b * d / n;
    };
    ArgminShift out;
    double best1 = 0.0, best2 = 0.0;
    bool first = true;
    for (std::int64_t dim : dims) {
        const double c1 = crit(1.0, dim);
        const double c2 = crit(c, dim);
        if (first || c1 < best1 || (c1 == best1 && dim < out.dim_unbiased)) {
            best1 = c1;
            out.dim_unbiased = dim;
        }
        if (first || c2 < best2 || (c2 == best2 && dim < out.dim_overpenalized)) {
            best2 = c2;
            out.dim_overpenalized = dim;
        }
        first = false;
    }
    out.ratio = crit(1.0, out.dim_overpenalized) / crit(1.0, out.dim_unbiased);
    return out;
}

}  // namespace vfpen
