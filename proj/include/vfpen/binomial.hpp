#pragma once

#include <cmath>
#include <cstdint>

#include "vfpen/errors.hpp"

namespace vfpen {

struct BinomialSpec {
    std::int64_t n = 1;   // >= 1
    double p = 1.0;       // in (0,1]
};

namespace detail {

inline void check(const BinomialSpec& spec) {
    if (spec.n < 1 || !(spec.p > 0.0) || spec.p > 1.0) {
        throw invalid_size("binomial spec needs n >= 1 and p in (0,1]");
    }
}

}  // namespace detail

// E[Z] * E[Z^{-1} 1_{Z>0}] for Z ~ B(n,p): np * sum_{k=1}^n pmf(k)/k, with the
// pmf evaluated in log space so n in the hundreds stays exact to ~1e-15.
inline double scaled_inverse_moment(const BinomialSpec& spec) {
    detail::check(spec);
    const auto n = spec.n;
    const double p = spec.p;
    if (p == 1.0) return 1.0;  // Z = n a.s.
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    double sum = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double log_pmf = lg_n1 - std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) +
                               kd * log_p + static_cast<double>(n - k) * log_q;
        sum += std::exp(log_pmf) / kd;
    }
    return static_cast<double>(n) * p * sum;
}

// E[Z] * E[Z^{-1} | Z>0]: the zero-dropped moment divided by P(Z>0).
inline double scaled_inverse_moment_positive(const BinomialSpec& spec) {
    detail::check(spec);
    if (spec.p == 1.0) return 1.0;
    const double p_pos = -std::expm1(static_cast<double>(spec.n) * std::log1p(-spec.p));
    return scaled_inverse_moment(spec) / p_pos;
}

// delta_{n,p}: the finite-sample correction in the expectation of the ideal
// penalty, with the convention that keeps empty-cell terms bounded.
inline double ideal_penalty_correction(std::int64_t n, double p) {
    const double np = static_cast<double>(n) * p;
    const double miss = p < 1.0 ? std::exp(static_cast<double>(n) * std::log1p(-p)) : 0.0;
    return scaled_inverse_moment({n, p}) - 1.0 + np * miss;
}

}  // namespace vfpen
