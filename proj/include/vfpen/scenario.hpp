#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "vfpen/dataset.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/rng.hpp"

namespace vfpen {

enum class RegressionFunction { sin_pi, linear, sqrt, heavisine, doppler, his6 };

// Noise level sigma(x): a constant, sigma(x) = x, or the step 1_{x >= 1/2}.
enum class NoiseFunction { constant, linear, step_half };

// Step values of the His6 regression function on the regular 6-cell
// partition: zero mean, all five jumps nonzero.
inline constexpr std::array<double, 6> his6_values = {1.5, -0.5, 1.0, -1.0, 0.5, -1.5};

inline double eval_regression_function(RegressionFunction s, double x) {
    switch (s) {
        case RegressionFunction::sin_pi:
            return std::sin(std::numbers::pi * x);
        case RegressionFunction::linear:
            return x;
        case RegressionFunction::sqrt:
            return std::sqrt(x);
        case RegressionFunction::heavisine: {
            auto sgn = [](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); };
            return 4.0 * std::sin(4.0 * std::numbers::pi * x) - sgn(x - 0.3) - sgn(0.72 - x);
        }
        case RegressionFunction::doppler: {
            constexpr double eps = 0.05;
            return std::sqrt(x * (1.0 - x)) * std::sin(2.0 * std::numbers::pi * 1.05 / (x + eps));
        }
        case RegressionFunction::his6: {
            auto k = static_cast<std::size_t>(x * 6.0);
            return his6_values[k >= 6 ? 5 : k];
        }
    }
    throw unknown_function("unknown regression function");
}

struct RegressionScenario {
    std::string name;
    RegressionFunction s_id = RegressionFunction::sin_pi;
    NoiseFunction sigma_id = NoiseFunction::constant;
    double sigma_value = 1.0;  // level of the constant noise kind
    std::size_t n = 0;
    CollectionKind collection_kind = CollectionKind::regular;

    double s(double x) const { return eval_regression_function(s_id, x); }

    double sigma(double x) const {
        switch (sigma_id) {
            case NoiseFunction::constant: return sigma_value;
            case NoiseFunction::linear: return x;
            case NoiseFunction::step_half: return x >= 0.5 ? 1.0 : 0.0;
        }
        throw unknown_function("unknown noise function");
    }

    // Interior discontinuities of s, used to pre-split quadrature panels.
    std::vector<double> s_breakpoints() const {
        switch (s_id) {
            case RegressionFunction::heavisine: return {0.3, 0.72};
            case RegressionFunction::his6:
                return {1.0 / 6, 2.0 / 6, 3.0 / 6, 4.0 / 6, 5.0 / 6};
            default: return {};
        }
    }

    std::vector<double> sigma_breakpoints() const {
        if (sigma_id == NoiseFunction::step_half) return {0.5};
        return {};
    }
};

// The twelve simulation scenarios.
inline const std::vector<RegressionScenario>& all_scenarios() {
    static const std::vector<RegressionScenario> table = {
        {"S1", RegressionFunction::sin_pi, NoiseFunction::constant, 1.0, 200, CollectionKind::regular},
        {"S2", RegressionFunction::sin_pi, NoiseFunction::linear, 1.0, 200, CollectionKind::two_bin_sizes},
        {"HSd1", RegressionFunction::heavisine, NoiseFunction::constant, 1.0, 2048, CollectionKind::dyadic},
        {"HSd2", RegressionFunction::heavisine, NoiseFunction::linear, 1.0, 2048,
         CollectionKind::dyadic_two_bin_sizes},
        {"S1000", RegressionFunction::sin_pi, NoiseFunction::constant, 1.0, 1000, CollectionKind::regular},
        {"Ssqrt0.1", RegressionFunction::sin_pi, NoiseFunction::constant, 0.31622776601683794, 200,
         CollectionKind::regular},
        {"S0.1", RegressionFunction::sin_pi, NoiseFunction::constant, 0.1, 200, CollectionKind::regular},
        {"Svar2", RegressionFunction::sin_pi, NoiseFunction::step_half, 1.0, 200,
         CollectionKind::two_bin_sizes},
        {"Sqrt", RegressionFunction::sqrt, NoiseFunction::constant, 1.0, 200, CollectionKind::regular},
        {"His6", RegressionFunction::his6, NoiseFunction::constant, 1.0, 200, CollectionKind::regular},
        {"DopReg", RegressionFunction::doppler, NoiseFunction::constant, 1.0, 2048, CollectionKind::dyadic},
        {"Dop2bin", RegressionFunction::doppler, NoiseFunction::constant, 1.0, 2048,
         CollectionKind::dyadic_two_bin_sizes},
    };
    return table;
}

inline const RegressionScenario& scenario_by_name(std::string_view name) {
    for (const auto& sc : all_scenarios()) {
        if (sc.name == name) return sc;
    }
    throw config_error("unknown scenario: " + std::string(name));
}

// Draws n i.i.d. pairs with X ~ U[0,1) and Y = s(X) + sigma(X) * eps,
// eps ~ N(0,1). Deterministic given the stream state.
inline DataSet generate(const RegressionScenario& sc, RngStream& rng) {
    DataSet data;
    data.xs.resize(sc.n);
    data.ys.resize(sc.n);
    for (std::size_t i = 0; i < sc.n; ++i) {
        const double x = rng.next_unit();
        data.xs[i] = x;
        data.ys[i] = sc.s(x) + sc.sigma(x) * rng.next_gaussian();
    }
    return data;
}

}  // namespace vfpen
