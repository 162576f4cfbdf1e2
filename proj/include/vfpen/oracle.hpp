#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "vfpen/errors.hpp"
#include "vfpen/fit.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/quadrature.hpp"
#include "vfpen/scenario.hpp"

namespace vfpen {

// Exact scenario-side quantities, evaluated by quadrature against the known
// regression function and noise level (X uniform, so p_lambda is the cell
// length and conditional means are normalized integrals).

// beta_lambda = E[Y | X in cell] = (1/|I|) int_I s.
inline double true_cell_mean(const RegressionScenario& sc, double lo, double hi) {
    if (!(hi > lo) || lo < 0.0 || hi > 1.0) throw invalid_size("cell must be a positive subinterval of [0,1]");
    const auto breaks = sc.s_breakpoints();
    return integrate([&](double x) { return sc.s(x); }, lo, hi, breaks) / (hi - lo);
}

// sigma_lambda^2 = E[(Y - s(X))^2 | X in cell] = (1/|I|) int_I sigma^2.
inline double cell_noise_variance(const RegressionScenario& sc, double lo, double hi) {
    if (!(hi > lo)) throw invalid_size("cell must have positive length");
    const auto breaks = sc.sigma_breakpoints();
    return integrate([&](double x) { const double s = sc.sigma(x); return s * s; }, lo, hi, breaks) /
           (hi - lo);
}

// E[sigma^2(X)] over the whole design, used by the known-variance Mallows penalty.
inline double mean_noise_variance(const RegressionScenario& sc) {
    return cell_noise_variance(sc, 0.0, 1.0);
}

// int_0^1 (s - s_m)^2, with s_m the cellwise conditional mean of s.
inline double bias(const RegressionScenario& sc, const HistogramModel& model) {
    const auto breaks = sc.s_breakpoints();
    double acc = 0.0;
    for (std::size_t k = 0; k < model.partition.cells(); ++k) {
        const double lo = model.partition.lower(k);
        const double hi = model.partition.upper(k);
        const double beta = true_cell_mean(sc, lo, hi);
        acc += integrate([&](double x) { const double d = sc.s(x) - beta; return d * d; }, lo, hi, breaks);
    }
    return acc;
}

// Per-model scenario truth, cached once per (scenario, model) pair so the
// replication loop never integrates.
struct CellTruth {
    std::vector<double> cell_mean;       // beta_lambda
    std::vector<double> cell_noise_var;  // sigma_lambda^2
    double bias = 0.0;                   // loss of s_m
};

inline CellTruth cell_truth(const RegressionScenario& sc, const HistogramModel& model) {
    CellTruth t;
    const std::size_t d = model.partition.cells();
    t.cell_mean.resize(d);
    t.cell_noise_var.resize(d);
    const auto s_breaks = sc.s_breakpoints();
    for (std::size_t k = 0; k < d; ++k) {
        const double lo = model.partition.lower(k);
        const double hi = model.partition.upper(k);
        t.cell_mean[k] = true_cell_mean(sc, lo, hi);
        t.cell_noise_var[k] = cell_noise_variance(sc, lo, hi);
        const double beta = t.cell_mean[k];
        t.bias += integrate([&](double x) { const double e = sc.s(x) - beta; return e * e; }, lo, hi,
                            s_breaks);
    }
    return t;
}

// l(s, shat_m) = sum p_lambda (betahat - beta)^2 + l(s, s_m).
inline double excess_loss(const FittedHistogram& f, const CellTruth& truth) {
    double p1 = 0.0;
    for (std::size_t k = 0; k < f.dim(); ++k) {
        if (f.counts[k] == 0) throw undefined_estimator("empty cell: estimator undefined");
        const double d = f.means[k] - truth.cell_mean[k];
        p1 += f.partition.length(k) * d * d;
    }
    return p1 + truth.bias;
}

inline double excess_loss(const FittedHistogram& f, const RegressionScenario& sc) {
    return excess_loss(f, cell_truth(sc, HistogramModel{f.model_id, f.partition}));
}

// p2(m) = sum phihat_lambda (betahat - beta)^2, the empirical-measure twin of
// the estimation error. Oracle-side diagnostic only.
inline double p2_diagnostic(const FittedHistogram& f, const CellTruth& truth) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.dim(); ++k) {
        if (f.counts[k] == 0) throw undefined_estimator("empty cell: estimator undefined");
        const double d = f.means[k] - truth.cell_mean[k];
        acc += static_cast<double>(f.counts[k]) / static_cast<double>(f.n) * d * d;
    }
    return acc;
}

inline double p2_diagnostic(const FittedHistogram& f, const RegressionScenario& sc) {
    return p2_diagnostic(f, cell_truth(sc, HistogramModel{f.model_id, f.partition}));
}

}  // namespace vfpen
