#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "vfpen/dataset.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/partition.hpp"

namespace vfpen {

// Least-squares histogram fit: per-cell counts, sums, second moments and
// means. Empty cells are representable (mean = NaN, flagged); consumers
// decide their own policy.
struct FittedHistogram {
    int model_id = 0;
    Partition1D partition;
    std::int64_t n = 0;
    std::vector<std::int64_t> counts;
    std::vector<double> sums;    // per-cell sum of y
    std::vector<double> sum_sq;  // per-cell sum of y^2
    std::vector<double> means;   // NaN on empty cells

    std::size_t dim() const noexcept { return counts.size(); }

    bool has_empty_cell() const noexcept {
        return std::any_of(counts.begin(), counts.end(), [](std::int64_t c) { return c == 0; });
    }

    std::int64_t min_cell_count() const noexcept {
        return *std::min_element(counts.begin(), counts.end());
    }

    // Within-cell sum of squared deviations from the cell mean, computed from
    // the shift-invariant combination r*Q - S^2 (never negative up to rounding).
    double within_cell_ss(std::size_t k) const noexcept {
        if (counts[k] == 0) return 0.0;
        const double r = static_cast<double>(counts[k]);
        return std::max(0.0, (r * sum_sq[k] - sums[k] * sums[k]) / r);
    }
};

inline FittedHistogram fit(const DataSet& data, const HistogramModel& model) {
    data.validate();
    FittedHistogram f;
    f.model_id = model.id;
    f.partition = model.partition;
    f.n = static_cast<std::int64_t>(data.size());
    const std::size_t d = model.partition.cells();
    f.counts.assign(d, 0);
    f.sums.assign(d, 0.0);
    f.sum_sq.assign(d, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t k = model.partition.cell_of(data.xs[i]);
        const double y = data.ys[i];
        f.counts[k] += 1;
        f.sums[k] += y;
        f.sum_sq[k] += y * y;
    }
    f.means.assign(d, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < d; ++k) {
        if (f.counts[k] > 0) f.means[k] = f.sums[k] / static_cast<double>(f.counts[k]);
    }
    return f;
}

// (1/n) sum_i (shat_m(x_i) - y_i)^2, from the per-cell sufficient statistics.
inline double empirical_risk(const FittedHistogram& f, const DataSet& data) {
    if (data.size() != static_cast<std::size_t>(f.n)) {
        throw invalid_size("fit and dataset sizes differ");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < f.dim(); ++k) {
        if (f.counts[k] == 0) throw undefined_estimator("empty cell: estimator undefined");
        acc += f.within_cell_ss(k);
    }
    return acc / static_cast<double>(f.n);
}

// Indices of models whose fit has every cell count >= threshold (the
// admissible set; the selection harness uses threshold 3).
inline std::vector<std::size_t> filter_admissible(const DataSet& data, const ModelCollection& collection,
                                                  std::int64_t threshold = 3) {
    if (threshold < 1) throw invalid_size("admissibility threshold must be >= 1");
    std::vector<std::size_t> kept;
    std::vector<std::int64_t> counts;
    for (std::size_t m = 0; m < collection.models.size(); ++m) {
        const auto& part = collection.models[m].partition;
        counts.assign(part.cells(), 0);
        for (double x : data.xs) counts[part.cell_of(x)] += 1;
        if (*std::min_element(counts.begin(), counts.end()) >= threshold) kept.push_back(m);
    }
    if (kept.empty()) {
        throw empty_admissible_set("no model has all cell counts >= threshold");
    }
    return kept;
}

}  // namespace vfpen
