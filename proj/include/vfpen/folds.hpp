#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "vfpen/dataset.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/fit.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/rng.hpp"

namespace vfpen {

enum class FoldKind { regular, stratified };

// Assignment of the n observation indices to V blocks.
struct FoldAssignment {
    std::vector<int> block_of;
    int v = 2;
    FoldKind kind = FoldKind::regular;

    std::size_t size() const noexcept { return block_of.size(); }

    std::vector<std::int64_t> block_sizes() const {
        std::vector<std::int64_t> sizes(v, 0);
        for (int b : block_of) sizes[b] += 1;
        return sizes;
    }
};

namespace detail {

template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.next_below(i)]);
    }
}

}  // namespace detail

// Uniformly random assignment with every block size within 1 of n/V: a random
// subset of blocks takes the extra points, and the label multiset is shuffled.
inline FoldAssignment regular_folds(std::size_t n, int v, RngStream& rng) {
    if (v < 2 || static_cast<std::size_t>(v) > n) {
        throw invalid_fold_count("V must satisfy 2 <= V <= n");
    }
    std::vector<int> block_ids(v);
    std::iota(block_ids.begin(), block_ids.end(), 0);
    detail::shuffle(block_ids, rng);

    const std::size_t base = n / static_cast<std::size_t>(v);
    const std::size_t extra = n % static_cast<std::size_t>(v);
    FoldAssignment folds;
    folds.v = v;
    folds.kind = FoldKind::regular;
    folds.block_of.reserve(n);
    for (std::size_t j = 0; j < static_cast<std::size_t>(v); ++j) {
        const std::size_t sz = base + (j < extra ? 1 : 0);
        folds.block_of.insert(folds.block_of.end(), sz, block_ids[j]);
    }
    detail::shuffle(folds.block_of, rng);
    return folds;
}

// Per-cell balanced assignment: within each cell of the model, indices are
// shuffled and dealt round-robin starting from a random block, so every
// (cell, block) load is within 1 of count/V.
inline FoldAssignment stratified_folds(const DataSet& data, const HistogramModel& model, int v,
                                       RngStream& rng) {
    const std::size_t n = data.size();
    if (v < 2 || static_cast<std::size_t>(v) > n) {
        throw invalid_fold_count("V must satisfy 2 <= V <= n");
    }
    const auto& part = model.partition;
    std::vector<std::vector<std::uint32_t>> cell_members(part.cells());
    for (std::size_t i = 0; i < n; ++i) {
        cell_members[part.cell_of(data.xs[i])].push_back(static_cast<std::uint32_t>(i));
    }
    FoldAssignment folds;
    folds.v = v;
    folds.kind = FoldKind::stratified;
    folds.block_of.assign(n, 0);
    for (auto& members : cell_members) {
        if (members.empty()) throw empty_cell("stratified folds need every cell nonempty");
        detail::shuffle(members, rng);
        const auto start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(v)));
        for (std::size_t t = 0; t < members.size(); ++t) {
            folds.block_of[members[t]] = static_cast<int>((start + t) % static_cast<std::size_t>(v));
        }
    }
    return folds;
}

// Fit on the training sample P_n^{(-j)} (all observations with block != j).
inline FittedHistogram train_fit(const DataSet& data, const HistogramModel& model,
                                 const FoldAssignment& folds, int j) {
    if (j < 0 || j >= folds.v) throw invalid_fold_count("block index out of range");
    if (folds.size() != data.size()) throw invalid_size("fold assignment and dataset sizes differ");
    FittedHistogram f;
    f.model_id = model.id;
    f.partition = model.partition;
    const std::size_t d = model.partition.cells();
    f.counts.assign(d, 0);
    f.sums.assign(d, 0.0);
    f.sum_sq.assign(d, 0.0);
    std::int64_t kept = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (folds.block_of[i] == j) continue;
        const std::size_t k = model.partition.cell_of(data.xs[i]);
        const double y = data.ys[i];
        f.counts[k] += 1;
        f.sums[k] += y;
        f.sum_sq[k] += y * y;
        ++kept;
    }
    f.n = kept;
    f.means.assign(d, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < d; ++k) {
        if (f.counts[k] == 0) {
            throw undefined_training_fit("training subsample empties a cell of the model");
        }
        f.means[k] = f.sums[k] / static_cast<double>(f.counts[k]);
    }
    return f;
}

}  // namespace vfpen
