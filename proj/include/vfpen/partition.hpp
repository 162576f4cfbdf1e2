#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vfpen/errors.hpp"

namespace vfpen {

// A finite partition of [0,1) into half-open cells [b_k, b_{k+1}).
// Breakpoints are strictly increasing with first = 0 and last = 1.
class Partition1D {
public:
    static Partition1D regular(std::size_t cells) {
        Partition1D p;
        p.layout_ = Layout::uniform;
        p.d1_ = cells;
        p.breakpoints_.resize(cells + 1);
        for (std::size_t k = 0; k <= cells; ++k) {
            p.breakpoints_[k] = static_cast<double>(k) / static_cast<double>(cells);
        }
        return p;
    }

    // d1 regular cells on [0,1/2), d2 regular cells on [1/2,1).
    static Partition1D two_halves(std::size_t d1, std::size_t d2) {
        Partition1D p;
        p.layout_ = Layout::two_halves;
        p.d1_ = d1;
        p.d2_ = d2;
        p.breakpoints_.resize(d1 + d2 + 1);
        for (std::size_t k = 0; k <= d1; ++k) {
            p.breakpoints_[k] = static_cast<double>(k) / static_cast<double>(2 * d1);
        }
        for (std::size_t k = 1; k <= d2; ++k) {
            p.breakpoints_[d1 + k] = 0.5 + static_cast<double>(k) / static_cast<double>(2 * d2);
        }
        return p;
    }

    static Partition1D from_breakpoints(std::vector<double> breakpoints) {
        if (breakpoints.size() < 2 || breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
            throw invalid_size("breakpoints must run from 0 to 1");
        }
        for (std::size_t k = 1; k < breakpoints.size(); ++k) {
            if (!(breakpoints[k] > breakpoints[k - 1])) {
                throw invalid_size("breakpoints must be strictly increasing");
            }
        }
        Partition1D p;
        p.layout_ = Layout::general;
        p.breakpoints_ = std::move(breakpoints);
        return p;
    }

    std::size_t cells() const noexcept { return breakpoints_.size() - 1; }
    double lower(std::size_t k) const noexcept { return breakpoints_[k]; }
    double upper(std::size_t k) const noexcept { return breakpoints_[k + 1]; }
    double length(std::size_t k) const noexcept { return breakpoints_[k + 1] - breakpoints_[k]; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

    // Cell index of x in [0,1). The arithmetic fast paths are corrected
    // against the stored breakpoints so x exactly on a breakpoint always
    // opens the right-hand cell.
    std::size_t cell_of(double x) const noexcept {
        switch (layout_) {
            case Layout::uniform: {
                const auto k = static_cast<std::size_t>(x * static_cast<double>(d1_));
                return snap(k >= d1_ ? d1_ - 1 : k, x);
            }
            case Layout::two_halves: {
                if (x < 0.5) {
                    const auto k = static_cast<std::size_t>(x * static_cast<double>(2 * d1_));
                    return snap(k >= d1_ ? d1_ - 1 : k, x);
                }
                const auto k = static_cast<std::size_t>((x - 0.5) * static_cast<double>(2 * d2_));
                return snap(d1_ + (k >= d2_ ? d2_ - 1 : k), x);
            }
            case Layout::general:
            default: {
                std::size_t lo = 0, hi = breakpoints_.size() - 1;
                while (hi - lo > 1) {
                    const std::size_t mid = (lo + hi) / 2;
                    if (x < breakpoints_[mid]) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return lo;
            }
        }
    }

private:
    // The fast-path index is within one cell of the truth; nudge it so the
    // half-open bracket test against the stored breakpoints holds exactly.
    std::size_t snap(std::size_t k, double x) const noexcept {
        if (k > 0 && x < breakpoints_[k]) return k - 1;
        if (k + 2 < breakpoints_.size() && x >= breakpoints_[k + 1]) return k + 1;
        return k;
    }

    enum class Layout { uniform, two_halves, general };
    Layout layout_ = Layout::general;
    std::size_t d1_ = 0, d2_ = 0;
    std::vector<double> breakpoints_;
};

struct HistogramModel {
    int id = 0;
    Partition1D partition;

    std::size_t dimension() const noexcept { return partition.cells(); }
};

enum class CollectionKind {
    regular,
    two_bin_sizes,
    dyadic,
    dyadic_two_bin_sizes,
};

struct ModelCollection {
    CollectionKind kind = CollectionKind::regular;
    std::size_t n = 0;  // sample size the collection was built for
    std::vector<HistogramModel> models;
};

namespace detail {

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) noexcept {
    std::size_t k = 0;
    while ((std::size_t{1} << (k + 1)) <= n) ++k;
    return k;
}

}  // namespace detail

// The four candidate-model families. Regular: D in {1,...,floor(n/ln n)}.
// TwoBinSizes: the constant model plus all (D1,D2) with D_i <= floor(n/(2 ln n)).
// Dyadic: D = 2^k, 0 <= k <= log2(n)-1. DyadicTwoBinSizes: constant model plus
// (2^k1, 2^k2), 0 <= k_i <= log2(n)-2. Dyadic kinds require n a power of two.
inline ModelCollection build_collection(CollectionKind kind, std::size_t n) {
    if (n < 8) throw invalid_size("collection requires n >= 8");
    ModelCollection out;
    out.kind = kind;
    out.n = n;
    int next_id = 0;
    auto add = [&](Partition1D p) {
        out.models.push_back(HistogramModel{next_id++, std::move(p)});
    };
    switch (kind) {
        case CollectionKind::regular: {
            const auto dmax =
                static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
            for (std::size_t d = 1; d <= dmax; ++d) add(Partition1D::regular(d));
            break;
        }
        case CollectionKind::two_bin_sizes: {
            const auto dmax = static_cast<std::size_t>(
                std::floor(static_cast<double>(n) / (2.0 * std::log(static_cast<double>(n)))));
            add(Partition1D::regular(1));
            for (std::size_t d1 = 1; d1 <= dmax; ++d1) {
                for (std::size_t d2 = 1; d2 <= dmax; ++d2) add(Partition1D::two_halves(d1, d2));
            }
            break;
        }
        case CollectionKind::dyadic: {
            if (!detail::is_power_of_two(n)) throw invalid_size("dyadic collection requires n a power of two");
            const std::size_t kmax = detail::log2_exact(n) - 1;
            for (std::size_t k = 0; k <= kmax; ++k) add(Partition1D::regular(std::size_t{1} << k));
            break;
        }
        case CollectionKind::dyadic_two_bin_sizes: {
            if (!detail::is_power_of_two(n)) throw invalid_size("dyadic collection requires n a power of two");
            const std::size_t kmax = detail::log2_exact(n) - 2;
            add(Partition1D::regular(1));
            for (std::size_t k1 = 0; k1 <= kmax; ++k1) {
                for (std::size_t k2 = 0; k2 <= kmax; ++k2) {
                    add(Partition1D::two_halves(std::size_t{1} << k1, std::size_t{1} << k2));
                }
            }
            break;
        }
    }
    return out;
}

inline CollectionKind collection_kind_from_name(const std::string& name) {
    if (name == "regular") return CollectionKind::regular;
    if (name == "two_bin_sizes") return CollectionKind::two_bin_sizes;
    if (name == "dyadic") return CollectionKind::dyadic;
    if (name == "dyadic_two_bin_sizes") return CollectionKind::dyadic_two_bin_sizes;
    throw config_error("unknown collection kind: " + name);
}

inline const char* collection_kind_name(CollectionKind kind) noexcept {
    switch (kind) {
        case CollectionKind::regular: return "regular";
        case CollectionKind::two_bin_sizes: return "two_bin_sizes";
        case CollectionKind::dyadic: return "dyadic";
        case CollectionKind::dyadic_two_bin_sizes: return "dyadic_two_bin_sizes";
    }
    return "?";
}

}  // namespace vfpen
