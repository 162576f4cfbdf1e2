#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vfpen/binomial.hpp"
#include "vfpen/dataset.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/fit.hpp"
#include "vfpen/folds.hpp"
#include "vfpen/oracle.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/scenario.hpp"
#include "vfpen/vfold_theory.hpp"

namespace vfpen {

enum class Method {
    vfcv,
    corrected_vfcv,
    pen_vf_general,
    pen_vf_closed,
    mallows,
    mallows_star,
    ideal_expected_penalty,
    path_oracle,  // selects the true-loss argmin; test plumbing
};

// One model-selection criterion. v = 0 stands for V = n (leave-one-out);
// c = NaN resolves to V-1 at run time. overpen multiplies the penalty part of
// the criterion ("+" variants use 5/4).
struct SelectorSpec {
    Method method = Method::vfcv;
    int v = 2;
    double c = std::numeric_limits<double>::quiet_NaN();
    double overpen = 1.0;
    std::string label;
};

namespace detail {

struct FoldTable {
    std::size_t d = 0;
    int v = 0;
    std::int64_t n = 0;
    std::vector<std::int64_t> cnt;
    std::vector<double> sum, ssq;
    std::vector<std::int64_t> cnt_b;  // [k*v + j]
    std::vector<double> sum_b, ssq_b;
    std::vector<std::int64_t> bsz;
};

inline FoldTable build_fold_table(const DataSet& data, const HistogramModel& model,
                                  const FoldAssignment& folds) {
    if (folds.size() != data.size()) throw invalid_size("fold assignment and dataset sizes differ");
    FoldTable t;
    t.d = model.partition.cells();
    t.v = folds.v;
    t.n = static_cast<std::int64_t>(data.size());
    t.cnt.assign(t.d, 0);
    t.sum.assign(t.d, 0.0);
    t.ssq.assign(t.d, 0.0);
    t.cnt_b.assign(t.d * folds.v, 0);
    t.sum_b.assign(t.d * folds.v, 0.0);
    t.ssq_b.assign(t.d * folds.v, 0.0);
    t.bsz.assign(folds.v, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t k = model.partition.cell_of(data.xs[i]);
        const int j = folds.block_of[i];
        const double y = data.ys[i];
        t.cnt[k] += 1;
        t.sum[k] += y;
        t.ssq[k] += y * y;
        const std::size_t kj = k * static_cast<std::size_t>(folds.v) + static_cast<std::size_t>(j);
        t.cnt_b[kj] += 1;
        t.sum_b[kj] += y;
        t.ssq_b[kj] += y * y;
        t.bsz[j] += 1;
    }
    return t;
}

// Per-cell training means for held-out block j; throws when a cell empties.
inline void training_means(const FoldTable& t, int j, std::vector<double>& beta) {
    beta.resize(t.d);
    for (std::size_t k = 0; k < t.d; ++k) {
        const std::size_t kj = k * static_cast<std::size_t>(t.v) + static_cast<std::size_t>(j);
        const std::int64_t c_train = t.cnt[k] - t.cnt_b[kj];
        if (c_train == 0) {
            throw undefined_training_fit("training subsample empties a cell of the model");
        }
        beta[k] = (t.sum[k] - t.sum_b[kj]) / static_cast<double>(c_train);
    }
}

// Sum over cells of the within-cell sum of squares (about the full-data means).
inline double total_within_ss(const FittedHistogram& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.dim(); ++k) acc += f.within_cell_ss(k);
    return acc;
}

inline void require_loo_counts(const FittedHistogram& f) {
    for (std::size_t k = 0; k < f.dim(); ++k) {
        if (f.counts[k] < 2) {
            throw undefined_training_fit("leave-one-out empties a single-point cell");
        }
    }
}

}  // namespace detail

// critVF(m) = (1/V) sum_j P_n^{(j)} gamma(shat_m^{(-j)}).
inline double crit_vfcv(const DataSet& data, const HistogramModel& model, const FoldAssignment& folds) {
    const auto n = static_cast<std::int64_t>(data.size());
    if (folds.v == static_cast<int>(n)) {  // leave-one-out, O(n) closed loop
        const FittedHistogram f = fit(data, model);
        detail::require_loo_counts(f);
        double acc = 0.0;
        for (std::size_t k = 0; k < f.dim(); ++k) {
            const double r = static_cast<double>(f.counts[k]);
            const double g = r / (r - 1.0);
            acc += f.within_cell_ss(k) * g * g;
        }
        return acc / static_cast<double>(n);
    }
    const auto t = detail::build_fold_table(data, model, folds);
    std::vector<double> beta;
    double acc = 0.0;
    for (int j = 0; j < folds.v; ++j) {
        detail::training_means(t, j, beta);
        double val = 0.0;
        for (std::size_t k = 0; k < t.d; ++k) {
            const std::size_t kj = k * static_cast<std::size_t>(t.v) + static_cast<std::size_t>(j);
            val += t.ssq_b[kj] - 2.0 * beta[k] * t.sum_b[kj] +
                   static_cast<double>(t.cnt_b[kj]) * beta[k] * beta[k];
        }
        acc += val / static_cast<double>(t.bsz[j]);
    }
    return acc / static_cast<double>(folds.v);
}

// Burman's bias-corrected criterion:
// critVF + P_n gamma(shat_m) - (1/V) sum_j P_n gamma(shat_m^{(-j)}).
inline double crit_corrected_vfcv(const DataSet& data, const HistogramModel& model,
                                  const FoldAssignment& folds) {
    const auto n = static_cast<std::int64_t>(data.size());
    const FittedHistogram f = fit(data, model);
    if (f.has_empty_cell()) throw undefined_estimator("empty cell: estimator undefined");
    const double nd = static_cast<double>(n);
    if (folds.v == static_cast<int>(n)) {
        detail::require_loo_counts(f);
        double cv = 0.0, full_risk_shift = 0.0;
        for (std::size_t k = 0; k < f.dim(); ++k) {
            const double r = static_cast<double>(f.counts[k]);
            const double ss = f.within_cell_ss(k);
            const double g = r / (r - 1.0);
            cv += ss * g * g;
            full_risk_shift += ss * r / ((r - 1.0) * (r - 1.0));
        }
        return cv / nd - full_risk_shift / (nd * nd);
    }
    const double cv = crit_vfcv(data, model, folds);
    const double risk = empirical_risk(f, data);
    const auto t = detail::build_fold_table(data, model, folds);
    std::vector<double> beta;
    double mean_full = 0.0;
    for (int j = 0; j < folds.v; ++j) {
        detail::training_means(t, j, beta);
        double val = 0.0;
        for (std::size_t k = 0; k < t.d; ++k) {
            val += t.ssq[k] - 2.0 * beta[k] * t.sum[k] + static_cast<double>(t.cnt[k]) * beta[k] * beta[k];
        }
        mean_full += val / nd;
    }
    return cv + risk - mean_full / static_cast<double>(folds.v);
}

// V-fold resampling penalty:
// (C/V) sum_j [ P_n gamma(shat^{(-j)}) - Pbar_n^{(-j)} gamma(shat^{(-j)}) ],
// with Pbar_n^{(-j)} = (1/n) sum_i W_i delta_i and W_i = V/(V-1) off the
// held-out block (equal to the renormalized training measure when all blocks
// have size n/V).
inline double pen_vf_general(const DataSet& data, const HistogramModel& model,
                             const FoldAssignment& folds, double c) {
    const double v = static_cast<double>(folds.v);
    if (c < v - 1.0 - 1e-9) throw invalid_size("penalty constant must satisfy C >= V-1");
    const auto n = static_cast<std::int64_t>(data.size());
    const double nd = static_cast<double>(n);
    if (folds.v == static_cast<int>(n)) {
        const FittedHistogram f = fit(data, model);
        detail::require_loo_counts(f);
        const double risk = empirical_risk(f, data);
        const double ss_tot = detail::total_within_ss(f);
        double t1 = nd * risk, t2 = 0.0;
        for (std::size_t k = 0; k < f.dim(); ++k) {
            const double r = static_cast<double>(f.counts[k]);
            const double ss = f.within_cell_ss(k);
            t1 += ss * r / ((r - 1.0) * (r - 1.0)) / nd;
            t2 += ss * r / (r - 1.0);
        }
        t2 = (nd * ss_tot - t2) / (nd - 1.0);
        return c / nd * (t1 - t2);
    }
    const auto t = detail::build_fold_table(data, model, folds);
    std::vector<double> beta;
    double acc = 0.0;
    for (int j = 0; j < folds.v; ++j) {
        detail::training_means(t, j, beta);
        double full = 0.0, train = 0.0;
        for (std::size_t k = 0; k < t.d; ++k) {
            const std::size_t kj = k * static_cast<std::size_t>(t.v) + static_cast<std::size_t>(j);
            full += t.ssq[k] - 2.0 * beta[k] * t.sum[k] + static_cast<double>(t.cnt[k]) * beta[k] * beta[k];
            const double ssq_t = t.ssq[k] - t.ssq_b[kj];
            const double cnt_t = static_cast<double>(t.cnt[k] - t.cnt_b[kj]);
            train += ssq_t - cnt_t * beta[k] * beta[k];
        }
        acc += (full - v / (v - 1.0) * train) / nd;
    }
    return c / v * acc;
}

// Cell-by-cell form of the V-fold penalty under a shared partition, with the
// empty-training-cell convention of the simulated tables: a cell swallowed
// whole by one block contributes zero (its first term averages over the
// blocks that keep the cell populated) and the model is retained. Equal to
// pen_vf_general whenever every training fit is defined.
inline double pen_vf_cellwise(const DataSet& data, const HistogramModel& model,
                              const FoldAssignment& folds, double c) {
    const double v = static_cast<double>(folds.v);
    if (c < v - 1.0 - 1e-9) throw invalid_size("penalty constant must satisfy C >= V-1");
    const auto n = static_cast<std::int64_t>(data.size());
    const double nd = static_cast<double>(n);
    if (folds.v == static_cast<int>(n)) {
        const FittedHistogram f = fit(data, model);
        double acc = 0.0;
        for (std::size_t k = 0; k < f.dim(); ++k) {
            const double r = static_cast<double>(f.counts[k]);
            if (r < 2.0) continue;  // singleton cells contribute zero
            const double ss = f.within_cell_ss(k);
            // all n removals keep the cell populated; only in-cell removals
            // move its mean, each by (y_i - mean)/(r-1).
            const double dsq_sum = ss / ((r - 1.0) * (r - 1.0));
            acc += r / nd * dsq_sum / nd;
            acc += (r - 1.0) / (nd - 1.0) * dsq_sum / nd;
        }
        return c * acc;
    }
    const auto t = detail::build_fold_table(data, model, folds);
    double acc = 0.0;
    for (std::size_t k = 0; k < t.d; ++k) {
        const double r = static_cast<double>(t.cnt[k]);
        double term1 = 0.0, term2 = 0.0;
        int valid = 0;
        for (int j = 0; j < folds.v; ++j) {
            const std::size_t kj = k * static_cast<std::size_t>(t.v) + static_cast<std::size_t>(j);
            const std::int64_t c_train = t.cnt[k] - t.cnt_b[kj];
            if (c_train == 0) continue;
            ++valid;
            const double beta_t = (t.sum[k] - t.sum_b[kj]) / static_cast<double>(c_train);
            const double beta = t.sum[k] / r;
            const double dsq = (beta_t - beta) * (beta_t - beta);
            term1 += dsq;
            term2 += v / (v - 1.0) * static_cast<double>(c_train) / nd * dsq;
        }
        if (valid == 0) continue;
        acc += r / nd * term1 / static_cast<double>(valid) + term2 / v;
    }
    return c * acc;
}

// Closed-form conditional expectation of the V-fold penalty over stratified
// fold choices (exact; no refits). v = 0 stands for V = n.
inline double pen_vf_closed(const FittedHistogram& f, std::int64_t v, double c) {
    const std::int64_t v_eff = v == 0 ? f.n : v;
    if (v_eff < 2) throw invalid_fold_count("V must be >= 2");
    if (c < static_cast<double>(v_eff - 1) - 1e-9) {
        throw invalid_size("penalty constant must satisfy C >= V-1");
    }
    double acc = 0.0;
    const double nd = static_cast<double>(f.n);
    for (std::size_t k = 0; k < f.dim(); ++k) {
        const std::int64_t r = f.counts[k];
        if (r < 2) throw cell_too_small("closed-form penalty needs every cell count >= 2");
        const auto [r1, r2] = vfold_weight_moments({r, v_eff});
        const double rd = static_cast<double>(r);
        const double comb = std::max(0.0, rd * f.sum_sq[k] - f.sums[k] * f.sums[k]);
        acc += (r1 + r2) * comb / (nd * rd * (rd - 1.0));
    }
    return c * acc;
}

// Mallows' Cp penalty 2 sigma^2 D/n.
inline double mallows_pen(const HistogramModel& model, std::size_t n, double sigma_hat_sq) {
    if (!(sigma_hat_sq >= 0.0)) throw invalid_size("variance estimate must be >= 0");
    return 2.0 * sigma_hat_sq * static_cast<double>(model.dimension()) / static_cast<double>(n);
}

// Difference-based variance estimator: sort by x, project onto the span of
// consecutive-pair indicators; sigma^2_hat = (1/n) sum over pairs (y_a - y_b)^2.
inline double variance_estimator(const DataSet& data) {
    const std::size_t n = data.size();
    if (n % 2 != 0 || n < 4) throw odd_sample_size("variance estimator needs even n >= 4");
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return data.xs[a] < data.xs[b] || (data.xs[a] == data.xs[b] && a < b);
    });
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        const double d = data.ys[order[k]] - data.ys[order[k + 1]];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

// Mallows' penalty with the true design-averaged variance 2 E[sigma^2(X)] D/n.
inline double mallows_star_pen(const RegressionScenario& sc, const HistogramModel& model, std::size_t n) {
    return 2.0 * mean_noise_variance(sc) * static_cast<double>(model.dimension()) / static_cast<double>(n);
}

// Expectation of the ideal penalty: (1/n) sum_cells (2 + delta_{n,p}) sigma_lambda^2.
inline double ideal_expected_pen(const RegressionScenario& sc, const HistogramModel& model, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < model.partition.cells(); ++k) {
        const double p = model.partition.length(k);
        const double s2 = cell_noise_variance(sc, model.partition.lower(k), model.partition.upper(k));
        acc += (2.0 + ideal_penalty_correction(static_cast<std::int64_t>(n), p)) * s2;
    }
    return acc / static_cast<double>(n);
}

struct SelectionOutcome {
    int chosen_id = -1;
    std::vector<std::pair<int, double>> crit;  // (model id, criterion) for defined models
    std::vector<int> dropped;                  // model ids removed this replication
};

// Argmin with ties broken by smallest dimension, then smallest id. Undefined
// entries are NaN.
inline SelectionOutcome select(std::span<const double> crits, std::span<const std::size_t> dims,
                               std::span<const int> ids) {
    if (crits.size() != dims.size() || crits.size() != ids.size()) {
        throw invalid_size("criterion/dimension/id arrays must align");
    }
    SelectionOutcome out;
    std::size_t best = crits.size();
    for (std::size_t i = 0; i < crits.size(); ++i) {
        if (std::isnan(crits[i])) {
            out.dropped.push_back(ids[i]);
            continue;
        }
        out.crit.emplace_back(ids[i], crits[i]);
        if (best == crits.size() || crits[i] < crits[best] ||
            (crits[i] == crits[best] &&
             (dims[i] < dims[best] || (dims[i] == dims[best] && ids[i] < ids[best])))) {
            best = i;
        }
    }
    if (best == crits.size()) throw no_admissible_model("every criterion value is undefined");
    out.chosen_id = ids[best];
    return out;
}

// A fitted admissible model inside a selection run.
struct ModelEval {
    std::size_t index = 0;  // position in the collection
    const HistogramModel* model = nullptr;
    FittedHistogram fitted;
    double risk = 0.0;
};

// Lazily built regular fold assignments, one per V, shared across models and
// across selectors that use the same V.
class FoldCache {
public:
    FoldCache(std::size_t n, std::function<FoldAssignment(int)> maker)
        : n_(n), maker_(std::move(maker)) {}

    static FoldCache keyed(std::size_t n, std::uint64_t master_seed, std::uint64_t replication) {
        return FoldCache(n, [n, master_seed, replication](int v) {
            RngStream rng(master_seed, replication, StreamPurpose::folds, static_cast<std::uint64_t>(v));
            return regular_folds(n, v, rng);
        });
    }

    static FoldCache from_stream(std::size_t n, RngStream& rng) {
        return FoldCache(n, [n, &rng](int v) { return regular_folds(n, v, rng); });
    }

    const FoldAssignment& regular_for(int v) {
        auto it = cache_.find(v);
        if (it == cache_.end()) it = cache_.emplace(v, maker_(v)).first;
        return it->second;
    }

private:
    std::size_t n_ = 0;
    std::function<FoldAssignment(int)> maker_;
    std::map<int, FoldAssignment> cache_;
};

// Scenario-side inputs for the oracle-using methods; per-model entries are
// indexed by collection position.
struct OracleContext {
    const RegressionScenario* scenario = nullptr;
    const std::vector<CellTruth>* truths = nullptr;
    const std::vector<double>* ideal_pens = nullptr;  // precomputed ideal_expected_pen per model
    double mean_noise_var = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double resolve_pen_constant(const SelectorSpec& spec, std::int64_t v_eff) {
    const double def = static_cast<double>(v_eff - 1);
    if (std::isnan(spec.c)) return def;
    if (spec.c < def - 1e-9) throw invalid_size("penalty constant must satisfy C >= V-1");
    return spec.c;
}

}  // namespace detail

// Runs one selector over the admissible models of a dataset. Models whose
// training folds empty a cell are dropped for this replication and reported.
inline SelectionOutcome run_selector(const SelectorSpec& spec, const DataSet& data,
                                     std::span<const ModelEval> models, FoldCache& folds,
                                     const OracleContext& oracle = {}) {
    if (!(spec.overpen >= 1.0)) throw invalid_size("overpenalization factor must be >= 1");
    if (models.empty()) throw no_admissible_model("no admissible model");
    const std::size_t n = data.size();
    const std::int64_t v_eff = spec.v == 0 ? static_cast<std::int64_t>(n) : spec.v;

    double sigma_hat_sq = 0.0;
    if (spec.method == Method::mallows) sigma_hat_sq = variance_estimator(data);

    const FoldAssignment* assignment = nullptr;
    if (spec.method == Method::vfcv || spec.method == Method::corrected_vfcv ||
        spec.method == Method::pen_vf_general) {
        if (v_eff < 2 || v_eff > static_cast<std::int64_t>(n)) {
            throw invalid_fold_count("V must satisfy 2 <= V <= n");
        }
        if (v_eff == static_cast<std::int64_t>(n)) {
            static thread_local FoldAssignment loo;  // identity assignment, rebuilt on size change
            if (loo.size() != n) {
                loo.v = static_cast<int>(n);
                loo.kind = FoldKind::regular;
                loo.block_of.resize(n);
                std::iota(loo.block_of.begin(), loo.block_of.end(), 0);
            }
            assignment = &loo;
        } else {
            assignment = &folds.regular_for(static_cast<int>(v_eff));
        }
    }

    std::vector<double> crits(models.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> dims(models.size());
    std::vector<int> ids(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        const ModelEval& ev = models[i];
        dims[i] = ev.model->dimension();
        ids[i] = ev.model->id;
        try {
            switch (spec.method) {
                case Method::vfcv: {
                    const double cv = crit_vfcv(data, *ev.model, *assignment);
                    crits[i] = ev.risk + spec.overpen * (cv - ev.risk);
                    break;
                }
                case Method::corrected_vfcv: {
                    const double cc = crit_corrected_vfcv(data, *ev.model, *assignment);
                    crits[i] = ev.risk + spec.overpen * (cc - ev.risk);
                    break;
                }
                case Method::pen_vf_general: {
                    const double c = detail::resolve_pen_constant(spec, v_eff);
                    crits[i] = ev.risk + spec.overpen * pen_vf_cellwise(data, *ev.model, *assignment, c);
                    break;
                }
                case Method::pen_vf_closed: {
                    const double c = detail::resolve_pen_constant(spec, v_eff);
                    crits[i] = ev.risk + spec.overpen * pen_vf_closed(ev.fitted, v_eff, c);
                    break;
                }
                case Method::mallows:
                    crits[i] = ev.risk + spec.overpen * mallows_pen(*ev.model, n, sigma_hat_sq);
                    break;
                case Method::mallows_star: {
                    if (oracle.scenario == nullptr) throw invalid_size("mallows* needs the scenario");
                    const double mean_var = std::isnan(oracle.mean_noise_var)
                                                ? mean_noise_variance(*oracle.scenario)
                                                : oracle.mean_noise_var;
                    crits[i] = ev.risk + spec.overpen * mallows_pen(*ev.model, n, mean_var);
                    break;
                }
                case Method::ideal_expected_penalty: {
                    double pen;
                    if (oracle.ideal_pens != nullptr) {
                        pen = (*oracle.ideal_pens)[ev.index];
                    } else if (oracle.scenario != nullptr) {
                        pen = ideal_expected_pen(*oracle.scenario, *ev.model, n);
                    } else {
                        throw invalid_size("ideal expected penalty needs the scenario");
                    }
                    crits[i] = ev.risk + spec.overpen * pen;
                    break;
                }
                case Method::path_oracle: {
                    if (oracle.truths == nullptr) throw invalid_size("path oracle needs cell truths");
                    crits[i] = excess_loss(ev.fitted, (*oracle.truths)[ev.index]);
                    break;
                }
            }
        } catch (const undefined_training_fit&) {
            // left NaN; select() reports the drop
        }
    }
    return select(crits, dims, ids);
}

// Convenience entry point matching the one-shot signature: filters the
// admissible set at threshold 3, fits, draws folds from the stream, selects.
inline SelectionOutcome run_selector(const SelectorSpec& spec, const DataSet& data,
                                     const ModelCollection& collection, const RegressionScenario* scenario,
                                     RngStream& rng) {
    const auto admissible = filter_admissible(data, collection, 3);
    std::vector<ModelEval> evals;
    evals.reserve(admissible.size());
    for (std::size_t idx : admissible) {
        ModelEval ev;
        ev.index = idx;
        ev.model = &collection.models[idx];
        ev.fitted = fit(data, *ev.model);
        ev.risk = empirical_risk(ev.fitted, data);
        evals.push_back(std::move(ev));
    }
    FoldCache folds = FoldCache::from_stream(data.size(), rng);
    OracleContext oracle;
    oracle.scenario = scenario;
    std::vector<CellTruth> truths;
    if (scenario != nullptr && spec.method == Method::path_oracle) {
        truths.reserve(collection.models.size());
        for (const auto& m : collection.models) truths.push_back(cell_truth(*scenario, m));
        oracle.truths = &truths;
    }
    return run_selector(spec, data, evals, folds, oracle);
}

}  // namespace vfpen
