#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "vfpen/binomial.hpp"
#include "vfpen/errors.hpp"
#include "vfpen/fit.hpp"
#include "vfpen/oracle.hpp"
#include "vfpen/partition.hpp"
#include "vfpen/rng.hpp"
#include "vfpen/scenario.hpp"
#include "vfpen/selectors.hpp"

namespace vfpen {

// Everything about a (scenario, collection) pair that does not depend on the
// data: the models, their exact cell truths, and the oracle penalties.
// Built once, immutable, shared read-only by all replication workers.
struct ScenarioCache {
    RegressionScenario scenario;
    ModelCollection collection;
    std::vector<CellTruth> truths;    // per model
    std::vector<double> ideal_pens;   // per model: expectation of the ideal penalty
    double mean_noise_var = 0.0;
};

inline ScenarioCache make_scenario_cache(const RegressionScenario& sc) {
    ScenarioCache cache;
    cache.scenario = sc;
    cache.collection = build_collection(sc.collection_kind, sc.n);
    cache.mean_noise_var = mean_noise_variance(sc);
    cache.truths.reserve(cache.collection.models.size());
    cache.ideal_pens.reserve(cache.collection.models.size());
    std::map<double, double> delta_by_p;  // cells of equal length share delta_{n,p}
    const auto n = static_cast<std::int64_t>(sc.n);
    for (const auto& model : cache.collection.models) {
        CellTruth truth = cell_truth(sc, model);
        double pen = 0.0;
        for (std::size_t k = 0; k < model.partition.cells(); ++k) {
            const double p = model.partition.length(k);
            auto it = delta_by_p.find(p);
            if (it == delta_by_p.end()) {
                it = delta_by_p.emplace(p, ideal_penalty_correction(n, p)).first;
            }
            pen += (2.0 + it->second) * truth.cell_noise_var[k];
        }
        cache.ideal_pens.push_back(pen / static_cast<double>(sc.n));
        cache.truths.push_back(std::move(truth));
    }
    return cache;
}

struct ReplicationResult {
    std::vector<double> selector_loss;          // excess loss of each selector's choice
    std::vector<std::uint32_t> selector_drops;  // models dropped per selector
    double oracle_loss = 0.0;                   // inf over the admissible set
    std::vector<double> model_loss;             // per collection model; NaN if inadmissible
};

// One simulated dataset: the admissible set is computed once and shared, every
// selector runs on it, and the oracle infimum is over the same set.
inline ReplicationResult run_replication(const ScenarioCache& cache,
                                         std::span<const SelectorSpec> selectors,
                                         std::uint64_t master_seed, std::uint64_t replication) {
    RngStream data_rng(master_seed, replication, StreamPurpose::data);
    const DataSet data = generate(cache.scenario, data_rng);

    const auto admissible = filter_admissible(data, cache.collection, 3);
    std::vector<ModelEval> evals;
    evals.reserve(admissible.size());
    for (std::size_t idx : admissible) {
        ModelEval ev;
        ev.index = idx;
        ev.model = &cache.collection.models[idx];
        ev.fitted = fit(data, *ev.model);
        ev.risk = empirical_risk(ev.fitted, data);
        evals.push_back(std::move(ev));
    }

    ReplicationResult rep;
    rep.model_loss.assign(cache.collection.models.size(), std::numeric_limits<double>::quiet_NaN());
    rep.oracle_loss = std::numeric_limits<double>::infinity();
    std::map<int, double> loss_by_id;
    for (const auto& ev : evals) {
        const double loss = excess_loss(ev.fitted, cache.truths[ev.index]);
        rep.model_loss[ev.index] = loss;
        loss_by_id[ev.model->id] = loss;
        rep.oracle_loss = std::min(rep.oracle_loss, loss);
    }

    FoldCache folds = FoldCache::keyed(data.size(), master_seed, replication);
    OracleContext oracle;
    oracle.scenario = &cache.scenario;
    oracle.truths = &cache.truths;
    oracle.ideal_pens = &cache.ideal_pens;
    oracle.mean_noise_var = cache.mean_noise_var;

    rep.selector_loss.reserve(selectors.size());
    rep.selector_drops.reserve(selectors.size());
    for (const auto& spec : selectors) {
        const SelectionOutcome outcome = run_selector(spec, data, evals, folds, oracle);
        rep.selector_loss.push_back(loss_by_id.at(outcome.chosen_id));
        rep.selector_drops.push_back(static_cast<std::uint32_t>(outcome.dropped.size()));
    }
    return rep;
}

// One-shot form: a fresh cache and the replication indexed by the seed alone.
inline ReplicationResult run_replication(const RegressionScenario& sc,
                                         std::span<const SelectorSpec> selectors, std::uint64_t seed) {
    const ScenarioCache cache = make_scenario_cache(sc);
    return run_replication(cache, selectors, seed, 0);
}

struct BenchmarkRow {
    SelectorSpec spec;        // c resolved to its effective value
    double c_or = 0.0;
    double se_or = 0.0;
    double c_path_or = 0.0;
    double se_path_or = 0.0;
    double c_prime_or = 0.0;
    std::uint64_t drops = 0;  // dropped models accumulated over replications
};

struct BenchmarkTable {
    std::string scenario;
    std::size_t n = 0;
    CollectionKind collection_kind = CollectionKind::regular;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<BenchmarkRow> rows;
};

namespace detail {

inline int method_rank(Method m) {
    switch (m) {
        case Method::ideal_expected_penalty: return 0;
        case Method::mallows: return 1;
        case Method::mallows_star: return 2;
        case Method::vfcv: return 3;
        case Method::corrected_vfcv: return 4;
        case Method::pen_vf_general: return 5;
        case Method::pen_vf_closed: return 5;  // one pen block: pen2-F ... penLoo
        case Method::path_oracle: return 7;
    }
    return 8;
}

// Row order used by the report tables: method group, then plain before "+",
// then V ascending with V = n last.
inline bool selector_order(const SelectorSpec& a, const SelectorSpec& b) {
    const auto vkey = [](const SelectorSpec& s) {
        return s.v == 0 ? std::numeric_limits<std::int64_t>::max() : static_cast<std::int64_t>(s.v);
    };
    const auto ckey = [](const SelectorSpec& s) { return std::isnan(s.c) ? -1.0 : s.c; };
    return std::tuple(method_rank(a.method), a.overpen, vkey(a), ckey(a)) <
           std::tuple(method_rank(b.method), b.overpen, vkey(b), ckey(b));
}

inline bool same_selector(const SelectorSpec& a, const SelectorSpec& b) {
    const bool c_equal = (std::isnan(a.c) && std::isnan(b.c)) || a.c == b.c;
    return a.method == b.method && a.v == b.v && c_equal && a.overpen == b.overpen;
}

inline double sample_sd(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

// Runs N independent replications (in parallel when threads != 1) and builds
// the accuracy-index table. Results are bit-identical for any thread count:
// replication r depends only on (seed, r), and the slots are reduced in index
// order after the parallel phase.
inline BenchmarkTable benchmark(const RegressionScenario& sc, std::vector<SelectorSpec> selectors,
                                std::size_t replications, std::uint64_t seed, unsigned threads = 0) {
    if (replications < 2) throw invalid_size("benchmark needs at least 2 replications");
    std::sort(selectors.begin(), selectors.end(), detail::selector_order);
    selectors.erase(std::unique(selectors.begin(), selectors.end(), detail::same_selector),
                    selectors.end());

    const ScenarioCache cache = make_scenario_cache(sc);

    std::vector<ReplicationResult> slots(replications);
    std::vector<std::exception_ptr> errors(replications);
    auto worker_body = [&](std::size_t r) {
        try {
            slots[r] = run_replication(cache, selectors, seed, r);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };

    unsigned worker_count = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    worker_count = std::min<unsigned>(worker_count, static_cast<unsigned>(replications));
    if (worker_count <= 1) {
        for (std::size_t r = 0; r < replications; ++r) worker_body(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (unsigned w = 0; w < worker_count; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next.fetch_add(1); r < replications; r = next.fetch_add(1)) {
                    worker_body(r);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }

    const double nrep = static_cast<double>(replications);
    double mean_oracle = 0.0;
    for (const auto& rep : slots) mean_oracle += rep.oracle_loss;
    mean_oracle /= nrep;

    // Best per-model mean loss, accumulated over the replications in which the
    // model was admissible (the C'_or denominator).
    double best_model_mean = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < cache.collection.models.size(); ++m) {
        double acc = 0.0;
        std::size_t cnt = 0;
        for (const auto& rep : slots) {
            if (!std::isnan(rep.model_loss[m])) {
                acc += rep.model_loss[m];
                ++cnt;
            }
        }
        if (cnt > 0) best_model_mean = std::min(best_model_mean, acc / static_cast<double>(cnt));
    }

    BenchmarkTable table;
    table.scenario = sc.name;
    table.n = sc.n;
    table.collection_kind = sc.collection_kind;
    table.replications = replications;
    table.seed = seed;
    std::vector<double> losses(replications), ratios(replications);
    for (std::size_t s = 0; s < selectors.size(); ++s) {
        BenchmarkRow row;
        row.spec = selectors[s];
        if (std::isnan(row.spec.c) &&
            (row.spec.method == Method::pen_vf_general || row.spec.method == Method::pen_vf_closed)) {
            row.spec.c = static_cast<double>((row.spec.v == 0 ? static_cast<std::int64_t>(sc.n)
                                                              : row.spec.v) -
                                             1);
        }
        for (std::size_t r = 0; r < replications; ++r) {
            losses[r] = slots[r].selector_loss[s];
            ratios[r] = slots[r].selector_loss[s] / slots[r].oracle_loss;
            row.drops += slots[r].selector_drops[s];
        }
        double mean_loss = 0.0, mean_ratio = 0.0;
        for (std::size_t r = 0; r < replications; ++r) {
            mean_loss += losses[r];
            mean_ratio += ratios[r];
        }
        mean_loss /= nrep;
        mean_ratio /= nrep;
        row.c_or = mean_loss / mean_oracle;
        row.se_or = detail::sample_sd(losses, mean_loss) / std::sqrt(nrep) / mean_oracle;
        row.c_path_or = mean_ratio;
        row.se_path_or = detail::sample_sd(ratios, mean_ratio) / std::sqrt(nrep);
        row.c_prime_or = mean_loss / best_model_mean;
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace vfpen
