// Configuration search, multi-seed benchmarking, the contaminated-training
// study, and report generation.
//
// Window-size candidates per dataset: W+ is the multiple of 50 strictly
// greater than the average anomaly length a, W- is max([a/2], 10) with
// round-half-up brackets, plus the default W=96. Reconstruction sweeps
// S in {[W/2], [W/10]} and M in {W, [W/5]}; forecasting fixes S=1, M=2.
// Selection takes the best mean MCC over seeds, widens to every config
// whose mean+-std interval overlaps the best's, then prefers the smallest
// M, then the smallest S, then the smallest W.
//
// Thresholds default to POT fitted on the scores of the anomaly-free
// training split and applied to the test scores; fitting on the scored
// series itself is available via GridOptions::calibrate_on_train = false.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tsad/dataio.hpp"
#include "tsad/labeling.hpp"
#include "tsad/metrics.hpp"
#include "tsad/models.hpp"
#include "tsad/scoring.hpp"

namespace tsad {

struct DatasetStats {
    double a = 1.0;        // average anomaly length
    double b = 1.0;        // minimal anomaly length (recorded, consumed by no rule)
    std::size_t N = 1;
    std::size_t T_train = 0;
    std::size_t T_test = 0;

    void validate() const {
        if (a < b || b < 1.0) throw Error("bad_stats", "anomaly lengths need a >= b >= 1");
    }
};

struct Dataset {
    std::string name;
    TimeSeries train;  // nominally anomaly-free
    TimeSeries test;   // labeled

    void validate() const {
        train.validate();
        test.validate();
        if (train.N != test.N) throw Error("bad_dataset", "train/test variate count mismatch");
        if (!test.has_labels()) throw Error("bad_dataset", "test split needs labels for evaluation");
    }
};

// Anomaly-length statistics measured on the labelled test split.
inline DatasetStats estimate_stats(const Dataset& ds) {
    ds.validate();
    std::vector<std::size_t> runs;
    std::size_t cur = 0;
    for (std::size_t t = 0; t < ds.test.T; ++t) {
        if (ds.test.labels[t]) {
            ++cur;
        } else if (cur > 0) {
            runs.push_back(cur);
            cur = 0;
        }
    }
    if (cur > 0) runs.push_back(cur);
    if (runs.empty()) throw Error("bad_dataset", "test split has no labeled anomalies");

    DatasetStats s;
    s.N = ds.test.N;
    s.T_train = ds.train.T;
    s.T_test = ds.test.T;
    double total = 0.0;
    std::size_t mn = runs[0];
    for (std::size_t r : runs) {
        total += static_cast<double>(r);
        mn = std::min(mn, r);
    }
    s.a = total / static_cast<double>(runs.size());
    s.b = static_cast<double>(mn);
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Candidate grid (Appendix-style rules)

enum class SearchApproach { reco, fc };

namespace detail {

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

inline void push_unique(std::vector<std::size_t>& v, std::size_t x) {
    for (std::size_t e : v) {
        if (e == x) return;
    }
    v.push_back(x);
}

inline std::size_t heads_for(std::size_t M) { return M % 2 == 0 ? 2 : 1; }

}  // namespace detail

inline std::vector<ModelConfig> derive_candidates(const DatasetStats& stats, SearchApproach approach) {
    stats.validate();
    const std::size_t w_plus = 50 * (static_cast<std::size_t>(std::floor(stats.a / 50.0)) + 1);
    const std::size_t w_minus = std::max<std::size_t>(detail::round_half_up(stats.a / 2.0), 10);

    std::vector<std::size_t> windows;
    detail::push_unique(windows, w_plus);
    detail::push_unique(windows, w_minus);
    detail::push_unique(windows, 96);

    std::vector<ModelConfig> out;
    for (std::size_t W : windows) {
        if (approach == SearchApproach::fc) {
            ModelConfig c;
            c.kind = ModelKind::itransformer_fc;
            c.W = W;
            c.S = 1;
            c.M = 2;
            c.n_heads = detail::heads_for(c.M);
            out.push_back(c);
            continue;
        }
        std::vector<std::size_t> steps;
        detail::push_unique(steps, std::max<std::size_t>(detail::round_half_up(W / 2.0), 1));
        detail::push_unique(steps, std::max<std::size_t>(detail::round_half_up(W / 10.0), 1));
        std::vector<std::size_t> sizes;
        detail::push_unique(sizes, W);
        detail::push_unique(sizes, std::max<std::size_t>(detail::round_half_up(W / 5.0), 1));
        for (std::size_t S : steps) {
            for (std::size_t M : sizes) {
                ModelConfig c;
                c.kind = ModelKind::itransformer_reco;
                c.W = W;
                c.S = S;
                c.M = M;
                c.n_heads = detail::heads_for(M);
                out.push_back(c);
            }
        }
    }
    for (ModelConfig& c : out) c.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Grid runs

struct CombinationScore {
    std::vector<double> per_seed;
    double mean = 0.0;
    double stddev = 0.0;
};

struct RunResult {
    ModelConfig config;
    std::vector<std::uint64_t> seeds;
    std::map<CombineMethod, CombinationScore> by_combination;
    CombineMethod chosen_combination = CombineMethod::global;
    double mcc_mean = 0.0;
    double mcc_std = 0.0;
};

struct GridOptions {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ThresholdSpec threshold;            // POT defaults
    bool calibrate_on_train = true;     // fit thresholds on training-split scores
    std::size_t jobs = 0;               // 0: hardware concurrency
};

namespace detail {

struct PreparedData {
    TimeSeries train_norm;
    TimeSeries test_norm;
};

inline PreparedData prepare(const Dataset& ds) {
    PreparedData p;
    p.train_norm = normalize(ds.train, NormMode::zscore);
    p.test_norm = normalize(ds.test, NormMode::zscore, p.train_norm.norm_stats);
    return p;
}

inline void mean_std(const std::vector<double>& v, double& mean, double& stddev) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    stddev = 0.0;
    if (v.size() > 1) {
        for (double x : v) stddev += (x - mean) * (x - mean);
        stddev = std::sqrt(stddev / static_cast<double>(v.size() - 1));
    }
}

// Trains one (config, seed) pair and returns the MCC per combination method.
inline std::map<CombineMethod, double> run_single(const PreparedData& data,
                                                  const std::vector<std::uint8_t>& truth, ModelConfig cfg,
                                                  std::uint64_t seed, const ThresholdSpec& spec,
                                                  bool calibrate_on_train) {
    cfg.seed = seed;
    const WindowSet train_ws = make_windows(data.train_norm, cfg.W, cfg.S, WindowPurpose::train);
    TrainedModel tm = train_model(cfg, train_ws);

    const bool forecasting = cfg.kind == ModelKind::itransformer_fc;
    ScoreSeries test_scores = forecasting ? score_forecast(*tm.model, data.test_norm)
                                          : score_reconstruction(*tm.model, data.test_norm);
    ScoreSeries calib;
    if (calibrate_on_train) {
        calib = forecasting ? score_forecast(*tm.model, data.train_norm)
                            : score_reconstruction(*tm.model, data.train_norm);
    }

    std::map<CombineMethod, double> out;
    for (CombineMethod comb : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
        LabelResult labels = extract_labels(test_scores, spec, comb, calibrate_on_train ? &calib : nullptr);
        out[comb] = mcc(confusion(labels.labels, truth));
    }
    return out;
}

// Index-addressed parallel for; results land in caller-owned slots, so the
// outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline std::vector<RunResult> run_grid(const Dataset& ds, const std::vector<ModelConfig>& candidates,
                                       const GridOptions& opt = GridOptions{}) {
    ds.validate();
    if (candidates.empty()) throw Error("bad_config", "empty candidate list");
    if (opt.seeds.empty()) throw Error("bad_config", "empty seed list");
    const detail::PreparedData data = detail::prepare(ds);
    const std::vector<std::uint8_t>& truth = ds.test.labels;

    const std::size_t n_runs = candidates.size() * opt.seeds.size();
    std::vector<std::map<CombineMethod, double>> cells(n_runs);
    detail::parallel_for(n_runs, opt.jobs, [&](std::size_t i) {
        const std::size_t ci = i / opt.seeds.size();
        const std::size_t si = i % opt.seeds.size();
        cells[i] = detail::run_single(data, truth, candidates[ci], opt.seeds[si], opt.threshold,
                                      opt.calibrate_on_train);
    });

    std::vector<RunResult> results;
    results.reserve(candidates.size());
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        RunResult r;
        r.config = candidates[ci];
        r.seeds = opt.seeds;
        for (CombineMethod comb : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
            CombinationScore cs;
            for (std::size_t si = 0; si < opt.seeds.size(); ++si) {
                cs.per_seed.push_back(cells[ci * opt.seeds.size() + si].at(comb));
            }
            detail::mean_std(cs.per_seed, cs.mean, cs.stddev);
            r.by_combination[comb] = cs;
        }
        r.chosen_combination = CombineMethod::global;
        for (CombineMethod comb : {CombineMethod::local_or, CombineMethod::local_majority}) {
            if (r.by_combination[comb].mean > r.by_combination[r.chosen_combination].mean) {
                r.chosen_combination = comb;
            }
        }
        r.mcc_mean = r.by_combination[r.chosen_combination].mean;
        r.mcc_std = r.by_combination[r.chosen_combination].stddev;
        results.push_back(std::move(r));
    }
    return results;
}

// Highest mean MCC, widened by interval overlap, then smallest M, then
// smallest S, then smallest W. Anchor ties on the max mean resolve to the
// smallest (M, S, W) so the result never depends on input order.
inline ModelConfig select_best(const std::vector<RunResult>& results) {
    if (results.empty()) throw Error("bad_config", "select_best on empty results");

    auto size_key = [](const RunResult& r) {
        return std::tuple<std::size_t, std::size_t, std::size_t>(r.config.M, r.config.S, r.config.W);
    };

    const RunResult* best = &results[0];
    for (const RunResult& r : results) {
        if (r.mcc_mean > best->mcc_mean ||
            (r.mcc_mean == best->mcc_mean && size_key(r) < size_key(*best))) {
            best = &r;
        }
    }
    const double blo = best->mcc_mean - best->mcc_std;
    const double bhi = best->mcc_mean + best->mcc_std;

    const RunResult* chosen = best;
    for (const RunResult& r : results) {
        const double lo = r.mcc_mean - r.mcc_std;
        const double hi = r.mcc_mean + r.mcc_std;
        if (hi < blo || lo > bhi) continue;  // interval does not overlap the best's
        if (size_key(r) < size_key(*chosen)) chosen = &r;
    }
    return chosen->config;
}

// ---------------------------------------------------------------------------
// Contaminated-training study

struct ContaminationRow {
    double rate = 0.0;       // labeled fraction actually present in training
    LossKind loss = LossKind::mse;
    double mcc_mean = 0.0;
    double mcc_std = 0.0;
    CombineMethod best_combination = CombineMethod::global;
};

// Templates injected into training data when the study synthesizes its own
// contamination.
inline std::vector<AnomalySpec> default_contamination_pool(std::size_t N) {
    std::vector<AnomalySpec> pool;
    const AnomalyKind kinds[] = {AnomalyKind::collective_shape, AnomalyKind::collective_trend,
                                 AnomalyKind::collective_season, AnomalyKind::point_global,
                                 AnomalyKind::point_contextual};
    for (std::size_t i = 0; i < 5; ++i) {
        AnomalySpec s;
        s.kind = kinds[i];
        s.length = s.is_point() ? 1 : 30;
        s.magnitude = s.kind == AnomalyKind::point_global ? 1.5 : 1.0;
        s.variates = {i % N};
        pool.push_back(s);
    }
    return pool;
}

struct ContaminationOptions {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ThresholdSpec threshold;
    bool calibrate_on_train = true;
    std::size_t jobs = 0;
    std::uint64_t injection_seed = 9001;
};

// Trains the given reconstruction config on clean vs contaminated training
// data for each loss and reports the best-combination MCC. When the train
// split already carries anomaly labels, rate 0 drops the labeled rows and
// nonzero rates reuse the contaminated series as-is; otherwise anomalies are
// injected at the requested rates.
inline std::vector<ContaminationRow> contamination_study(const Dataset& ds, const ModelConfig& base_config,
                                                         const std::vector<LossKind>& losses,
                                                         const std::vector<double>& rates,
                                                         const ContaminationOptions& opt = ContaminationOptions{}) {
    ds.validate();
    if (base_config.kind != ModelKind::itransformer_reco) {
        throw Error("bad_config", "the contamination study trains the reconstruction iTransformer");
    }

    bool train_has_anomalies = false;
    if (ds.train.has_labels()) {
        for (std::uint8_t l : ds.train.labels) train_has_anomalies = train_has_anomalies || l;
    }

    // one training series per rate
    std::vector<std::pair<double, TimeSeries>> arms;
    if (train_has_anomalies) {
        TimeSeries clean;
        clean.name = ds.train.name + "/filtered";
        clean.N = ds.train.N;
        clean.variate_names = ds.train.variate_names;
        for (std::size_t t = 0; t < ds.train.T; ++t) {
            if (ds.train.labels[t]) continue;
            for (std::size_t n = 0; n < ds.train.N; ++n) clean.values.push_back(ds.train.at(t, n));
            ++clean.T;
        }
        clean.validate();
        double fraction = 0.0;
        for (std::uint8_t l : ds.train.labels) fraction += l;
        fraction /= static_cast<double>(ds.train.T);
        arms.emplace_back(0.0, std::move(clean));
        arms.emplace_back(fraction, ds.train);
    } else {
        const std::vector<AnomalySpec> pool = default_contamination_pool(ds.train.N);
        for (double rate : rates) {
            TimeSeries t = contaminate(ds.train, pool, rate, opt.injection_seed);
            double fraction = 0.0;
            for (std::uint8_t l : t.labels) fraction += l;
            fraction /= static_cast<double>(t.T);
            t.labels.clear();  // labels were bookkeeping; training is unsupervised
            arms.emplace_back(fraction, std::move(t));
        }
    }

    struct Job {
        std::size_t arm;
        LossKind loss;
    };
    std::vector<Job> jobs_list;
    for (std::size_t a = 0; a < arms.size(); ++a) {
        for (LossKind l : losses) jobs_list.push_back({a, l});
    }

    std::vector<ContaminationRow> rows(jobs_list.size());
    std::vector<detail::PreparedData> prepared(arms.size());
    for (std::size_t a = 0; a < arms.size(); ++a) {
        Dataset arm_ds{ds.name, arms[a].second, ds.test};
        prepared[a] = detail::prepare(arm_ds);
    }

    const std::size_t n_runs = jobs_list.size() * opt.seeds.size();
    std::vector<std::map<CombineMethod, double>> cells(n_runs);
    detail::parallel_for(n_runs, opt.jobs, [&](std::size_t i) {
        const std::size_t ji = i / opt.seeds.size();
        const std::size_t si = i % opt.seeds.size();
        ModelConfig cfg = base_config;
        cfg.loss.kind = jobs_list[ji].loss;
        cells[i] = detail::run_single(prepared[jobs_list[ji].arm], ds.test.labels, cfg, opt.seeds[si],
                                      opt.threshold, opt.calibrate_on_train);
    });

    for (std::size_t ji = 0; ji < jobs_list.size(); ++ji) {
        ContaminationRow row;
        row.rate = arms[jobs_list[ji].arm].first;
        row.loss = jobs_list[ji].loss;
        double best_mean = -2.0;
        for (CombineMethod comb : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
            std::vector<double> per_seed;
            for (std::size_t si = 0; si < opt.seeds.size(); ++si) {
                per_seed.push_back(cells[ji * opt.seeds.size() + si].at(comb));
            }
            double mean, stddev;
            detail::mean_std(per_seed, mean, stddev);
            if (mean > best_mean) {
                best_mean = mean;
                row.mcc_mean = mean;
                row.mcc_std = stddev;
                row.best_combination = comb;
            }
        }
        rows[ji] = row;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Model comparison benchmark

struct BenchmarkRow {
    std::string dataset;
    ModelKind model = ModelKind::baseline;
    bool deterministic = false;  // baseline carries a single MCC, no std
    double mcc_mean = 0.0;
    double mcc_std = 0.0;
    std::string combination;  // "all equal" on univariate data
    std::vector<double> per_seed;
};

struct BenchmarkOptions {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ThresholdSpec threshold;
    bool calibrate_on_train = true;
    std::size_t jobs = 0;
};

// USAD runs its published fixed configuration.
inline ModelConfig usad_default_config() {
    ModelConfig c;
    c.kind = ModelKind::usad;
    c.W = 10;
    c.S = 5;
    c.latent = 5;
    return c;
}

inline std::vector<BenchmarkRow> benchmark(const Dataset& ds, const ModelConfig& reco_config,
                                           const ModelConfig& fc_config,
                                           const BenchmarkOptions& opt = BenchmarkOptions{}) {
    ds.validate();
    const detail::PreparedData data = detail::prepare(ds);
    const bool univariate = ds.test.N == 1;

    std::vector<ModelConfig> model_configs;
    {
        model_configs.push_back(usad_default_config());
        ModelConfig vanilla = reco_config;  // identical configuration, standard embedding
        vanilla.kind = ModelKind::transformer_reco;
        vanilla.n_heads = detail::heads_for(vanilla.M);
        model_configs.push_back(vanilla);
        ModelConfig fc = fc_config;
        fc.kind = ModelKind::itransformer_fc;
        fc.S = 1;
        model_configs.push_back(fc);
        ModelConfig reco = reco_config;
        reco.kind = ModelKind::itransformer_reco;
        model_configs.push_back(reco);
    }

    const std::size_t n_runs = model_configs.size() * opt.seeds.size();
    std::vector<std::map<CombineMethod, double>> cells(n_runs);
    detail::parallel_for(n_runs, opt.jobs, [&](std::size_t i) {
        const std::size_t mi = i / opt.seeds.size();
        const std::size_t si = i % opt.seeds.size();
        cells[i] = detail::run_single(data, ds.test.labels, model_configs[mi], opt.seeds[si], opt.threshold,
                                      opt.calibrate_on_train);
    });

    std::vector<BenchmarkRow> rows;

    {
        // deterministic baseline: absolute value of the normalized input
        BenchmarkRow row;
        row.dataset = ds.name;
        row.model = ModelKind::baseline;
        row.deterministic = true;
        ScoreSeries test_scores = baseline_score(data.test_norm);
        ScoreSeries calib = baseline_score(data.train_norm);
        double best = -2.0;
        for (CombineMethod comb : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
            LabelResult lr = extract_labels(test_scores, opt.threshold, comb,
                                            opt.calibrate_on_train ? &calib : nullptr);
            const double m = mcc(confusion(lr.labels, ds.test.labels));
            if (m > best) {
                best = m;
                row.combination = combine_method_name(comb);
            }
        }
        row.mcc_mean = best;
        row.per_seed = {best};
        if (univariate) row.combination = "all equal";
        rows.push_back(std::move(row));
    }

    for (std::size_t mi = 0; mi < model_configs.size(); ++mi) {
        BenchmarkRow row;
        row.dataset = ds.name;
        row.model = model_configs[mi].kind;
        double best_mean = -2.0;
        for (CombineMethod comb : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
            std::vector<double> per_seed;
            for (std::size_t si = 0; si < opt.seeds.size(); ++si) {
                per_seed.push_back(cells[mi * opt.seeds.size() + si].at(comb));
            }
            double mean, stddev;
            detail::mean_std(per_seed, mean, stddev);
            if (mean > best_mean) {
                best_mean = mean;
                row.mcc_mean = mean;
                row.mcc_std = stddev;
                row.combination = combine_method_name(comb);
                row.per_seed = per_seed;
            }
        }
        if (univariate) row.combination = "all equal";
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Synthetic desk-scale profile: one continuous base series split into an
// anomaly-free training half and a labeled test half.

struct SyntheticProfile {
    std::size_t T = 5000;  // per split
    std::size_t N = 5;
    std::size_t n_point = 10;
    std::size_t n_collective = 10;
    std::uint64_t seed = 1234;
};

inline Dataset make_synthetic_dataset(const SyntheticProfile& p) {
    Rng placement(p.seed ^ 0x9e3779b97f4a7c15ULL);
    const std::size_t total = 2 * p.T;
    const std::vector<AnomalySpec> specs =
        make_default_specs(total, p.N, p.n_point, p.n_collective, placement, p.T);
    TimeSeries full = synthesize(total, p.N, specs, p.seed);

    Dataset ds;
    ds.name = "synthetic";
    ds.train = TimeSeries::zeros("synthetic/train", p.T, p.N);
    ds.test = TimeSeries::zeros("synthetic/test", p.T, p.N);
    ds.train.labels.assign(p.T, 0);
    ds.test.labels.assign(p.T, 0);
    for (std::size_t t = 0; t < p.T; ++t) {
        for (std::size_t n = 0; n < p.N; ++n) {
            ds.train.at(t, n) = full.at(t, n);
            ds.test.at(t, n) = full.at(p.T + t, n);
        }
        ds.test.labels[t] = full.labels[p.T + t];
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// Reports: structured JSON plus an aligned human-readable table. Byte
// content depends only on the inputs (no timestamps).

inline nlohmann::json to_json(const RunResult& r) {
    nlohmann::json by_comb = nlohmann::json::object();
    for (const auto& [comb, cs] : r.by_combination) {
        by_comb[combine_method_name(comb)] = {
            {"per_seed", cs.per_seed}, {"mean", cs.mean}, {"std", cs.stddev}};
    }
    return nlohmann::json{{"config", to_json(r.config)},
                          {"seeds", r.seeds},
                          {"by_combination", by_comb},
                          {"chosen_combination", combine_method_name(r.chosen_combination)},
                          {"mcc_mean", r.mcc_mean},
                          {"mcc_std", r.mcc_std}};
}

inline nlohmann::json to_json(const std::vector<BenchmarkRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BenchmarkRow& r : rows) {
        arr.push_back(nlohmann::json{{"dataset", r.dataset},
                                     {"model", model_kind_name(r.model)},
                                     {"deterministic", r.deterministic},
                                     {"mcc_mean", r.mcc_mean},
                                     {"mcc_std", r.mcc_std},
                                     {"combination", r.combination},
                                     {"per_seed", r.per_seed}});
    }
    return arr;
}

inline nlohmann::json to_json(const std::vector<ContaminationRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ContaminationRow& r : rows) {
        arr.push_back(nlohmann::json{{"rate", r.rate},
                                     {"loss", loss_name(r.loss)},
                                     {"mcc_mean", r.mcc_mean},
                                     {"mcc_std", r.mcc_std},
                                     {"best_combination", combine_method_name(r.best_combination)}});
    }
    return arr;
}

inline std::string format_benchmark_table(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "dataset" << std::setw(20) << "model" << std::setw(22)
       << "best MCC" << "combination\n";
    for (const BenchmarkRow& r : rows) {
        std::ostringstream mccs;
        mccs << std::fixed << std::setprecision(3) << r.mcc_mean;
        if (!r.deterministic) mccs << " +- " << std::fixed << std::setprecision(3) << r.mcc_std;
        os << std::left << std::setw(12) << r.dataset << std::setw(20) << model_kind_name(r.model)
           << std::setw(22) << mccs.str() << r.combination << "\n";
    }
    return os.str();
}

inline std::string format_contamination_table(const std::vector<ContaminationRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "train rate" << std::setw(10) << "loss" << std::setw(22)
       << "best MCC" << "combination\n";
    for (const ContaminationRow& r : rows) {
        std::ostringstream rate;
        rate << std::fixed << std::setprecision(2) << 100.0 * r.rate << "%";
        std::ostringstream mccs;
        mccs << std::fixed << std::setprecision(3) << r.mcc_mean << " +- " << std::fixed
             << std::setprecision(3) << r.mcc_std;
        os << std::left << std::setw(12) << rate.str() << std::setw(10) << loss_name(r.loss)
           << std::setw(22) << mccs.str() << combine_method_name(r.best_combination) << "\n";
    }
    return os.str();
}

inline std::string format_grid_table(const std::vector<RunResult>& results) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "W" << std::setw(6) << "S" << std::setw(6) << "M"
       << std::setw(22) << "best MCC" << "combination\n";
    for (const RunResult& r : results) {
        std::ostringstream mccs;
        mccs << std::fixed << std::setprecision(3) << r.mcc_mean << " +- " << std::fixed
             << std::setprecision(3) << r.mcc_std;
        os << std::left << std::setw(6) << r.config.W << std::setw(6) << r.config.S << std::setw(6)
           << r.config.M << std::setw(22) << mccs.str() << combine_method_name(r.chosen_combination)
           << "\n";
    }
    return os.str();
}

}  // namespace tsad
