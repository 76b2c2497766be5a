// tsad: train, score, label, and evaluate time-series anomaly detection
// pipelines from the command line.
//
// Every subcommand exits 0 on success; failures print a machine-readable
// JSON error record to stderr and exit nonzero.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsad/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsad;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open '" + path + "'");
    json j;
    in >> j;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    fs::create_directories(dir);
    return dir;
}

ModelConfig model_config_from_file(const std::string& path) {
    ModelConfig cfg = model_config_from_json(read_json_file(path));
    cfg.validate();
    return cfg;
}

ThresholdSpec threshold_from_json(const json& j) {
    ThresholdSpec spec;
    if (j.contains("method")) spec.method = threshold_method_from_name(j.at("method").get<std::string>());
    if (j.contains("f")) spec.f = j.at("f").get<double>();
    if (j.contains("q")) spec.q = j.at("q").get<double>();
    if (j.contains("init_level")) spec.init_level = j.at("init_level").get<double>();
    if (j.contains("metric")) {
        const std::string m = j.at("metric").get<std::string>();
        if (m == "mcc") spec.metric = TargetMetric::mcc;
        else if (m == "f1") spec.metric = TargetMetric::f1;
        else throw Error("bad_config", "unknown metric '" + m + "'");
    }
    spec.validate();
    return spec;
}

json norm_stats_json(const NormStats& s) {
    return json{{"mode", s.mode == NormMode::zscore ? "zscore" : "minmax"},
                {"center", s.center},
                {"spread", s.spread}};
}

NormStats norm_stats_from_json(const json& j) {
    NormStats s;
    s.mode = j.at("mode").get<std::string>() == "minmax" ? NormMode::minmax : NormMode::zscore;
    s.center = j.at("center").get<std::vector<double>>();
    s.spread = j.at("spread").get<std::vector<double>>();
    return s;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = base + i;
    return seeds;
}

Dataset load_dataset(const std::string& train_path, const std::string& test_path,
                     const std::string& test_labels, const std::string& train_labels = "") {
    Dataset ds;
    ds.name = fs::path(test_path).stem().string();
    ds.train = load_csv(train_path, train_labels.empty() ? std::nullopt : std::optional(train_labels));
    ds.test = load_csv(test_path, std::optional(test_labels));
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------

int cmd_synth(std::size_t T, std::size_t N, std::size_t n_point, std::size_t n_collective,
              std::uint64_t seed, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    SyntheticProfile p;
    p.T = T;
    p.N = N;
    p.n_point = n_point;
    p.n_collective = n_collective;
    p.seed = seed;
    Dataset ds = make_synthetic_dataset(p);

    save_csv(ds.train, (dir / "train.csv").string(), (dir / "train_labels.csv").string());
    save_csv(ds.test, (dir / "test.csv").string(), (dir / "test_labels.csv").string());
    write_json_file(dir / "meta.json", json{{"T", p.T},
                                            {"N", p.N},
                                            {"n_point", p.n_point},
                                            {"n_collective", p.n_collective},
                                            {"seed", p.seed}});
    std::cout << "wrote " << (dir / "train.csv").string() << " and " << (dir / "test.csv").string() << "\n";
    return 0;
}

int cmd_train(const std::string& data, const std::string& config, std::uint64_t seed,
              const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    ModelConfig cfg = model_config_from_file(config);
    cfg.seed = seed;

    TimeSeries raw = load_csv(data);
    TimeSeries train_norm = normalize(raw, NormMode::zscore);
    WindowSet ws = make_windows(train_norm, cfg.W, cfg.S, WindowPurpose::train);
    TrainedModel tm = train_model(cfg, ws);

    json ckpt = checkpoint_json(tm);
    ckpt["norm_stats"] = norm_stats_json(*train_norm.norm_stats);
    write_json_file(dir / "checkpoint.json", ckpt);
    write_json_file(dir / "train_log.json", json{{"config", to_json(cfg)}, {"loss_curve", tm.loss_curve}});
    std::cout << "trained " << cfg.summary() << " for " << tm.loss_curve.size() << " epochs\n";
    if (!tm.loss_curve.empty()) {
        std::cout << "loss " << tm.loss_curve.front() << " -> " << tm.loss_curve.back() << "\n";
    }
    return 0;
}

int cmd_score(const std::string& model_path, const std::string& data, const std::string& train_data,
              const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    TimeSeries raw = load_csv(data);

    ScoreSeries scores;
    json meta = json::object();
    if (model_path == "baseline") {
        if (train_data.empty()) {
            throw Error("bad_config", "baseline scoring needs --train-data for normalization statistics");
        }
        TimeSeries train_norm = normalize(load_csv(train_data), NormMode::zscore);
        scores = baseline_score(normalize(raw, NormMode::zscore, train_norm.norm_stats));
        meta["model"] = "baseline";
    } else {
        const json ckpt = read_json_file(model_path);
        TrainedModel tm = load_checkpoint_json(ckpt);
        const NormStats stats = norm_stats_from_json(ckpt.at("norm_stats"));
        TimeSeries norm = normalize(raw, NormMode::zscore, stats);
        const ModelConfig& cfg = tm.model->config();
        scores = cfg.kind == ModelKind::itransformer_fc ? score_forecast(*tm.model, norm)
                                                        : score_reconstruction(*tm.model, norm);
        meta = {{"W", cfg.W},       {"S", cfg.S},
                {"M", cfg.M},       {"loss", loss_name(cfg.loss.kind)},
                {"seed", cfg.seed}, {"kind", model_kind_name(cfg.kind)}};
    }
    save_scores(scores, (dir / "scores.csv").string(), (dir / "scores.meta.json").string(), meta);
    std::cout << "wrote " << (dir / "scores.csv").string() << "\n";
    return 0;
}

int cmd_label(const std::string& scores_path, const std::string& meta_path, const std::string& config,
              const std::string& calibration_path, const std::string& calibration_meta,
              const std::string& val_scores_path, const std::string& val_labels_path,
              const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const json cfg = config.empty() ? json::object() : read_json_file(config);
    const ThresholdSpec spec = threshold_from_json(cfg);
    CombineMethod combine = CombineMethod::global;
    if (cfg.contains("combine")) combine = combine_method_from_name(cfg.at("combine").get<std::string>());

    ScoreSeries scores = load_scores(scores_path, meta_path);
    std::optional<ScoreSeries> calib;
    if (!calibration_path.empty()) calib = load_scores(calibration_path, calibration_meta);

    std::optional<ScoreSeries> val_scores;
    std::vector<std::uint8_t> val_labels;
    ValidationData vd;
    if (!val_scores_path.empty()) {
        if (val_labels_path.empty()) {
            throw Error("bad_config", "--validation-scores needs --validation-labels");
        }
        val_scores = load_scores(val_scores_path);
        TimeSeries vl = load_csv(val_scores_path, std::optional(val_labels_path));
        val_labels = vl.labels;
        vd.scores = &*val_scores;
        vd.labels = &val_labels;
    }

    LabelResult r =
        extract_labels(scores, spec, combine, calib ? &*calib : nullptr, val_scores ? &vd : nullptr);

    std::ofstream lout(dir / "labels.csv");
    for (std::uint8_t l : r.labels) lout << int(l) << '\n';
    write_json_file(dir / "labels.meta.json", json{{"threshold_method", r.threshold_method},
                                                   {"combine_method", r.combine_method},
                                                   {"thresholds", r.thresholds},
                                                   {"pot_fallback_variates", r.pot_fallbacks},
                                                   {"f", spec.f},
                                                   {"q", spec.q},
                                                   {"init_level", spec.init_level}});
    std::cout << "wrote " << (dir / "labels.csv").string() << "\n";
    return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    // both files are single-column 0/1 without headers
    auto read_labels = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("io_error", "cannot open '" + path + "'");
        std::vector<std::uint8_t> labels;
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            ++row;
            const double v = detail::parse_cell(line, row, 1);
            if (v != 0.0 && v != 1.0) throw Error("parse_error", "labels must be 0/1");
            labels.push_back(static_cast<std::uint8_t>(v));
        }
        return labels;
    };
    const std::vector<std::uint8_t> pred = read_labels(pred_path);
    const std::vector<std::uint8_t> truth = read_labels(truth_path);

    EvalRecord rec = EvalRecord::from_confusion(confusion(pred, truth));
    rec.dataset = fs::path(truth_path).stem().string();
    write_json_file(dir / "report.json", to_json(rec));
    std::cout << "tp=" << rec.counts.tp << " tn=" << rec.counts.tn << " fp=" << rec.counts.fp
              << " fn=" << rec.counts.fn << "\n"
              << "mcc=" << rec.mcc_value << " f1=" << rec.f1 << " precision=" << rec.precision
              << " recall=" << rec.recall << "\n";
    return 0;
}

int cmd_search(const std::string& train_path, const std::string& test_path, const std::string& test_labels,
               const std::string& approach, std::uint64_t seed, std::size_t n_seeds, std::size_t jobs,
               const std::string& threshold_config, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    Dataset ds = load_dataset(train_path, test_path, test_labels);
    const DatasetStats stats = estimate_stats(ds);
    const SearchApproach ap = approach == "fc" ? SearchApproach::fc : SearchApproach::reco;
    const std::vector<ModelConfig> candidates = derive_candidates(stats, ap);

    GridOptions opt;
    opt.seeds = seed_list(seed, n_seeds);
    opt.jobs = jobs;
    if (!threshold_config.empty()) {
        const json j = read_json_file(threshold_config);
        opt.threshold = threshold_from_json(j);
        if (j.contains("calibrate_on_train")) opt.calibrate_on_train = j.at("calibrate_on_train").get<bool>();
    }

    const std::vector<RunResult> results = run_grid(ds, candidates, opt);
    const ModelConfig best = select_best(results);

    json grid = json::array();
    for (const RunResult& r : results) grid.push_back(to_json(r));
    write_json_file(dir / "grid.json", json{{"dataset", ds.name},
                                            {"stats", {{"a", stats.a}, {"b", stats.b}, {"N", stats.N}}},
                                            {"results", grid}});
    write_json_file(dir / "selected.json", to_json(best));

    const std::string table = format_grid_table(results);
    write_text(dir / "grid.txt", table);
    std::cout << table << "selected: " << best.summary() << "\n";
    return 0;
}

int cmd_contaminate(const std::string& data, double rate, std::uint64_t seed, const std::string& out,
                    bool study, const std::string& test_path, const std::string& test_labels,
                    const std::string& config, const std::string& rates_csv, std::size_t n_seeds,
                    std::size_t jobs) {
    const fs::path dir = ensure_out_dir(out);
    if (!study) {
        TimeSeries train = load_csv(data);
        const std::vector<AnomalySpec> pool = default_contamination_pool(train.N);
        TimeSeries dirty = contaminate(train, pool, rate, seed);
        save_csv(dirty, (dir / "train.csv").string(), (dir / "train_labels.csv").string());
        std::size_t ones = 0;
        for (std::uint8_t l : dirty.labels) ones += l;
        std::cout << "wrote " << (dir / "train.csv").string() << " with " << ones << " anomalous stamps ("
                  << 100.0 * double(ones) / double(dirty.T) << "%)\n";
        return 0;
    }

    if (test_path.empty() || test_labels.empty() || config.empty()) {
        throw Error("bad_config", "--study needs --test, --test-labels and --config");
    }
    Dataset ds = load_dataset(data, test_path, test_labels);
    ModelConfig base = model_config_from_file(config);
    base.kind = ModelKind::itransformer_reco;

    std::vector<double> rates;
    std::stringstream ss(rates_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) rates.push_back(std::stod(tok));

    ContaminationOptions opt;
    opt.seeds = seed_list(seed, n_seeds);
    opt.jobs = jobs;
    const std::vector<ContaminationRow> rows =
        contamination_study(ds, base, {LossKind::mse, LossKind::huber, LossKind::softdtw}, rates, opt);

    write_json_file(dir / "contamination.json", to_json(rows));
    const std::string table = format_contamination_table(rows);
    write_text(dir / "contamination.txt", table);
    std::cout << table;
    return 0;
}

int cmd_benchmark(const std::string& train_path, const std::string& test_path,
                  const std::string& test_labels, bool synthetic, const std::string& reco_config,
                  const std::string& fc_config, bool auto_grid, std::uint64_t seed, std::size_t n_seeds,
                  std::size_t jobs, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    Dataset ds;
    if (synthetic) {
        SyntheticProfile p;
        p.seed = seed;
        ds = make_synthetic_dataset(p);
    } else {
        if (train_path.empty() || test_path.empty() || test_labels.empty()) {
            throw Error("bad_config", "benchmark needs --train/--test/--test-labels or --synthetic");
        }
        ds = load_dataset(train_path, test_path, test_labels);
    }

    BenchmarkOptions opt;
    opt.seeds = seed_list(seed, n_seeds);
    opt.jobs = jobs;

    ModelConfig reco, fc;
    if (auto_grid) {
        const DatasetStats stats = estimate_stats(ds);
        GridOptions gopt;
        gopt.seeds = opt.seeds;
        gopt.jobs = jobs;
        reco = select_best(run_grid(ds, derive_candidates(stats, SearchApproach::reco), gopt));
        fc = select_best(run_grid(ds, derive_candidates(stats, SearchApproach::fc), gopt));
    } else {
        if (reco_config.empty() || fc_config.empty()) {
            throw Error("bad_config", "benchmark needs --reco-config and --fc-config, or --auto-grid");
        }
        reco = model_config_from_file(reco_config);
        fc = model_config_from_file(fc_config);
    }

    const std::vector<BenchmarkRow> rows = benchmark(ds, reco, fc, opt);
    write_json_file(dir / "benchmark.json", json{{"dataset", ds.name},
                                                 {"seeds", opt.seeds},
                                                 {"reco_config", to_json(reco)},
                                                 {"fc_config", to_json(fc)},
                                                 {"rows", to_json(rows)}});
    const std::string table = format_benchmark_table(rows);
    write_text(dir / "benchmark.txt", table);
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-series anomaly detection pipelines"};
    app.require_subcommand(1);

    std::string config, out, data, train_path, test_path, test_labels, model_path;
    std::string scores_path, scores_meta, calibration, calibration_meta, val_scores, val_labels;
    std::string pred_path, truth_path, approach = "reco", rates_csv = "0,0.02";
    std::string reco_config, fc_config, train_data;
    std::uint64_t seed = 1;
    std::size_t T = 5000, N = 5, n_point = 10, n_collective = 10, n_seeds = 5, jobs = 0;
    double rate = 0.02;
    bool study = false, synthetic = false, auto_grid = false;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic train/test dataset");
    synth->add_option("--t", T, "timestamps per split");
    synth->add_option("--n", N, "variates");
    synth->add_option("--points", n_point, "point anomalies in the test split");
    synth->add_option("--collectives", n_collective, "collective anomalies in the test split");
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--out", out, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a model on a CSV series");
    train->add_option("--data", data, "training values CSV")->required();
    train->add_option("--config", config, "model config JSON")->required();
    train->add_option("--seed", seed, "training seed");
    train->add_option("--out", out, "output directory")->required();

    CLI::App* score = app.add_subcommand("score", "score a series with a trained model");
    score->add_option("--model", model_path, "checkpoint path, or 'baseline'")->required();
    score->add_option("--data", data, "series values CSV")->required();
    score->add_option("--train-data", train_data, "training CSV (baseline normalization)");
    score->add_option("--out", out, "output directory")->required();

    CLI::App* label = app.add_subcommand("label", "convert scores into binary labels");
    label->add_option("--scores", scores_path, "scores CSV")->required();
    label->add_option("--scores-meta", scores_meta, "scores sidecar JSON");
    label->add_option("--config", config, "threshold/combine config JSON");
    label->add_option("--calibration", calibration, "calibration scores CSV (e.g. training split)");
    label->add_option("--calibration-meta", calibration_meta, "calibration sidecar JSON");
    label->add_option("--validation-scores", val_scores, "validation scores CSV");
    label->add_option("--validation-labels", val_labels, "validation labels CSV");
    label->add_option("--out", out, "output directory")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "compare predicted labels against truth");
    evaluate->add_option("--pred", pred_path, "predicted labels CSV")->required();
    evaluate->add_option("--truth", truth_path, "ground-truth labels CSV")->required();
    evaluate->add_option("--out", out, "output directory")->required();

    CLI::App* search = app.add_subcommand("search", "grid-search model configurations");
    search->add_option("--train", train_path, "training values CSV")->required();
    search->add_option("--test", test_path, "test values CSV")->required();
    search->add_option("--test-labels", test_labels, "test labels CSV")->required();
    search->add_option("--approach", approach, "reco or fc")->check(CLI::IsMember({"reco", "fc"}));
    search->add_option("--config", config, "threshold config JSON");
    search->add_option("--seed", seed, "base seed");
    search->add_option("--seeds", n_seeds, "number of seed repetitions");
    search->add_option("--jobs", jobs, "parallel workers (0: all cores)");
    search->add_option("--out", out, "output directory")->required();

    CLI::App* contaminate_cmd = app.add_subcommand("contaminate", "inject anomalies into training data");
    contaminate_cmd->add_option("--data", data, "training values CSV")->required();
    contaminate_cmd->add_option("--rate", rate, "target anomalous fraction");
    contaminate_cmd->add_option("--seed", seed, "placement seed");
    contaminate_cmd->add_flag("--study", study, "run the full loss-function study");
    contaminate_cmd->add_option("--test", test_path, "test values CSV (study)");
    contaminate_cmd->add_option("--test-labels", test_labels, "test labels CSV (study)");
    contaminate_cmd->add_option("--config", config, "model config JSON (study)");
    contaminate_cmd->add_option("--rates", rates_csv, "comma-separated contamination rates (study)");
    contaminate_cmd->add_option("--seeds", n_seeds, "seed repetitions (study)");
    contaminate_cmd->add_option("--jobs", jobs, "parallel workers");
    contaminate_cmd->add_option("--out", out, "output directory")->required();

    CLI::App* bench = app.add_subcommand("benchmark", "compare all models on one dataset");
    bench->add_option("--train", train_path, "training values CSV");
    bench->add_option("--test", test_path, "test values CSV");
    bench->add_option("--test-labels", test_labels, "test labels CSV");
    bench->add_flag("--synthetic", synthetic, "use the built-in synthetic profile");
    bench->add_option("--reco-config", reco_config, "reconstruction config JSON");
    bench->add_option("--fc-config", fc_config, "forecasting config JSON");
    bench->add_flag("--auto-grid", auto_grid, "derive configs via grid search");
    bench->add_option("--seed", seed, "base seed");
    bench->add_option("--seeds", n_seeds, "seed repetitions");
    bench->add_option("--jobs", jobs, "parallel workers");
    bench->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(T, N, n_point, n_collective, seed, out);
        if (train->parsed()) return cmd_train(data, config, seed, out);
        if (score->parsed()) return cmd_score(model_path, data, train_data, out);
        if (label->parsed()) {
            return cmd_label(scores_path, scores_meta, config, calibration, calibration_meta, val_scores,
                             val_labels, out);
        }
        if (evaluate->parsed()) return cmd_evaluate(pred_path, truth_path, out);
        if (search->parsed()) {
            return cmd_search(train_path, test_path, test_labels, approach, seed, n_seeds, jobs, config, out);
        }
        if (contaminate_cmd->parsed()) {
            return cmd_contaminate(data, rate, seed, out, study, test_path, test_labels, config, rates_csv,
                                   n_seeds, jobs);
        }
        if (bench->parsed()) {
            return cmd_benchmark(train_path, test_path, test_labels, synthetic, reco_config, fc_config,
                                 auto_grid, seed, n_seeds, jobs, out);
        }
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "unexpected"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
