// Per-timestamp, per-variate anomaly scores assembled from model outputs.
//
// Reconstruction scoring runs the test stream through non-overlapping
// windows (S = W) and keeps the squared residual per cell (USAD instead uses
// its two-decoder absolute-error score); padded tail cells are dropped.
// Forecast scoring predicts each timestamp from the window right before it;
// the first W timestamps have no preceding full window, score 0 and
// coverage 0 (they can never be predicted positive).

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsad/dataio.hpp"
#include "tsad/models.hpp"
#include "tsad/tensor.hpp"

namespace tsad {

struct ScoreSeries {
    std::string model_id;
    std::size_t T = 0;
    std::size_t N = 0;
    std::vector<double> scores;           // row-major T x N, finite and >= 0
    std::vector<std::uint8_t> coverage;   // contributing-window count per timestamp

    double at(std::size_t t, std::size_t n) const { return scores[t * N + n]; }
    double& at(std::size_t t, std::size_t n) { return scores[t * N + n]; }

    std::size_t warmup_len() const {
        std::size_t w = 0;
        while (w < T && coverage[w] == 0) ++w;
        return w;
    }

    void validate() const {
        if (scores.size() != T * N || coverage.size() != T) {
            throw Error("bad_scores", "score buffers do not match T x N");
        }
        for (double v : scores) {
            if (!std::isfinite(v) || v < 0.0) throw Error("bad_scores", "scores must be finite and >= 0");
        }
    }
};

// Absolute value of the (normalized) input as the score; deterministic.
inline ScoreSeries baseline_score(const TimeSeries& ts) {
    ScoreSeries out;
    out.model_id = "baseline";
    out.T = ts.T;
    out.N = ts.N;
    out.scores.resize(ts.T * ts.N);
    out.coverage.assign(ts.T, 1);
    for (std::size_t i = 0; i < out.scores.size(); ++i) out.scores[i] = std::abs(ts.values[i]);
    return out;
}

inline ScoreSeries score_reconstruction(Model& model, const TimeSeries& ts, double usad_alpha = 0.5,
                                        double usad_beta = 0.5, std::size_t batch = 64) {
    const ModelConfig& cfg = model.config();
    if (!cfg.is_reconstruction()) {
        throw Error("kind_mismatch", std::string(model_kind_name(cfg.kind)) + " is not reconstruction-based");
    }
    if (model.n_variates() != ts.N) {
        throw Error("shape_mismatch", "model was built for " + std::to_string(model.n_variates()) +
                                          " variates, series has " + std::to_string(ts.N));
    }
    const WindowSet ws = make_windows(ts, cfg.W, cfg.W, WindowPurpose::test_reco);
    UsadModel* usad = dynamic_cast<UsadModel*>(&model);

    ScoreSeries out;
    out.model_id = model_kind_name(cfg.kind);
    out.T = ts.T;
    out.N = ts.N;
    out.scores.assign(ts.T * ts.N, 0.0);
    out.coverage.assign(ts.T, 0);

    NoGradGuard ng;
    std::vector<std::size_t> idx;
    for (std::size_t off = 0; off < ws.count; off += batch) {
        const std::size_t take = std::min(batch, ws.count - off);
        idx.resize(take);
        for (std::size_t b = 0; b < take; ++b) idx[b] = off + b;
        Tensor x = detail::gather_batch(ws, idx);
        Tensor cell = usad ? usad_score(*usad, x, usad_alpha, usad_beta)
                           : mse_elementwise(model.reconstruct(x), x);
        for (std::size_t b = 0; b < take; ++b) {
            const std::size_t start = ws.start(idx[b]);
            for (std::size_t r = 0; r < cfg.W; ++r) {
                const std::size_t t = start + r;
                if (t >= ts.T) break;  // padded tail
                for (std::size_t n = 0; n < ts.N; ++n) {
                    out.at(t, n) = cell.at({b, r, n});
                }
                out.coverage[t] = 1;
            }
        }
    }
    out.validate();
    return out;
}

inline ScoreSeries score_forecast(Model& model, const TimeSeries& ts, std::size_t batch = 64) {
    const ModelConfig& cfg = model.config();
    if (cfg.kind != ModelKind::itransformer_fc) {
        throw Error("kind_mismatch", std::string(model_kind_name(cfg.kind)) + " is not forecasting-based");
    }
    if (model.n_variates() != ts.N) {
        throw Error("shape_mismatch", "model was built for " + std::to_string(model.n_variates()) +
                                          " variates, series has " + std::to_string(ts.N));
    }
    if (ts.T <= cfg.W) {
        throw Error("bad_series", "forecast scoring needs T > W");
    }
    const WindowSet ws = make_windows(ts, cfg.W, 1, WindowPurpose::test_fc);

    ScoreSeries out;
    out.model_id = model_kind_name(cfg.kind);
    out.T = ts.T;
    out.N = ts.N;
    out.scores.assign(ts.T * ts.N, 0.0);
    out.coverage.assign(ts.T, 0);

    NoGradGuard ng;
    std::vector<std::size_t> predictable;
    for (std::size_t i = 0; i < ws.count; ++i) {
        if (ws.has_successor(i)) predictable.push_back(i);
    }
    std::vector<std::size_t> idx;
    for (std::size_t off = 0; off < predictable.size(); off += batch) {
        const std::size_t take = std::min(batch, predictable.size() - off);
        idx.assign(predictable.begin() + off, predictable.begin() + off + take);
        Tensor x = detail::gather_batch(ws, idx);
        Tensor pred = model.forecast(x);  // (B, 1, N)
        for (std::size_t b = 0; b < take; ++b) {
            const std::size_t t = ws.start(idx[b]) + cfg.W;
            for (std::size_t n = 0; n < ts.N; ++n) {
                const double r = pred.at({b, 0, n}) - ts.at(t, n);
                out.at(t, n) = r * r;
            }
            out.coverage[t] = 1;
        }
    }
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Export: scores as CSV (T rows x N cols) plus a sidecar metadata file.

inline void save_scores(const ScoreSeries& s, const std::string& csv_path, const std::string& meta_path,
                        const nlohmann::json& extra_meta = nlohmann::json::object()) {
    std::ofstream out(csv_path);
    if (!out) throw Error("io_error", "cannot write '" + csv_path + "'");
    out.precision(17);
    for (std::size_t n = 0; n < s.N; ++n) {
        if (n) out << ',';
        out << "s" << n;
    }
    out << '\n';
    for (std::size_t t = 0; t < s.T; ++t) {
        for (std::size_t n = 0; n < s.N; ++n) {
            if (n) out << ',';
            out << s.at(t, n);
        }
        out << '\n';
    }

    nlohmann::json meta = extra_meta;
    meta["model_id"] = s.model_id;
    meta["T"] = s.T;
    meta["N"] = s.N;
    meta["warmup_len"] = s.warmup_len();
    std::ofstream mout(meta_path);
    if (!mout) throw Error("io_error", "cannot write '" + meta_path + "'");
    mout << meta.dump(1) << '\n';
}

inline ScoreSeries load_scores(const std::string& csv_path, const std::string& meta_path = "") {
    const TimeSeries raw = load_csv(csv_path);
    ScoreSeries s;
    s.T = raw.T;
    s.N = raw.N;
    s.scores = raw.values;
    s.coverage.assign(raw.T, 1);
    s.model_id = "loaded";
    if (!meta_path.empty()) {
        std::ifstream in(meta_path);
        if (!in) throw Error("io_error", "cannot open '" + meta_path + "'");
        nlohmann::json meta;
        in >> meta;
        if (meta.contains("model_id")) s.model_id = meta.at("model_id").get<std::string>();
        if (meta.contains("warmup_len")) {
            const std::size_t w = meta.at("warmup_len").get<std::size_t>();
            for (std::size_t t = 0; t < std::min(w, s.T); ++t) s.coverage[t] = 0;
        }
    }
    s.validate();
    return s;
}

}  // namespace tsad
