// Label evaluation: confusion counts, MCC, precision/recall/F1, and the
// discouraged accuracy / ROC-AUC (they overestimate performance on
// imbalanced data; reported for completeness only). No point-adjust or
// range-based rescoring is applied anywhere: labels are compared per
// timestamp exactly as predicted.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsad/tensor.hpp"

namespace tsad {

struct Confusion {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
};

inline Confusion confusion(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth) {
    if (pred.size() != truth.size()) {
        throw Error("length_mismatch", "confusion: " + std::to_string(pred.size()) + " predictions vs " +
                                           std::to_string(truth.size()) + " truth labels");
    }
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 1 || truth[i] > 1) {
            throw Error("non_binary", "confusion: labels must be 0/1, found value at index " + std::to_string(i));
        }
        if (pred[i] && truth[i]) ++c.tp;
        else if (pred[i] && !truth[i]) ++c.fp;
        else if (!pred[i] && truth[i]) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// Matthews correlation coefficient. Any zero factor under the root makes the
// correlation undefined; this returns 0 (no better than chance) in that case.
inline double mcc(const Confusion& c) {
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    const double f1 = tp + fp, f2 = tp + fn, f3 = tn + fp, f4 = tn + fn;
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
    if (fp == 0.0 && fn == 0.0) return 1.0;   // perfect prediction, exactly
    if (tp == 0.0 && tn == 0.0) return -1.0;  // fully inverted, exactly
    return (tp * tn - fp * fn) / (std::sqrt(f1) * std::sqrt(f2) * std::sqrt(f3) * std::sqrt(f4));
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Prf precision_recall_f1(const Confusion& c) {
    Prf out;
    out.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    out.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    out.f1 = out.precision + out.recall == 0.0 ? 0.0
                                               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

inline double accuracy(const Confusion& c) {
    const std::size_t total = c.total();
    if (total == 0) return 0.0;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

// Rank statistic over raw (pre-threshold) scores, with mid-ranks for ties.
inline double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& truth) {
    if (scores.size() != truth.size()) {
        throw Error("length_mismatch", "roc_auc: score/label length mismatch");
    }
    std::size_t pos = 0;
    for (std::uint8_t t : truth) pos += t;
    const std::size_t neg = truth.size() - pos;
    if (pos == 0 || neg == 0) {
        throw Error("single_class", "roc_auc: truth labels contain a single class");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (truth[order[k]]) pos_rank_sum += midrank;
        }
        i = j;
    }
    return (pos_rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1)) /
           (static_cast<double>(pos) * static_cast<double>(neg));
}

// ---------------------------------------------------------------------------
// One evaluated run; serialized as structured text in reports.

struct EvalRecord {
    std::string dataset;
    std::string model;
    std::string config;
    std::string loss;
    std::string label_method;
    std::string threshold_method;
    std::uint64_t seed = 0;
    Confusion counts;
    double mcc_value = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;

    static EvalRecord from_confusion(Confusion c) {
        EvalRecord r;
        r.counts = c;
        r.mcc_value = mcc(c);
        const Prf prf = precision_recall_f1(c);
        r.precision = prf.precision;
        r.recall = prf.recall;
        r.f1 = prf.f1;
        return r;
    }
};

inline nlohmann::json to_json(const EvalRecord& r) {
    return nlohmann::json{{"dataset", r.dataset},
                          {"model", r.model},
                          {"config", r.config},
                          {"loss", r.loss},
                          {"label_method", r.label_method},
                          {"threshold_method", r.threshold_method},
                          {"seed", r.seed},
                          {"confusion", {{"tp", r.counts.tp}, {"tn", r.counts.tn}, {"fp", r.counts.fp}, {"fn", r.counts.fn}}},
                          {"mcc", r.mcc_value},
                          {"f1", r.f1},
                          {"precision", r.precision},
                          {"recall", r.recall}};
}

inline EvalRecord eval_record_from_json(const nlohmann::json& j) {
    EvalRecord r;
    r.dataset = j.at("dataset").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.config = j.at("config").get<std::string>();
    r.loss = j.at("loss").get<std::string>();
    r.label_method = j.at("label_method").get<std::string>();
    r.threshold_method = j.at("threshold_method").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.counts.tp = j.at("confusion").at("tp").get<std::size_t>();
    r.counts.tn = j.at("confusion").at("tn").get<std::size_t>();
    r.counts.fp = j.at("confusion").at("fp").get<std::size_t>();
    r.counts.fn = j.at("confusion").at("fn").get<std::size_t>();
    r.mcc_value = j.at("mcc").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    return r;
}

}  // namespace tsad
