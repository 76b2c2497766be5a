// Binary label extraction from anomaly scores: three threshold strategies
// (validation-optimal, percentile of an assumed anomaly fraction f, and
// POT/EVT) combined with three multivariate strategies (global score
// averaging, per-variate thresholds pooled by inclusive OR, or by majority
// voting with "at least N/2" counting as anomalous).
//
// Comparisons are strictly-above everywhere (score > threshold), so an
// all-ties score column produces no positives.
//
// POT fits a generalized Pareto distribution to the excesses over the
// init_level empirical quantile u via Grimshaw's profile-likelihood root
// search (method-of-moments fallback), then places the threshold at
//   z_q = u + (sigma/xi) * ((q*n/k)^(-xi) - 1),
// with the xi -> 0 limit z_q = u - sigma * log(q*n/k).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsad/metrics.hpp"
#include "tsad/scoring.hpp"
#include "tsad/tensor.hpp"

namespace tsad {

enum class ThresholdMethod { validation_best, percentile, pot };
enum class CombineMethod { global, local_or, local_majority };
enum class TargetMetric { mcc, f1 };

inline const char* threshold_method_name(ThresholdMethod m) {
    switch (m) {
        case ThresholdMethod::validation_best: return "validation_best";
        case ThresholdMethod::percentile: return "percentile";
        case ThresholdMethod::pot: return "pot";
    }
    return "?";
}

inline ThresholdMethod threshold_method_from_name(const std::string& s) {
    for (ThresholdMethod m : {ThresholdMethod::validation_best, ThresholdMethod::percentile, ThresholdMethod::pot}) {
        if (s == threshold_method_name(m)) return m;
    }
    throw Error("bad_config", "unknown threshold method '" + s + "'");
}

inline const char* combine_method_name(CombineMethod m) {
    switch (m) {
        case CombineMethod::global: return "global";
        case CombineMethod::local_or: return "local_or";
        case CombineMethod::local_majority: return "local_majority";
    }
    return "?";
}

inline CombineMethod combine_method_from_name(const std::string& s) {
    for (CombineMethod m : {CombineMethod::global, CombineMethod::local_or, CombineMethod::local_majority}) {
        if (s == combine_method_name(m)) return m;
    }
    throw Error("bad_config", "unknown combine method '" + s + "'");
}

struct ThresholdSpec {
    ThresholdMethod method = ThresholdMethod::pot;
    double f = 0.05;           // percentile: assumed anomaly fraction
    double q = 1e-3;           // POT: risk level
    double init_level = 0.98;  // POT: initial quantile for u
    TargetMetric metric = TargetMetric::mcc;

    void validate() const {
        if (method == ThresholdMethod::percentile && !(f > 0.0 && f < 1.0)) {
            throw Error("bad_config", "percentile fraction f must lie in (0,1)");
        }
        if (method == ThresholdMethod::pot) {
            if (!(init_level > 0.0 && init_level < 1.0)) {
                throw Error("bad_config", "POT init_level must lie in (0,1)");
            }
            if (!(q > 0.0 && q < 1.0 - init_level)) {
                throw Error("bad_config", "POT risk q must lie in (0, 1 - init_level)");
            }
        }
    }
};

struct GpdFit {
    double u = 0.0;      // initial threshold
    double sigma = 0.0;  // scale
    double xi = 0.0;     // shape
    std::size_t n_excess = 0;
    std::size_t n_total = 0;
};

// ---------------------------------------------------------------------------

namespace detail {

// Empirical quantile with linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error("bad_scores", "quantile of an empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double gpd_log_likelihood(const std::vector<double>& excess, double sigma, double xi) {
    if (sigma <= 0.0) return -std::numeric_limits<double>::infinity();
    const double k = static_cast<double>(excess.size());
    if (std::abs(xi) < 1e-12) {
        double s = 0.0;
        for (double y : excess) s += y;
        return -k * std::log(sigma) - s / sigma;
    }
    double acc = 0.0;
    for (double y : excess) {
        const double t = 1.0 + xi * y / sigma;
        if (t <= 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(t);
    }
    return -k * std::log(sigma) - (1.0 + 1.0 / xi) * acc;
}

// Grimshaw's reduction: candidate GPD parameters are x = xi/sigma values
// where w(x) = (1 + mean log(1+x y)) * mean(1/(1+x y)) - 1 crosses zero.
inline void grimshaw_roots(const std::vector<double>& excess, double lo, double hi, int grid,
                           std::vector<double>& roots) {
    if (!(lo < hi)) return;
    auto w = [&](double x) {
        double logsum = 0.0, invsum = 0.0;
        for (double y : excess) {
            const double t = 1.0 + x * y;
            logsum += std::log(t);
            invsum += 1.0 / t;
        }
        const double k = static_cast<double>(excess.size());
        return (1.0 + logsum / k) * (invsum / k) - 1.0;
    };
    double prev_x = lo, prev_w = w(lo);
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
        const double wx = w(x);
        if (std::isfinite(prev_w) && std::isfinite(wx) && prev_w * wx < 0.0) {
            double a = prev_x, b = x;
            double wa = prev_w;
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (a + b);
                const double wm = w(m);
                if (wa * wm <= 0.0) b = m;
                else {
                    a = m;
                    wa = wm;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_w = wx;
    }
}

inline GpdFit fit_gpd(const std::vector<double>& excess) {
    GpdFit fit;
    fit.n_excess = excess.size();
    double ym = excess[0], yM = excess[0], mean = 0.0;
    for (double y : excess) {
        ym = std::min(ym, y);
        yM = std::max(yM, y);
        mean += y;
    }
    mean /= static_cast<double>(excess.size());

    // candidate x = 0: exponential tail (xi = 0, sigma = mean excess)
    double best_sigma = mean, best_xi = 0.0;
    double best_ll = gpd_log_likelihood(excess, mean, 0.0);

    if (yM > ym) {
        std::vector<double> roots;
        const double eps = 1e-8 / std::max(1.0, yM);
        grimshaw_roots(excess, -1.0 / yM + eps, -eps, 40, roots);
        const double right_lo = std::max(eps, 2.0 * (mean - ym) / (mean * ym));
        const double right_hi = 2.0 * (mean - ym) / (ym * ym);
        grimshaw_roots(excess, right_lo, right_hi, 40, roots);
        // bounded tails maximize the likelihood at the support boundary
        // (xi ~ -1) where w has no interior root
        roots.push_back(-(1.0 - 1e-3) / yM);

        for (double x : roots) {
            double logsum = 0.0;
            for (double y : excess) logsum += std::log(1.0 + x * y);
            const double xi = logsum / static_cast<double>(excess.size());
            const double sigma = xi / x;
            const double ll = gpd_log_likelihood(excess, sigma, xi);
            if (ll > best_ll) {
                best_ll = ll;
                best_sigma = sigma;
                best_xi = xi;
            }
        }
    }

    if (!std::isfinite(best_ll) || best_sigma <= 0.0) {
        // method-of-moments fallback
        double var = 0.0;
        for (double y : excess) var += (y - mean) * (y - mean);
        var /= static_cast<double>(excess.size());
        if (var > 0.0) {
            const double r = mean * mean / var;
            best_xi = 0.5 * (1.0 - r);
            best_sigma = 0.5 * mean * (r + 1.0);
        } else {
            best_xi = 0.0;
            best_sigma = std::max(mean, 1e-12);
        }
    }
    fit.sigma = best_sigma;
    fit.xi = best_xi;
    return fit;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Threshold strategies on a univariate score sample.

// Scans midpoints between sorted unique scores and returns the threshold
// maximizing the metric on the validation sample; ties break toward the
// larger threshold (fewer positives).
inline double threshold_validation_best(const std::vector<double>& scores_val,
                                        const std::vector<std::uint8_t>& labels_val,
                                        TargetMetric metric = TargetMetric::mcc) {
    if (scores_val.size() != labels_val.size()) {
        throw Error("length_mismatch", "validation scores and labels differ in length");
    }
    std::size_t pos = 0;
    for (std::uint8_t l : labels_val) pos += l;
    if (pos == 0 || pos == labels_val.size()) {
        throw Error("single_class", "validation labels contain a single class");
    }

    std::vector<std::size_t> order(scores_val.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores_val[a] < scores_val[b]; });

    // group by unique value, ascending
    struct Group {
        double value;
        std::size_t pos, neg;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        Group g{scores_val[order[i]], 0, 0};
        while (j < order.size() && scores_val[order[j]] == g.value) {
            if (labels_val[order[j]]) ++g.pos;
            else ++g.neg;
            ++j;
        }
        groups.push_back(g);
        i = j;
    }
    if (groups.size() < 2) return groups[0].value;  // all ties: no positives under strictly-above

    const std::size_t neg = labels_val.size() - pos;
    double best_threshold = 0.0, best_metric = -2.0;
    // predicted positives are the groups strictly above the midpoint
    std::size_t tp = pos, fp = neg;
    for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
        tp -= groups[i].pos;
        fp -= groups[i].neg;
        const double threshold = 0.5 * (groups[i].value + groups[i + 1].value);
        Confusion c{tp, neg - fp, fp, pos - tp};
        const double m = metric == TargetMetric::mcc ? mcc(c) : precision_recall_f1(c).f1;
        if (m > best_metric || (m == best_metric && threshold > best_threshold)) {
            best_metric = m;
            best_threshold = threshold;
        }
    }
    return best_threshold;
}

// Empirical (1-f)-quantile with linear interpolation.
inline double threshold_percentile(const std::vector<double>& scores, double f) {
    if (!(f > 0.0 && f < 1.0)) throw Error("bad_config", "percentile fraction f must lie in (0,1)");
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    return detail::quantile_sorted(sorted, 1.0 - f);
}

inline std::pair<double, GpdFit> threshold_pot(const std::vector<double>& scores, double q = 1e-3,
                                               double init_level = 0.98) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const double u = detail::quantile_sorted(sorted, init_level);

    std::vector<double> excess;
    for (double s : scores) {
        if (s > u) excess.push_back(s - u);
    }
    if (excess.size() < 2) {
        throw Error("too_few_excesses", "POT found " + std::to_string(excess.size()) +
                                            " scores above the init_level quantile; lower init_level");
    }

    GpdFit fit = detail::fit_gpd(excess);
    fit.u = u;
    fit.n_total = scores.size();

    const double ratio = q * static_cast<double>(fit.n_total) / static_cast<double>(fit.n_excess);
    double z;
    if (std::abs(fit.xi) < 1e-8) {
        z = u - fit.sigma * std::log(ratio);
    } else {
        z = u + fit.sigma / fit.xi * (std::pow(ratio, -fit.xi) - 1.0);
    }
    if (!std::isfinite(z)) throw Error("pot_failed", "POT threshold is not finite");
    return {z, fit};
}

// ---------------------------------------------------------------------------
// Multivariate combination

// Mean across variates per timestamp.
inline std::vector<double> combine_global(const ScoreSeries& s) {
    std::vector<double> out(s.T, 0.0);
    for (std::size_t t = 0; t < s.T; ++t) {
        double acc = 0.0;
        for (std::size_t n = 0; n < s.N; ++n) acc += s.at(t, n);
        out[t] = acc / static_cast<double>(s.N);
    }
    return out;
}

enum class LocalPool { pool_or, pool_majority };

// Pools per-variate binary labels into one label per timestamp. Majority
// reads "at least N/2" literally: with N even, exactly N/2 votes count.
inline std::vector<std::uint8_t> combine_local(const std::vector<std::uint8_t>& per_variate, std::size_t T,
                                               std::size_t N, LocalPool mode) {
    if (per_variate.size() != T * N) throw Error("bad_labels", "per-variate label matrix size mismatch");
    const std::size_t need = mode == LocalPool::pool_or ? 1 : (N + 1) / 2;
    std::vector<std::uint8_t> out(T, 0);
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t votes = 0;
        for (std::size_t n = 0; n < N; ++n) votes += per_variate[t * N + n];
        out[t] = votes >= need ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------

struct ValidationData {
    const ScoreSeries* scores = nullptr;
    const std::vector<std::uint8_t>* labels = nullptr;
};

struct LabelResult {
    std::vector<std::uint8_t> labels;            // one per timestamp
    std::vector<double> thresholds;              // single (global) or per variate (local)
    std::vector<std::size_t> pot_fallbacks;      // variates where POT fell back to percentile
    std::string threshold_method;
    std::string combine_method;
};

namespace detail {

// Threshold for one univariate score sample under the spec, with the POT ->
// percentile(q) fallback; records the fallback for the caller's metadata.
inline double fit_univariate_threshold(const std::vector<double>& fit_scores, const ThresholdSpec& spec,
                                       const std::vector<std::uint8_t>* val_labels, bool* fell_back) {
    switch (spec.method) {
        case ThresholdMethod::percentile:
            return threshold_percentile(fit_scores, spec.f);
        case ThresholdMethod::validation_best:
            if (!val_labels) throw Error("bad_config", "validation_best needs labeled validation scores");
            return threshold_validation_best(fit_scores, *val_labels, spec.metric);
        case ThresholdMethod::pot:
            try {
                return threshold_pot(fit_scores, spec.q, spec.init_level).first;
            } catch (const Error&) {
                if (fell_back) *fell_back = true;
                return threshold_percentile(fit_scores, spec.q);
            }
    }
    throw Error("bad_config", "unknown threshold method");
}

inline std::vector<double> covered_column(const ScoreSeries& s, std::size_t n) {
    std::vector<double> out;
    out.reserve(s.T);
    for (std::size_t t = 0; t < s.T; ++t) {
        if (s.coverage[t] > 0) out.push_back(s.at(t, n));
    }
    return out;
}

inline std::vector<double> covered_global(const ScoreSeries& s) {
    std::vector<double> combined = combine_global(s);
    std::vector<double> out;
    out.reserve(s.T);
    for (std::size_t t = 0; t < s.T; ++t) {
        if (s.coverage[t] > 0) out.push_back(combined[t]);
    }
    return out;
}

}  // namespace detail

// Converts a score matrix into per-timestamp binary labels.
//
// Thresholds are fitted on `calibration` when given (e.g. scores of the
// anomaly-free training split) and on the scored series itself otherwise;
// only timestamps with nonzero coverage participate in the fit. For
// validation_best the fit uses `validation` scores and labels instead. A
// per-variate POT failure falls back to the percentile method at f = q for
// that variate and is recorded in the result.
inline LabelResult extract_labels(const ScoreSeries& scores, const ThresholdSpec& spec, CombineMethod combine,
                                  const ScoreSeries* calibration = nullptr,
                                  const ValidationData* validation = nullptr) {
    spec.validate();
    scores.validate();
    const ScoreSeries* fit_src = calibration ? calibration : &scores;
    if (fit_src->N != scores.N) {
        throw Error("shape_mismatch", "calibration scores have a different variate count");
    }

    const ScoreSeries* val_src = nullptr;
    std::vector<std::uint8_t> val_labels;
    if (spec.method == ThresholdMethod::validation_best) {
        if (!validation || !validation->scores || !validation->labels) {
            throw Error("bad_config", "validation_best needs labeled validation scores");
        }
        val_src = validation->scores;
        if (val_src->N != scores.N) throw Error("shape_mismatch", "validation scores have a different variate count");
        if (validation->labels->size() != val_src->T) {
            throw Error("length_mismatch", "validation labels do not match validation scores");
        }
        val_labels.reserve(val_src->T);
        for (std::size_t t = 0; t < val_src->T; ++t) {
            if (val_src->coverage[t] > 0) val_labels.push_back((*validation->labels)[t]);
        }
        fit_src = val_src;
    }

    LabelResult out;
    out.threshold_method = threshold_method_name(spec.method);
    out.combine_method = combine_method_name(combine);

    if (combine == CombineMethod::global) {
        const std::vector<double> fit_scores = detail::covered_global(*fit_src);
        bool fell_back = false;
        const double thr =
            detail::fit_univariate_threshold(fit_scores, spec, val_labels.empty() ? nullptr : &val_labels, &fell_back);
        if (fell_back) out.pot_fallbacks.push_back(0);
        out.thresholds.assign(1, thr);
        const std::vector<double> combined = combine_global(scores);
        out.labels.assign(scores.T, 0);
        for (std::size_t t = 0; t < scores.T; ++t) {
            out.labels[t] = scores.coverage[t] > 0 && combined[t] > thr ? 1 : 0;
        }
        return out;
    }

    // local: one threshold per variate, then pooling
    out.thresholds.resize(scores.N);
    std::vector<std::uint8_t> per_variate(scores.T * scores.N, 0);
    for (std::size_t n = 0; n < scores.N; ++n) {
        const std::vector<double> fit_scores = detail::covered_column(*fit_src, n);
        bool fell_back = false;
        const double thr =
            detail::fit_univariate_threshold(fit_scores, spec, val_labels.empty() ? nullptr : &val_labels, &fell_back);
        if (fell_back) out.pot_fallbacks.push_back(n);
        out.thresholds[n] = thr;
        for (std::size_t t = 0; t < scores.T; ++t) {
            per_variate[t * scores.N + n] = scores.coverage[t] > 0 && scores.at(t, n) > thr ? 1 : 0;
        }
    }
    out.labels = combine_local(per_variate, scores.T, scores.N,
                               combine == CombineMethod::local_or ? LocalPool::pool_or : LocalPool::pool_majority);
    return out;
}

}  // namespace tsad
