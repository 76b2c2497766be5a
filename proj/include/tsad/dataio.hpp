// Dataset ingestion, normalization, the sliding-window protocol, and
// synthetic multivariate series with injected anomalies.
//
// Window layout: window i covers timestamps [i*S, i*S + W); the final window
// is padded by repeating the last observed row so every window has exactly W
// rows. Test-time reconstruction forces non-overlapping windows (S = W),
// test-time forecasting forces S = 1.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsad/rng.hpp"
#include "tsad/tensor.hpp"

namespace tsad {

enum class NormMode { zscore, minmax };

struct NormStats {
    NormMode mode = NormMode::zscore;
    std::vector<double> center;  // per-variate mean (zscore) or min (minmax)
    std::vector<double> spread;  // per-variate std (zscore) or max-min (minmax)
};

struct TimeSeries {
    std::string name;
    std::size_t T = 0;
    std::size_t N = 0;
    std::vector<double> values;         // row-major T x N
    std::vector<std::uint8_t> labels;   // empty, or one 0/1 per timestamp
    std::vector<std::string> variate_names;
    std::optional<NormStats> norm_stats;

    double at(std::size_t t, std::size_t n) const { return values[t * N + n]; }
    double& at(std::size_t t, std::size_t n) { return values[t * N + n]; }
    bool has_labels() const { return !labels.empty(); }

    static TimeSeries zeros(std::string name, std::size_t T, std::size_t N) {
        TimeSeries ts;
        ts.name = std::move(name);
        ts.T = T;
        ts.N = N;
        ts.values.assign(T * N, 0.0);
        ts.default_variate_names();
        ts.validate();
        return ts;
    }

    void default_variate_names() {
        variate_names.resize(N);
        for (std::size_t n = 0; n < N; ++n) variate_names[n] = "v" + std::to_string(n);
    }

    void validate() const {
        if (T < 1 || N < 1) throw Error("bad_series", "time series needs T >= 1 and N >= 1");
        if (values.size() != T * N) throw Error("bad_series", "value buffer size does not match T x N");
        if (!labels.empty()) {
            if (labels.size() != T) {
                throw Error("bad_series", "labels length " + std::to_string(labels.size()) +
                                              " does not match T=" + std::to_string(T));
            }
            for (std::uint8_t v : labels) {
                if (v > 1) throw Error("bad_series", "labels must take values in {0,1}");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Sliding windows

enum class WindowPurpose { train, test_reco, test_fc };

struct WindowSet {
    const TimeSeries* source = nullptr;
    std::size_t W = 0;
    std::size_t S = 0;
    std::size_t count = 0;
    std::size_t pad_len = 0;  // repeats appended to the final window
    WindowPurpose purpose = WindowPurpose::train;

    std::size_t start(std::size_t i) const { return i * S; }

    // True when the timestamp right after window i exists (forecast target).
    bool has_successor(std::size_t i) const { return start(i) + W < source->T; }

    // Copies window i into out (W rows x N cols), repeating the final row
    // over the padded tail.
    void materialize(std::size_t i, double* out) const {
        const TimeSeries& ts = *source;
        const std::size_t s = start(i);
        for (std::size_t r = 0; r < W; ++r) {
            const std::size_t t = std::min(s + r, ts.T - 1);
            const double* row = ts.values.data() + t * ts.N;
            std::copy(row, row + ts.N, out + r * ts.N);
        }
    }
};

inline WindowSet make_windows(const TimeSeries& ts, std::size_t W, std::size_t S, WindowPurpose purpose) {
    if (purpose == WindowPurpose::test_reco) S = W;  // non-overlapping at test time
    if (purpose == WindowPurpose::test_fc) S = 1;    // predict every next timestamp
    if (W < 1) throw Error("bad_window", "window size must be >= 1");
    if (S < 1) throw Error("bad_window", "step size must be >= 1");
    if (W > ts.T) {
        throw Error("bad_window", "window size " + std::to_string(W) + " exceeds series length " +
                                      std::to_string(ts.T));
    }
    if (S > W) {
        throw Error("bad_window", "step size " + std::to_string(S) + " exceeds window size " + std::to_string(W));
    }
    WindowSet ws;
    ws.source = &ts;
    ws.W = W;
    ws.S = S;
    ws.purpose = purpose;
    ws.count = (ts.T - W + S - 1) / S + 1;  // ceil((T-W)/S) + 1
    const std::size_t last_start = (ws.count - 1) * S;
    ws.pad_len = last_start + W - ts.T;
    return ws;
}

// ---------------------------------------------------------------------------
// CSV formats: values as comma-separated columns with a header row of variate
// names; labels as a single headerless column of 0/1.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
        throw Error("parse_error", "unparseable cell '" + cell + "' at row " + std::to_string(row) +
                                       ", column " + std::to_string(col));
    }
    if (!std::isfinite(v)) {
        throw Error("parse_error", "non-finite value at row " + std::to_string(row) + ", column " +
                                       std::to_string(col));
    }
    return v;
}

}  // namespace detail

inline TimeSeries load_csv(const std::string& path, const std::optional<std::string>& label_path = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw Error("parse_error", "'" + path + "' is empty");
    TimeSeries ts;
    ts.name = path;
    ts.variate_names = detail::split_csv_line(line);
    ts.N = ts.variate_names.size();

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != ts.N) {
            throw Error("parse_error", "ragged row " + std::to_string(row) + ": expected " +
                                           std::to_string(ts.N) + " cells, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            ts.values.push_back(detail::parse_cell(cells[c], row, c + 1));
        }
    }
    ts.T = row;
    if (ts.T == 0) throw Error("parse_error", "'" + path + "' has a header but no data rows");

    if (label_path) {
        std::ifstream lin(*label_path);
        if (!lin) throw Error("io_error", "cannot open '" + *label_path + "'");
        std::size_t lrow = 0;
        while (std::getline(lin, line)) {
            if (line.empty()) continue;
            ++lrow;
            const double v = detail::parse_cell(line, lrow, 1);
            if (v != 0.0 && v != 1.0) {
                throw Error("parse_error", "label row " + std::to_string(lrow) + " is not 0/1");
            }
            ts.labels.push_back(static_cast<std::uint8_t>(v));
        }
        if (ts.labels.size() != ts.T) {
            throw Error("length_mismatch", "labels file has " + std::to_string(ts.labels.size()) +
                                               " rows but series has " + std::to_string(ts.T));
        }
    }
    ts.validate();
    return ts;
}

inline void save_csv(const TimeSeries& ts, const std::string& path,
                     const std::optional<std::string>& label_path = std::nullopt) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write '" + path + "'");
    out.precision(17);
    for (std::size_t n = 0; n < ts.N; ++n) {
        if (n) out << ',';
        out << (n < ts.variate_names.size() ? ts.variate_names[n] : "v" + std::to_string(n));
    }
    out << '\n';
    for (std::size_t t = 0; t < ts.T; ++t) {
        for (std::size_t n = 0; n < ts.N; ++n) {
            if (n) out << ',';
            out << ts.at(t, n);
        }
        out << '\n';
    }
    if (label_path) {
        std::ofstream lout(*label_path);
        if (!lout) throw Error("io_error", "cannot write '" + *label_path + "'");
        for (std::size_t t = 0; t < ts.T; ++t) {
            lout << (ts.has_labels() ? int(ts.labels[t]) : 0) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------

// Per-variate normalization. When fit_stats is given (training statistics)
// they are reused instead of fitting on ts, so test data is scaled exactly
// like the training split. Constant variates map to all-zeros.
inline TimeSeries normalize(const TimeSeries& ts, NormMode mode,
                            const std::optional<NormStats>& fit_stats = std::nullopt) {
    NormStats stats;
    if (fit_stats) {
        if (fit_stats->center.size() != ts.N) {
            throw Error("bad_stats", "fit statistics cover " + std::to_string(fit_stats->center.size()) +
                                         " variates, series has " + std::to_string(ts.N));
        }
        stats = *fit_stats;
    } else {
        stats.mode = mode;
        stats.center.resize(ts.N);
        stats.spread.resize(ts.N);
        for (std::size_t n = 0; n < ts.N; ++n) {
            if (mode == NormMode::zscore) {
                double mean = 0.0;
                for (std::size_t t = 0; t < ts.T; ++t) mean += ts.at(t, n);
                mean /= static_cast<double>(ts.T);
                double var = 0.0;
                for (std::size_t t = 0; t < ts.T; ++t) {
                    const double d = ts.at(t, n) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(ts.T);
                stats.center[n] = mean;
                stats.spread[n] = std::sqrt(var);
            } else {
                double lo = ts.at(0, n), hi = ts.at(0, n);
                for (std::size_t t = 1; t < ts.T; ++t) {
                    lo = std::min(lo, ts.at(t, n));
                    hi = std::max(hi, ts.at(t, n));
                }
                stats.center[n] = lo;
                stats.spread[n] = hi - lo;
            }
        }
    }

    TimeSeries out = ts;
    for (std::size_t n = 0; n < ts.N; ++n) {
        const double c = stats.center[n];
        const double s = stats.spread[n];
        for (std::size_t t = 0; t < ts.T; ++t) {
            out.at(t, n) = s > 0.0 ? (ts.at(t, n) - c) / s : 0.0;
        }
    }
    out.norm_stats = stats;
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data with the point/contextual/collective anomaly taxonomy.

enum class AnomalyKind {
    point_global,
    point_contextual,
    collective_shape,
    collective_trend,
    collective_season,
};

inline const char* anomaly_kind_name(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::point_global: return "point_global";
        case AnomalyKind::point_contextual: return "point_contextual";
        case AnomalyKind::collective_shape: return "collective_shape";
        case AnomalyKind::collective_trend: return "collective_trend";
        case AnomalyKind::collective_season: return "collective_season";
    }
    return "?";
}

struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::point_global;
    std::size_t start = 0;
    std::size_t length = 1;
    std::vector<std::size_t> variates;
    double magnitude = 1.0;

    bool is_point() const {
        return kind == AnomalyKind::point_global || kind == AnomalyKind::point_contextual;
    }
};

namespace detail {

inline void validate_specs(const std::vector<AnomalySpec>& specs, std::size_t T, std::size_t N) {
    for (const AnomalySpec& s : specs) {
        if (s.variates.empty()) throw Error("bad_spec", "anomaly spec with no variates");
        if (s.is_point() && s.length != 1) {
            throw Error("bad_spec", "point anomalies have length 1");
        }
        if (s.length < 1 || s.start + s.length > T) {
            throw Error("bad_spec", "anomaly [" + std::to_string(s.start) + "," +
                                        std::to_string(s.start + s.length) + ") outside series of length " +
                                        std::to_string(T));
        }
        for (std::size_t v : s.variates) {
            if (v >= N) throw Error("bad_spec", "variate index " + std::to_string(v) + " out of range");
        }
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            const std::size_t a0 = specs[i].start, a1 = a0 + specs[i].length;
            const std::size_t b0 = specs[j].start, b1 = b0 + specs[j].length;
            if (a0 < b1 && b0 < a1) {
                throw Error("overlapping_specs", "anomaly specs " + std::to_string(i) + " and " +
                                                     std::to_string(j) + " overlap in time");
            }
        }
    }
}

// Base-signal generator shared by synthesize(): per-variate sinusoids with
// distinct period/phase, linearly mixed so variates are correlated.
struct SineMix {
    std::size_t N;
    std::vector<double> period, phase;  // per raw component
    std::vector<double> mix;            // N x N, raw k -> variate n

    double clean(double t, std::size_t n, double freq_factor = 1.0) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const double raw = std::sin(2.0 * 3.14159265358979323846 * freq_factor * t / period[k] + phase[k]);
            acc += raw * mix[k * N + n];
        }
        return acc;
    }

    static SineMix draw(Rng& rng, std::size_t N) {
        SineMix g;
        g.N = N;
        g.period.resize(N);
        g.phase.resize(N);
        g.mix.resize(N * N);
        for (std::size_t k = 0; k < N; ++k) {
            g.period[k] = rng.uniform(30.0, 120.0);
            g.phase[k] = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        }
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t n = 0; n < N; ++n) {
                g.mix[k * N + n] = (k == n ? 1.0 : 0.0) + 0.4 * rng.uniform(-1.0, 1.0);
            }
        }
        return g;
    }
};

}  // namespace detail

// Builds a T x N series from mixed sinusoids plus Gaussian noise (sigma = 5%
// of each variate's amplitude), then injects the given anomalies. Labels are
// 1 exactly on the spec supports. The base signal including noise depends
// only on (T, N, seed), so the clean reference is reproducible by calling
// with an empty spec list.
inline TimeSeries synthesize(std::size_t T, std::size_t N, const std::vector<AnomalySpec>& specs,
                             std::uint64_t seed) {
    if (T < 1 || N < 1) throw Error("bad_series", "synthesize needs T >= 1 and N >= 1");
    detail::validate_specs(specs, T, N);

    Rng rng(seed);
    const detail::SineMix gen = detail::SineMix::draw(rng, N);

    TimeSeries ts = TimeSeries::zeros("synthetic", T, N);
    std::vector<double> clean(T * N);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n) {
            clean[t * N + n] = gen.clean(static_cast<double>(t), n);
        }
    }

    std::vector<double> mean(N, 0.0), lo(N, 1e300), hi(N, -1e300);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n) {
            const double v = clean[t * N + n];
            mean[n] += v;
            lo[n] = std::min(lo[n], v);
            hi[n] = std::max(hi[n], v);
        }
    }
    for (std::size_t n = 0; n < N; ++n) mean[n] /= static_cast<double>(T);

    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n) {
            const double amp = 0.5 * (hi[n] - lo[n]);
            ts.at(t, n) = clean[t * N + n] + 0.05 * amp * rng.normal();
        }
    }

    ts.labels.assign(T, 0);
    for (const AnomalySpec& s : specs) {
        for (std::size_t t = s.start; t < s.start + s.length; ++t) ts.labels[t] = 1;
        for (std::size_t n : s.variates) {
            const double range = hi[n] - lo[n];
            const double amp = 0.5 * range;
            switch (s.kind) {
                case AnomalyKind::point_global:
                    ts.at(s.start, n) += s.magnitude * range;
                    break;
                case AnomalyKind::point_contextual:
                    // in-range but locally improbable: the opposite-phase value
                    ts.at(s.start, n) = mean[n] + s.magnitude * (mean[n] - clean[s.start * N + n]);
                    break;
                case AnomalyKind::collective_shape:
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        const double ph = std::sin(2.0 * 3.14159265358979323846 *
                                                   static_cast<double>(t) / gen.period[n] + gen.phase[n]);
                        ts.at(t, n) = mean[n] + s.magnitude * amp * (ph >= 0.0 ? 1.0 : -1.0);
                    }
                    break;
                case AnomalyKind::collective_trend:
                    // linear ramp from a quarter of the target offset up to it
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        const double frac = static_cast<double>(t - s.start + 1) / static_cast<double>(s.length);
                        ts.at(t, n) += s.magnitude * range * (0.25 + 0.75 * frac);
                    }
                    break;
                case AnomalyKind::collective_season:
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        ts.at(t, n) = gen.clean(static_cast<double>(t), n, 2.0);  // doubled local frequency
                    }
                    break;
            }
        }
    }
    ts.validate();
    return ts;
}

// Injects anomalies from a template pool into a training series until the
// labeled fraction reaches `rate` (to within one anomaly's length). The
// returned series carries labels so clean/contaminated comparisons stay
// possible. Template start fields are ignored; placement is seeded-random
// and non-overlapping.
inline TimeSeries contaminate(const TimeSeries& train, const std::vector<AnomalySpec>& pool, double rate,
                              std::uint64_t seed) {
    if (rate < 0.0 || rate > 0.05) {
        throw Error("bad_rate", "contamination rate must lie in [0, 0.05]");
    }
    TimeSeries out = train;
    out.labels.assign(train.T, 0);
    const std::size_t target = static_cast<std::size_t>(std::llround(rate * static_cast<double>(train.T)));
    if (target == 0) return out;
    if (pool.empty()) throw Error("bad_spec", "contaminate needs a non-empty template pool");

    std::vector<double> mean(train.N, 0.0), lo(train.N, 1e300), hi(train.N, -1e300);
    for (std::size_t t = 0; t < train.T; ++t) {
        for (std::size_t n = 0; n < train.N; ++n) {
            const double v = train.at(t, n);
            mean[n] += v;
            lo[n] = std::min(lo[n], v);
            hi[n] = std::max(hi[n], v);
        }
    }
    for (std::size_t n = 0; n < train.N; ++n) mean[n] /= static_cast<double>(train.T);

    Rng rng(seed);
    std::size_t labeled = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * (pool.size() + 1);
    while (labeled < target) {
        if (++attempts > max_attempts) {
            throw Error("rate_infeasible", "could not reach contamination rate " + std::to_string(rate) +
                                               " with the given templates and series length");
        }
        AnomalySpec s = pool[rng.below(pool.size())];
        if (s.length > train.T) continue;
        s.start = rng.below(train.T - s.length + 1);
        bool overlaps = false;
        for (std::size_t t = s.start; t < s.start + s.length; ++t) {
            if (out.labels[t]) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;
        for (std::size_t v : s.variates) {
            if (v >= train.N) throw Error("bad_spec", "template variate index out of range");
        }

        for (std::size_t t = s.start; t < s.start + s.length; ++t) out.labels[t] = 1;
        labeled += s.length;
        for (std::size_t n : s.variates) {
            const double range = hi[n] - lo[n];
            const double amp = 0.5 * range;
            const double square_period = std::max<double>(6.0, static_cast<double>(s.length) / 2.0);
            switch (s.kind) {
                case AnomalyKind::point_global:
                    out.at(s.start, n) += s.magnitude * range;
                    break;
                case AnomalyKind::point_contextual:
                    out.at(s.start, n) = mean[n] + s.magnitude * (mean[n] - train.at(s.start, n));
                    break;
                case AnomalyKind::collective_shape:
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        const double ph = std::sin(2.0 * 3.14159265358979323846 *
                                                   static_cast<double>(t - s.start) / square_period);
                        out.at(t, n) = mean[n] + s.magnitude * amp * (ph >= 0.0 ? 1.0 : -1.0);
                    }
                    break;
                case AnomalyKind::collective_trend:
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        const double frac = static_cast<double>(t - s.start + 1) / static_cast<double>(s.length);
                        out.at(t, n) += s.magnitude * range * (0.25 + 0.75 * frac);
                    }
                    break;
                case AnomalyKind::collective_season:
                    // local time compression doubles the apparent frequency
                    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
                        const std::size_t src = std::min(s.start + 2 * (t - s.start), train.T - 1);
                        out.at(t, n) = train.at(src, n);
                    }
                    break;
            }
        }
    }
    out.validate();
    return out;
}

// Seeded non-overlapping anomaly placement used by the synth CLI and the
// experiment profiles. Collective kinds cycle shape/trend/season with
// lengths in [20, 60]; point kinds alternate global/contextual.
inline std::vector<AnomalySpec> make_default_specs(std::size_t T, std::size_t N, std::size_t n_point,
                                                   std::size_t n_collective, Rng& rng,
                                                   std::size_t region_start = 0) {
    std::vector<AnomalySpec> specs;
    const std::size_t gap = 5;
    auto overlaps_existing = [&](std::size_t start, std::size_t len) {
        const std::size_t a0 = start >= gap ? start - gap : 0;
        const std::size_t a1 = start + len + gap;
        for (const AnomalySpec& s : specs) {
            if (a0 < s.start + s.length && s.start < a1) return true;
        }
        return false;
    };
    auto random_variates = [&]() {
        const std::size_t count = 1 + rng.below(std::min<std::size_t>(3, N));
        std::vector<std::size_t> all(N);
        for (std::size_t i = 0; i < N; ++i) all[i] = i;
        rng.shuffle(all);
        return std::vector<std::size_t>(all.begin(), all.begin() + count);
    };

    const AnomalyKind collective_kinds[] = {AnomalyKind::collective_shape, AnomalyKind::collective_trend,
                                            AnomalyKind::collective_season};
    for (std::size_t i = 0; i < n_collective; ++i) {
        AnomalySpec s;
        s.kind = collective_kinds[i % 3];
        s.length = 30 + rng.below(41);
        // above 1.5 a square-wave shape anomaly clears the base amplitude at
        // every timestamp instead of crossing it
        s.magnitude = rng.uniform(1.5, 2.5);
        s.variates = random_variates();
        bool placed = false;
        for (int attempt = 0; attempt < 2000; ++attempt) {
            if (region_start + s.length >= T) break;
            s.start = region_start + rng.below(T - region_start - s.length);
            if (!overlaps_existing(s.start, s.length)) {
                placed = true;
                break;
            }
        }
        if (!placed) throw Error("placement_failed", "could not place collective anomaly " + std::to_string(i));
        specs.push_back(s);
    }
    for (std::size_t i = 0; i < n_point; ++i) {
        AnomalySpec s;
        s.kind = i % 2 == 0 ? AnomalyKind::point_global : AnomalyKind::point_contextual;
        s.length = 1;
        s.magnitude = s.kind == AnomalyKind::point_global ? rng.uniform(1.5, 2.5) : 1.0;
        s.variates = random_variates();
        bool placed = false;
        for (int attempt = 0; attempt < 2000; ++attempt) {
            s.start = region_start + rng.below(T - region_start);
            if (!overlaps_existing(s.start, 1)) {
                placed = true;
                break;
            }
        }
        if (!placed) throw Error("placement_failed", "could not place point anomaly " + std::to_string(i));
        specs.push_back(s);
    }
    std::sort(specs.begin(), specs.end(), [](const AnomalySpec& a, const AnomalySpec& b) { return a.start < b.start; });
    return specs;
}

// Simple stride-k decimator; a bucket is anomalous when any of its
// timestamps is.
inline TimeSeries decimate(const TimeSeries& ts, std::size_t k) {
    if (k < 1) throw Error("bad_stride", "decimation stride must be >= 1");
    if (k == 1) return ts;
    TimeSeries out;
    out.name = ts.name;
    out.N = ts.N;
    out.variate_names = ts.variate_names;
    for (std::size_t t = 0; t < ts.T; t += k) {
        for (std::size_t n = 0; n < ts.N; ++n) out.values.push_back(ts.at(t, n));
        if (ts.has_labels()) {
            std::uint8_t any = 0;
            for (std::size_t j = t; j < std::min(ts.T, t + k); ++j) any |= ts.labels[j];
            out.labels.push_back(any);
        }
        ++out.T;
    }
    out.validate();
    return out;
}

}  // namespace tsad
