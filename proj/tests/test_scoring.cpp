#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "tsad/scoring.hpp"

using namespace tsad;

namespace {

// UsadModel wired as an exact identity on positive inputs.
std::shared_ptr<UsadModel> identity_usad(std::size_t W, std::size_t N) {
    Rng rng(1);
    ModelConfig cfg;
    cfg.kind = ModelKind::usad;
    cfg.W = W;
    cfg.S = W;
    cfg.latent = W * N;
    auto m = std::make_shared<UsadModel>(cfg, N, rng);
    for (auto& [name, p] : m->parameters()) {
        std::fill(p.data().begin(), p.data().end(), 0.0);
        if (name.find(".w") != std::string::npos) {
            for (std::size_t i = 0; i < std::min(p.shape()[0], p.shape()[1]); ++i) p.at({i, i}) = 1.0;
        }
    }
    return m;
}

TimeSeries positive_series(std::size_t T, std::size_t N, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts = TimeSeries::zeros("pos", T, N);
    for (double& v : ts.values) v = rng.uniform(0.1, 1.0);
    return ts;
}

}  // namespace

TEST_CASE("baseline score is the absolute value", "[scoring]") {
    TimeSeries ts = TimeSeries::zeros("b", 1, 2);
    ts.at(0, 0) = -2.0;
    ts.at(0, 1) = 3.0;
    ScoreSeries s = baseline_score(ts);
    CHECK(s.at(0, 0) == 2.0);
    CHECK(s.at(0, 1) == 3.0);

    TimeSeries zeros = TimeSeries::zeros("z", 5, 3);
    ScoreSeries zs = baseline_score(zeros);
    for (double v : zs.scores) CHECK(v == 0.0);

    // deterministic: repeated calls emit the same scores
    ScoreSeries again = baseline_score(ts);
    CHECK(again.scores == s.scores);
}

TEST_CASE("identity model yields zero reconstruction scores", "[scoring]") {
    auto m = identity_usad(5, 2);
    TimeSeries ts = positive_series(20, 2, 3);
    ScoreSeries s = score_reconstruction(*m, ts, 0.5, 0.5);
    for (double v : s.scores) CHECK(v == Catch::Approx(0.0).margin(1e-12));
    for (auto c : s.coverage) CHECK(c == 1);
}

TEST_CASE("reconstruction scoring drops the padded tail", "[scoring]") {
    Rng rng(5);
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_reco;
    cfg.W = 10;
    cfg.S = 10;
    cfg.M = 4;
    TransformerModel m(cfg, 2, rng);
    TimeSeries ts = positive_series(25, 2, 7);
    ScoreSeries s = score_reconstruction(m, ts);
    CHECK(s.T == 25);
    CHECK(s.N == 2);

    // index bookkeeping: each cell equals the squared residual of the
    // window covering it
    WindowSet ws = make_windows(ts, 10, 10, WindowPurpose::test_reco);
    NoGradGuard ng;
    for (std::size_t i = 0; i < ws.count; ++i) {
        Tensor w = Tensor::zeros({1, 10, 2});
        ws.materialize(i, w.data().data());
        Tensor recon = m.reconstruct(w);
        for (std::size_t r = 0; r < 10; ++r) {
            const std::size_t t = ws.start(i) + r;
            if (t >= 25) break;
            for (std::size_t n = 0; n < 2; ++n) {
                const double res = recon.at({0, r, n}) - w.at({0, r, n});
                CHECK(s.at(t, n) == Catch::Approx(res * res).margin(1e-12));
            }
        }
    }
}

TEST_CASE("reconstruction scores do not depend on the inference batch size", "[scoring]") {
    Rng rng(9);
    ModelConfig cfg;
    cfg.kind = ModelKind::transformer_reco;
    cfg.W = 8;
    cfg.S = 8;
    cfg.M = 4;
    TransformerModel m(cfg, 3, rng);
    TimeSeries ts = positive_series(100, 3, 11);
    ScoreSeries a = score_reconstruction(m, ts, 0.5, 0.5, 1);
    ScoreSeries b = score_reconstruction(m, ts, 0.5, 0.5, 7);
    CHECK(a.scores == b.scores);
}

TEST_CASE("reconstruction score of a timestamp depends only on its window", "[scoring]") {
    Rng rng(13);
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_reco;
    cfg.W = 10;
    cfg.S = 10;
    cfg.M = 4;
    TransformerModel m(cfg, 2, rng);
    TimeSeries ts = positive_series(40, 2, 17);
    ScoreSeries before = score_reconstruction(m, ts);

    TimeSeries perturbed = ts;
    for (std::size_t t = 20; t < 30; ++t) perturbed.at(t, 0) += 5.0;  // third window only
    ScoreSeries after = score_reconstruction(m, perturbed);
    for (std::size_t t = 0; t < 20; ++t) {
        for (std::size_t n = 0; n < 2; ++n) CHECK(after.at(t, n) == before.at(t, n));
    }
    for (std::size_t t = 30; t < 40; ++t) {
        for (std::size_t n = 0; n < 2; ++n) CHECK(after.at(t, n) == before.at(t, n));
    }
}

TEST_CASE("scoring rejects kind mismatches", "[scoring]") {
    Rng rng(15);
    ModelConfig fc;
    fc.kind = ModelKind::itransformer_fc;
    fc.W = 8;
    fc.S = 1;
    fc.M = 2;
    TransformerModel mf(fc, 2, rng);
    TimeSeries ts = positive_series(30, 2, 19);
    CHECK_THROWS_AS(score_reconstruction(mf, ts), Error);

    ModelConfig rc;
    rc.kind = ModelKind::itransformer_reco;
    rc.W = 8;
    rc.S = 4;
    rc.M = 2;
    TransformerModel mr(rc, 2, rng);
    CHECK_THROWS_AS(score_forecast(mr, ts), Error);
}

TEST_CASE("forecast warm-up region is flagged with zero coverage", "[scoring]") {
    Rng rng(21);
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_fc;
    cfg.W = 8;
    cfg.S = 1;
    cfg.M = 2;
    TransformerModel m(cfg, 2, rng);
    TimeSeries ts = positive_series(30, 2, 23);
    ScoreSeries s = score_forecast(m, ts);
    CHECK(s.warmup_len() == 8);
    for (std::size_t t = 0; t < 8; ++t) {
        CHECK(s.coverage[t] == 0);
        CHECK(s.at(t, 0) == 0.0);
    }
    for (std::size_t t = 8; t < 30; ++t) CHECK(s.coverage[t] == 1);

    // score is the squared next-step prediction error
    WindowSet ws = make_windows(ts, 8, 1, WindowPurpose::test_fc);
    NoGradGuard ng;
    Tensor w = Tensor::zeros({1, 8, 2});
    ws.materialize(3, w.data().data());
    Tensor pred = m.forecast(w);
    for (std::size_t n = 0; n < 2; ++n) {
        const double r = pred.at({0, 0, n}) - ts.at(11, n);
        CHECK(s.at(11, n) == Catch::Approx(r * r).margin(1e-12));
    }
}

TEST_CASE("forecast scoring needs T greater than W", "[scoring]") {
    Rng rng(25);
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_fc;
    cfg.W = 10;
    cfg.S = 1;
    cfg.M = 2;
    TransformerModel m(cfg, 1, rng);
    TimeSeries ts = positive_series(10, 1, 27);
    CHECK_THROWS_AS(score_forecast(m, ts), Error);
}

TEST_CASE("converged forecast model scores near zero on a constant series", "[scoring]") {
    TimeSeries ts = TimeSeries::zeros("const", 300, 1);
    for (std::size_t t = 0; t < 300; ++t) ts.at(t, 0) = 0.4;
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_fc;
    cfg.W = 10;
    cfg.S = 1;
    cfg.M = 2;
    cfg.epochs = 40;
    cfg.lr = 1e-2;
    cfg.seed = 3;
    WindowSet ws = make_windows(ts, cfg.W, cfg.S, WindowPurpose::train);
    TrainedModel tm = train_model(cfg, ws);
    ScoreSeries s = score_forecast(*tm.model, ts);
    double mx = 0.0;
    for (std::size_t t = 10; t < 300; ++t) mx = std::max(mx, s.at(t, 0));
    CHECK(mx < 1e-3);
}

TEST_CASE("score export round-trips through csv and sidecar", "[scoring]") {
    Rng rng(29);
    ModelConfig cfg;
    cfg.kind = ModelKind::itransformer_fc;
    cfg.W = 5;
    cfg.S = 1;
    cfg.M = 2;
    TransformerModel m(cfg, 2, rng);
    TimeSeries ts = positive_series(20, 2, 31);
    ScoreSeries s = score_forecast(m, ts);

    save_scores(s, "tsad_scores_test.csv", "tsad_scores_test.meta.json",
                {{"W", cfg.W}, {"S", 1}, {"M", cfg.M}, {"loss", "mse"}, {"seed", 0}});
    ScoreSeries back = load_scores("tsad_scores_test.csv", "tsad_scores_test.meta.json");
    std::remove("tsad_scores_test.csv");
    std::remove("tsad_scores_test.meta.json");

    CHECK(back.T == s.T);
    CHECK(back.N == s.N);
    CHECK(back.scores == s.scores);
    CHECK(back.model_id == s.model_id);
    CHECK(back.warmup_len() == s.warmup_len());
}
