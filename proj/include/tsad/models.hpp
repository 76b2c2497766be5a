// Scoring models: vanilla transformer (reconstruction), iTransformer
// (reconstruction and forecasting heads), and the USAD adversarial
// autoencoder pair.
//
// The two transformer variants differ only in their embedding. The standard
// embedding turns each timestamp row into a token and adds sinusoidal
// positional encoding; the inverted embedding turns each variate's full
// W-length history into a token, so self-attention mixes variates and no
// positional encoding is applied. The encoder is n_layers blocks of
// {multi-head self-attention -> add&norm -> feed-forward (M -> 4M -> M,
// GELU) -> add&norm}.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsad/dataio.hpp"
#include "tsad/losses.hpp"
#include "tsad/optim.hpp"
#include "tsad/rng.hpp"
#include "tsad/tensor.hpp"

namespace tsad {

enum class ModelKind { baseline, transformer_reco, itransformer_reco, itransformer_fc, usad };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::baseline: return "baseline";
        case ModelKind::transformer_reco: return "transformer_reco";
        case ModelKind::itransformer_reco: return "itransformer_reco";
        case ModelKind::itransformer_fc: return "itransformer_fc";
        case ModelKind::usad: return "usad";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    for (ModelKind k : {ModelKind::baseline, ModelKind::transformer_reco, ModelKind::itransformer_reco,
                        ModelKind::itransformer_fc, ModelKind::usad}) {
        if (s == model_kind_name(k)) return k;
    }
    throw Error("bad_config", "unknown model kind '" + s + "'");
}

inline LossKind loss_kind_from_name(const std::string& s) {
    for (LossKind k : {LossKind::mse, LossKind::huber, LossKind::softdtw}) {
        if (s == loss_name(k)) return k;
    }
    throw Error("bad_config", "unknown loss '" + s + "'");
}

struct ModelConfig {
    ModelKind kind = ModelKind::itransformer_reco;
    std::size_t W = 96;
    std::size_t S = 48;
    std::size_t M = 96;
    std::size_t n_heads = 2;
    std::size_t n_layers = 2;
    LossSpec loss;
    std::size_t epochs = 10;
    std::size_t batch = 32;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    std::size_t latent = 5;  // USAD latent dimension

    bool is_attention() const {
        return kind == ModelKind::transformer_reco || kind == ModelKind::itransformer_reco ||
               kind == ModelKind::itransformer_fc;
    }
    bool is_reconstruction() const {
        return kind == ModelKind::transformer_reco || kind == ModelKind::itransformer_reco ||
               kind == ModelKind::usad;
    }

    void validate() const {
        if (W < 1 || M < 1 || S < 1) throw Error("bad_config", "W, S and M must be >= 1");
        if (S > W) throw Error("bad_config", "step size exceeds window size");
        if (batch < 1) throw Error("bad_config", "batch size must be >= 1");
        if (lr <= 0.0) throw Error("bad_config", "learning rate must be positive");
        loss.validate();
        if (is_attention()) {
            if (n_heads < 1 || n_layers < 1) throw Error("bad_config", "attention models need n_heads, n_layers >= 1");
            if (M % n_heads != 0) {
                throw Error("bad_config", "n_heads=" + std::to_string(n_heads) + " does not divide M=" +
                                              std::to_string(M));
            }
        }
        if (kind == ModelKind::itransformer_fc) {
            if (S != 1) throw Error("bad_config", "forecasting requires step size 1");
            if (loss.kind == LossKind::softdtw) {
                throw Error("bad_config", "softdtw has no alignment structure on a single-step target");
            }
        }
        if (kind == ModelKind::usad && latent < 1) throw Error("bad_config", "usad latent must be >= 1");
    }

    std::string summary() const {
        std::string s = std::string(model_kind_name(kind)) + " W=" + std::to_string(W) + " S=" +
                        std::to_string(S) + " M=" + std::to_string(M);
        if (kind == ModelKind::usad) s += " latent=" + std::to_string(latent);
        return s;
    }
};

inline nlohmann::json to_json(const ModelConfig& c) {
    return nlohmann::json{{"kind", model_kind_name(c.kind)},
                          {"W", c.W},
                          {"S", c.S},
                          {"M", c.M},
                          {"n_heads", c.n_heads},
                          {"n_layers", c.n_layers},
                          {"loss", loss_name(c.loss.kind)},
                          {"huber_delta", c.loss.delta},
                          {"softdtw_gamma", c.loss.gamma},
                          {"epochs", c.epochs},
                          {"batch", c.batch},
                          {"lr", c.lr},
                          {"seed", c.seed},
                          {"latent", c.latent}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    if (j.contains("kind")) c.kind = model_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("W")) c.W = j.at("W").get<std::size_t>();
    if (j.contains("S")) c.S = j.at("S").get<std::size_t>();
    if (j.contains("M")) c.M = j.at("M").get<std::size_t>();
    if (j.contains("n_heads")) c.n_heads = j.at("n_heads").get<std::size_t>();
    if (j.contains("n_layers")) c.n_layers = j.at("n_layers").get<std::size_t>();
    if (j.contains("loss")) c.loss.kind = loss_kind_from_name(j.at("loss").get<std::string>());
    if (j.contains("huber_delta")) c.loss.delta = j.at("huber_delta").get<double>();
    if (j.contains("softdtw_gamma")) c.loss.gamma = j.at("softdtw_gamma").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch")) c.batch = j.at("batch").get<std::size_t>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("latent")) c.latent = j.at("latent").get<std::size_t>();
    return c;
}

// ---------------------------------------------------------------------------

// Sinusoidal positional encoding, one row per timestamp.
inline Tensor positional_encoding(std::size_t length, std::size_t dim) {
    Tensor pe = Tensor::zeros({length, dim});
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double exponent = static_cast<double>(j - j % 2) / static_cast<double>(dim);
            const double angle = static_cast<double>(t) / std::pow(10000.0, exponent);
            pe.at({t, j}) = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

namespace detail {

struct Linear {
    Tensor w, b;
    Tensor operator()(const Tensor& x) const { return add(matmul(x, w), b); }
};

inline Linear make_linear(Rng& rng, std::size_t in, std::size_t out, const std::string& name,
                          ParamList& params) {
    Linear l;
    l.w = init_weights(rng, {in, out});
    l.w.set_requires_grad(true);
    l.w.set_name(name + ".w");
    l.b = Tensor::zeros({out}, true);
    l.b.set_name(name + ".b");
    params.emplace_back(l.w.name(), l.w);
    params.emplace_back(l.b.name(), l.b);
    return l;
}

inline Tensor make_affine_param(std::size_t dim, double value, const std::string& name, ParamList& params) {
    Tensor t = Tensor::full({dim}, value, true);
    t.set_name(name);
    params.emplace_back(name, t);
    return t;
}

}  // namespace detail

class Model {
public:
    virtual ~Model() = default;

    const ModelConfig& config() const { return cfg_; }
    std::size_t n_variates() const { return n_variates_; }
    ParamList& parameters() { return params_; }
    const ParamList& parameters() const { return params_; }

    virtual Tensor reconstruct(const Tensor& windows) {
        (void)windows;
        throw Error("kind_mismatch", std::string(model_kind_name(cfg_.kind)) + " has no reconstruction head");
    }
    virtual Tensor forecast(const Tensor& windows) {
        (void)windows;
        throw Error("kind_mismatch", std::string(model_kind_name(cfg_.kind)) + " has no forecasting head");
    }

protected:
    Model(ModelConfig cfg, std::size_t n_variates) : cfg_(std::move(cfg)), n_variates_(n_variates) {
        if (n_variates_ < 1) throw Error("bad_config", "model needs at least one variate");
    }

    void check_windows(const Tensor& windows) const {
        if (windows.rank() != 3 || windows.shape()[1] != cfg_.W || windows.shape()[2] != n_variates_) {
            throw Error("shape_mismatch", "expected windows of shape (B," + std::to_string(cfg_.W) + "," +
                                              std::to_string(n_variates_) + "), got " + shape_str(windows.shape()));
        }
    }

    ModelConfig cfg_;
    std::size_t n_variates_;
    ParamList params_;
};

using ModelPtr = std::shared_ptr<Model>;

// ---------------------------------------------------------------------------

class TransformerModel : public Model {
public:
    TransformerModel(const ModelConfig& cfg, std::size_t n_variates, Rng& rng)
        : Model(cfg, n_variates), inverted_(cfg.kind != ModelKind::transformer_reco) {
        cfg.validate();
        if (!cfg.is_attention()) throw Error("bad_config", "TransformerModel needs an attention kind");

        const std::size_t token_in = inverted_ ? cfg_.W : n_variates_;
        embed_ = detail::make_linear(rng, token_in, cfg_.M, "embed", params_);
        if (!inverted_) posenc_ = positional_encoding(cfg_.W, cfg_.M);

        layers_.resize(cfg_.n_layers);
        for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
            const std::string p = "enc" + std::to_string(l);
            EncoderLayer& layer = layers_[l];
            layer.wq = detail::make_linear(rng, cfg_.M, cfg_.M, p + ".attn.q", params_);
            layer.wk = detail::make_linear(rng, cfg_.M, cfg_.M, p + ".attn.k", params_);
            layer.wv = detail::make_linear(rng, cfg_.M, cfg_.M, p + ".attn.v", params_);
            layer.wo = detail::make_linear(rng, cfg_.M, cfg_.M, p + ".attn.out", params_);
            layer.ln1_g = detail::make_affine_param(cfg_.M, 1.0, p + ".ln1.g", params_);
            layer.ln1_b = detail::make_affine_param(cfg_.M, 0.0, p + ".ln1.b", params_);
            layer.ff1 = detail::make_linear(rng, cfg_.M, 4 * cfg_.M, p + ".ff1", params_);
            layer.ff2 = detail::make_linear(rng, 4 * cfg_.M, cfg_.M, p + ".ff2", params_);
            layer.ln2_g = detail::make_affine_param(cfg_.M, 1.0, p + ".ln2.g", params_);
            layer.ln2_b = detail::make_affine_param(cfg_.M, 0.0, p + ".ln2.b", params_);
        }

        std::size_t head_out = 0;
        switch (cfg_.kind) {
            case ModelKind::transformer_reco: head_out = n_variates_; break;
            case ModelKind::itransformer_reco: head_out = cfg_.W; break;
            case ModelKind::itransformer_fc: head_out = 1; break;
            default: break;
        }
        head_ = detail::make_linear(rng, cfg_.M, head_out, "head", params_);
    }

    bool inverted() const { return inverted_; }

    // (B, W, N) -> (B, L, M) with L = N (inverted) or L = W (standard).
    Tensor embed(const Tensor& windows) const {
        check_windows(windows);
        if (inverted_) {
            return embed_(transpose_last(windows));
        }
        return add(embed_(windows), posenc_);
    }

    Tensor encode(Tensor x) const {
        const std::size_t heads = cfg_.n_heads;
        const std::size_t dh = cfg_.M / heads;
        const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
        for (const EncoderLayer& l : layers_) {
            Tensor q = l.wq(x), k = l.wk(x), v = l.wv(x);
            std::vector<Tensor> outs;
            outs.reserve(heads);
            for (std::size_t h = 0; h < heads; ++h) {
                Tensor qh = slice(q, 2, h * dh, dh);
                Tensor kh = slice(k, 2, h * dh, dh);
                Tensor vh = slice(v, 2, h * dh, dh);
                Tensor attn = softmax(scale(matmul(qh, transpose_last(kh)), att_scale), 2);
                outs.push_back(matmul(attn, vh));
            }
            Tensor attn_out = l.wo(heads == 1 ? outs[0] : concat(outs, 2));
            x = add(mul(layernorm(add(x, attn_out)), l.ln1_g), l.ln1_b);
            Tensor ff = l.ff2(gelu(l.ff1(x)));
            x = add(mul(layernorm(add(x, ff)), l.ln2_g), l.ln2_b);
        }
        return x;
    }

    Tensor reconstruct(const Tensor& windows) override {
        if (!cfg_.is_reconstruction()) {
            throw Error("kind_mismatch", std::string(model_kind_name(cfg_.kind)) + " has no reconstruction head");
        }
        Tensor y = head_(encode(embed(windows)));
        return inverted_ ? transpose_last(y) : y;  // back to (B, W, N)
    }

    Tensor forecast(const Tensor& windows) override {
        if (cfg_.kind != ModelKind::itransformer_fc) {
            throw Error("kind_mismatch", std::string(model_kind_name(cfg_.kind)) + " has no forecasting head");
        }
        Tensor y = head_(encode(embed(windows)));  // (B, N, 1)
        return transpose_last(y);                  // (B, 1, N): the timestamp right after the window
    }

private:
    struct EncoderLayer {
        detail::Linear wq, wk, wv, wo;
        Tensor ln1_g, ln1_b;
        detail::Linear ff1, ff2;
        Tensor ln2_g, ln2_b;
    };

    bool inverted_;
    detail::Linear embed_;
    Tensor posenc_;
    std::vector<EncoderLayer> layers_;
    detail::Linear head_;
};

// Two autoencoders with a shared encoder on flattened windows
// (W*N -> latent -> W*N).
class UsadModel : public Model {
public:
    UsadModel(const ModelConfig& cfg, std::size_t n_variates, Rng& rng) : Model(cfg, n_variates) {
        cfg.validate();
        if (cfg.kind != ModelKind::usad) throw Error("bad_config", "UsadModel needs kind=usad");
        const std::size_t flat = cfg_.W * n_variates_;
        enc_ = detail::make_linear(rng, flat, cfg_.latent, "encoder", params_);
        dec1_ = detail::make_linear(rng, cfg_.latent, flat, "decoder1", params_);
        dec2_ = detail::make_linear(rng, cfg_.latent, flat, "decoder2", params_);
    }

    Tensor flatten(const Tensor& windows) const {
        check_windows(windows);
        return reshape(windows, {windows.shape()[0], cfg_.W * n_variates_});
    }
    Tensor unflatten(const Tensor& flat) const {
        return reshape(flat, {flat.shape()[0], cfg_.W, n_variates_});
    }

    Tensor encode(const Tensor& flat) const { return relu(enc_(flat)); }
    Tensor ae1_flat(const Tensor& flat) const { return dec1_(encode(flat)); }
    Tensor ae2_flat(const Tensor& flat) const { return dec2_(encode(flat)); }

    Tensor ae1(const Tensor& windows) { return unflatten(ae1_flat(flatten(windows))); }
    Tensor ae2(const Tensor& windows) { return unflatten(ae2_flat(flatten(windows))); }
    Tensor ae2_of_ae1(const Tensor& windows) { return unflatten(ae2_flat(ae1_flat(flatten(windows)))); }

    // AE1 reconstruction; the anomaly score combines both decoders.
    Tensor reconstruct(const Tensor& windows) override { return ae1(windows); }

    // Parameter slices for the two optimizers (encoder is shared).
    ParamList ae1_params() { return {params_[0], params_[1], params_[2], params_[3]}; }
    ParamList ae2_params() { return {params_[0], params_[1], params_[4], params_[5]}; }

private:
    detail::Linear enc_, dec1_, dec2_;
};

inline ModelPtr make_model(const ModelConfig& cfg, std::size_t n_variates, Rng& rng) {
    cfg.validate();
    switch (cfg.kind) {
        case ModelKind::baseline:
            throw Error("bad_config", "the baseline is deterministic and has no trainable model");
        case ModelKind::usad:
            return std::make_shared<UsadModel>(cfg, n_variates, rng);
        default:
            return std::make_shared<TransformerModel>(cfg, n_variates, rng);
    }
}

// USAD anomaly score: alpha*|y - AE1(y)| + beta*|y - AE2(AE1(y))| per cell,
// with alpha + beta = 1.
inline Tensor usad_score(UsadModel& model, const Tensor& windows, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0 || std::abs(alpha + beta - 1.0) > 1e-9) {
        throw Error("bad_config", "usad score weights must be nonnegative with alpha + beta = 1");
    }
    NoGradGuard ng;
    Tensor r1 = model.ae1(windows);
    Tensor r2 = model.ae2_of_ae1(windows);
    Tensor out = Tensor::zeros(windows.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = alpha * std::abs(windows.data()[i] - r1.data()[i]) +
                        beta * std::abs(windows.data()[i] - r2.data()[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainedModel {
    ModelPtr model;
    std::vector<double> loss_curve;  // one entry per epoch
};

namespace detail {

// Gathers the windows at `idx` into a (B, W, N) batch tensor.
inline Tensor gather_batch(const WindowSet& ws, const std::vector<std::size_t>& idx) {
    const std::size_t B = idx.size(), W = ws.W, N = ws.source->N;
    Tensor batch = Tensor::zeros({B, W, N});
    for (std::size_t b = 0; b < B; ++b) ws.materialize(idx[b], batch.data().data() + b * W * N);
    return batch;
}

// Rows immediately after each window, shaped (B, 1, N).
inline Tensor gather_targets(const WindowSet& ws, const std::vector<std::size_t>& idx) {
    const std::size_t B = idx.size(), N = ws.source->N;
    Tensor t = Tensor::zeros({B, 1, N});
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t row = ws.start(idx[b]) + ws.W;
        const double* src = ws.source->values.data() + row * N;
        std::copy(src, src + N, t.data().data() + b * N);
    }
    return t;
}

inline void check_loss_finite(double v, std::size_t epoch, std::size_t batch) {
    if (!std::isfinite(v)) {
        throw Error("nan_loss", "training loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                    ", batch " + std::to_string(batch + 1));
    }
}

inline TrainedModel usad_train(const ModelConfig& cfg, const WindowSet& windows, Rng& rng) {
    auto model = std::make_shared<UsadModel>(cfg, windows.source->N, rng);
    TrainedModel out{model, {}};
    if (cfg.epochs == 0) return out;

    ParamList p1 = model->ae1_params();
    ParamList p2 = model->ae2_params();
    AdamState opt1 = AdamState::for_params(p1, cfg.lr);
    AdamState opt2 = AdamState::for_params(p2, cfg.lr);

    std::vector<std::size_t> order(windows.count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t phase1_epochs = cfg.epochs / 2;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t off = 0, bidx = 0; off < order.size(); off += cfg.batch, ++bidx) {
            const std::size_t take = std::min(cfg.batch, order.size() - off);
            std::vector<std::size_t> idx(order.begin() + off, order.begin() + off + take);
            Tensor x = gather_batch(windows, idx);

            double w1 = 1.0, w2 = 0.0;
            const bool adversarial = epoch >= phase1_epochs;
            if (adversarial) {
                const double e = static_cast<double>(epoch + 1);
                w1 = 1.0 / e;
                w2 = 1.0 - 1.0 / e;
            }

            zero_grads(model->parameters());
            Tensor l1 = adversarial
                            ? add(scale(mse_loss(model->ae1(x), x), w1), scale(mse_loss(model->ae2_of_ae1(x), x), w2))
                            : mse_loss(model->ae1(x), x);
            check_loss_finite(l1.item(), epoch, bidx);
            l1.backward();
            adam_step(p1, opt1);

            zero_grads(model->parameters());
            Tensor l2 = adversarial
                            ? sub(scale(mse_loss(model->ae2(x), x), w1), scale(mse_loss(model->ae2_of_ae1(x), x), w2))
                            : mse_loss(model->ae2(x), x);
            check_loss_finite(l2.item(), epoch, bidx);
            l2.backward();
            adam_step(p2, opt2);

            epoch_loss += 0.5 * (l1.item() + l2.item()) * static_cast<double>(take);
            seen += take;
        }
        out.loss_curve.push_back(epoch_loss / static_cast<double>(seen));
    }
    return out;
}

}  // namespace detail

// Mini-batch training with per-epoch seeded shuffling. Reconstruction kinds
// fit loss(window, reconstruct(window)); the forecasting kind fits
// loss(next-row target, forecast(window)) over windows that have a
// successor. The per-epoch loss curve averages over all windows.
inline TrainedModel train_model(const ModelConfig& cfg, const WindowSet& windows) {
    cfg.validate();
    if (windows.purpose != WindowPurpose::train) {
        throw Error("bad_windows", "train_model needs windows with purpose=train");
    }
    Rng rng(cfg.seed);
    if (cfg.kind == ModelKind::usad) return detail::usad_train(cfg, windows, rng);
    if (!cfg.is_attention()) throw Error("bad_config", "cannot train a deterministic baseline");

    auto model = std::make_shared<TransformerModel>(cfg, windows.source->N, rng);
    TrainedModel out{model, {}};

    const bool forecasting = cfg.kind == ModelKind::itransformer_fc;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < windows.count; ++i) {
        if (!forecasting || windows.has_successor(i)) order.push_back(i);
    }
    if (order.empty()) throw Error("bad_windows", "no trainable windows (forecasting needs a successor row)");

    AdamState opt = AdamState::for_params(model->parameters(), cfg.lr);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t off = 0, bidx = 0; off < order.size(); off += cfg.batch, ++bidx) {
            const std::size_t take = std::min(cfg.batch, order.size() - off);
            std::vector<std::size_t> idx(order.begin() + off, order.begin() + off + take);
            Tensor x = detail::gather_batch(windows, idx);

            zero_grads(model->parameters());
            Tensor loss = forecasting ? training_loss(cfg.loss, model->forecast(x), detail::gather_targets(windows, idx))
                                      : training_loss(cfg.loss, model->reconstruct(x), x);
            detail::check_loss_finite(loss.item(), epoch, bidx);
            loss.backward();
            adam_step(model->parameters(), opt);

            epoch_loss += loss.item() * static_cast<double>(take);
            seen += take;
        }
        out.loss_curve.push_back(epoch_loss / static_cast<double>(seen));
    }
    return out;
}

inline TrainedModel usad_train(const ModelConfig& cfg, const WindowSet& windows) {
    ModelConfig c = cfg;
    c.kind = ModelKind::usad;
    return train_model(c, windows);
}

// ---------------------------------------------------------------------------
// Checkpoints: self-describing JSON bundle of config + named parameters.
// nlohmann serializes doubles with shortest round-trip precision, so
// save/load reproduces every parameter bit-exactly.

inline nlohmann::json checkpoint_json(const TrainedModel& tm) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, p] : tm.model->parameters()) {
        params[name] = {{"shape", p.shape()}, {"data", p.data()}};
    }
    return nlohmann::json{{"format", "tsad-checkpoint-v1"},
                          {"config", to_json(tm.model->config())},
                          {"n_variates", tm.model->n_variates()},
                          {"loss_curve", tm.loss_curve},
                          {"parameters", params}};
}

inline void save_checkpoint(const TrainedModel& tm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write '" + path + "'");
    out << checkpoint_json(tm).dump(1) << '\n';
}

inline TrainedModel load_checkpoint_json(const nlohmann::json& j) {
    if (!j.contains("format") || j.at("format") != "tsad-checkpoint-v1") {
        throw Error("bad_checkpoint", "not a tsad checkpoint bundle");
    }
    const ModelConfig cfg = model_config_from_json(j.at("config"));
    const std::size_t n_variates = j.at("n_variates").get<std::size_t>();
    Rng rng(cfg.seed);
    TrainedModel tm;
    tm.model = make_model(cfg, n_variates, rng);
    tm.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    const nlohmann::json& params = j.at("parameters");
    for (auto& [name, p] : tm.model->parameters()) {
        if (!params.contains(name)) throw Error("bad_checkpoint", "missing parameter '" + name + "'");
        const nlohmann::json& entry = params.at(name);
        const Shape shape = entry.at("shape").get<Shape>();
        if (shape != p.shape()) {
            throw Error("bad_checkpoint", "parameter '" + name + "' has shape " + shape_str(shape) +
                                              ", expected " + shape_str(p.shape()));
        }
        p.data() = entry.at("data").get<std::vector<double>>();
    }
    return tm;
}

inline TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return load_checkpoint_json(j);
}

}  // namespace tsad
