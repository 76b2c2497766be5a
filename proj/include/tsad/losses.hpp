// Training objectives: MSE, Huber, and Soft-DTW.
//
// Scalar losses are differentiable graph nodes; mse_elementwise is the plain
// per-cell form that feeds anomaly scoring. Soft-DTW follows the smoothed
// dynamic program with softmin_gamma(a) = -gamma * log(sum_k exp(-a_k/gamma))
// and the alignment-weight backward recursion; the anomaly score at test time
// is always elementwise MSE regardless of the training loss.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tsad/tensor.hpp"

namespace tsad {

enum class LossKind { mse, huber, softdtw };

struct LossSpec {
    LossKind kind = LossKind::mse;
    double delta = 1.0;  // Huber transition point
    double gamma = 1.0;  // Soft-DTW smoothing

    void validate() const {
        if (delta <= 0.0) throw Error("bad_loss", "huber delta must be positive");
        if (gamma <= 0.0) throw Error("bad_loss", "softdtw gamma must be positive");
    }
};

inline const char* loss_name(LossKind k) {
    switch (k) {
        case LossKind::mse: return "mse";
        case LossKind::huber: return "huber";
        case LossKind::softdtw: return "softdtw";
    }
    return "?";
}

// ---------------------------------------------------------------------------

inline Tensor mse_loss(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape()) detail::shape_error("mse", y_hat.shape(), y.shape());
    Tensor r = sub(y_hat, y);
    return mean(mul(r, r));
}

// Squared residual per cell; not recorded on the tape.
inline Tensor mse_elementwise(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape()) detail::shape_error("mse_elementwise", y_hat.shape(), y.shape());
    std::vector<double> out(y_hat.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = y_hat.data()[i] - y.data()[i];
        out[i] = r * r;
    }
    return Tensor(y_hat.shape(), std::move(out));
}

inline Tensor huber_loss(const Tensor& y_hat, const Tensor& y, double delta) {
    if (y_hat.shape() != y.shape()) detail::shape_error("huber", y_hat.shape(), y.shape());
    if (delta <= 0.0) throw Error("bad_loss", "huber delta must be positive");
    const std::size_t n = y_hat.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y_hat.data()[i] - y.data()[i];
        const double a = std::abs(r);
        acc += a < delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
    }
    Tensor result = Tensor::scalar(acc / static_cast<double>(n));

    if (detail::taping({&y_hat, &y})) {
        NodePtr pn = y_hat.node(), tn = y.node();
        detail::attach(result, {pn, tn}, [pn, tn, delta, n](TensorNode& self) {
            const double g = self.grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = pn->data[i] - tn->data[i];
                const double d = std::abs(r) < delta ? r : delta * (r > 0.0 ? 1.0 : -1.0);
                if (pn->requires_grad) {
                    pn->ensure_grad();
                    pn->grad[i] += g * d;
                }
                if (tn->requires_grad) {
                    tn->ensure_grad();
                    tn->grad[i] -= g * d;
                }
            }
        });
    }
    return result;
}

// ---------------------------------------------------------------------------
// Soft-DTW

namespace detail {

inline double softmin3(double a, double b, double c, double gamma) {
    const double mn = std::min({a, b, c});
    if (!std::isfinite(mn)) return mn;  // all +inf
    if (gamma == 0.0) return mn;
    double s = 0.0;
    if (std::isfinite(a)) s += std::exp(-(a - mn) / gamma);
    if (std::isfinite(b)) s += std::exp(-(b - mn) / gamma);
    if (std::isfinite(c)) s += std::exp(-(c - mn) / gamma);
    return mn - gamma * std::log(s);
}

// Fills R ((m+2) x (n+2), 1-indexed interior) given the cost matrix D
// (m x n, 0-indexed) and returns R[m][n].
inline double softdtw_forward(const std::vector<double>& cost, std::size_t m, std::size_t n,
                              double gamma, std::vector<double>& R) {
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t stride = n + 2;
    R.assign((m + 2) * stride, inf);
    R[0] = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const double d = cost[(i - 1) * n + (j - 1)];
            const double prev = softmin3(R[(i - 1) * stride + j], R[i * stride + (j - 1)],
                                         R[(i - 1) * stride + (j - 1)], gamma);
            R[i * stride + j] = d + prev;
        }
    }
    return R[m * stride + n];
}

// Alignment-weight backward pass: E[i][j] = d r_{m,n} / d r_{i,j}; the
// gradient with respect to cost cell (i,j) equals E[i][j].
inline void softdtw_alignment(const std::vector<double>& cost, std::size_t m, std::size_t n,
                              double gamma, std::vector<double>& R, std::vector<double>& E) {
    const double ninf = -std::numeric_limits<double>::infinity();
    const std::size_t stride = n + 2;
    for (std::size_t i = 1; i <= m; ++i) R[i * stride + (n + 1)] = ninf;
    for (std::size_t j = 1; j <= n; ++j) R[(m + 1) * stride + j] = ninf;
    R[(m + 1) * stride + (n + 1)] = R[m * stride + n];

    E.assign((m + 2) * stride, 0.0);
    E[(m + 1) * stride + (n + 1)] = 1.0;

    auto cost_at = [&](std::size_t i, std::size_t j) -> double {
        // 1-indexed with zero padding on row m+1 / column n+1
        if (i > m || j > n) return 0.0;
        return cost[(i - 1) * n + (j - 1)];
    };

    for (std::size_t j = n; j >= 1; --j) {
        for (std::size_t i = m; i >= 1; --i) {
            const double r0 = R[i * stride + j];
            const double ra = R[(i + 1) * stride + j];
            const double rb = R[i * stride + (j + 1)];
            const double rc = R[(i + 1) * stride + (j + 1)];
            const double a = std::isfinite(ra) ? std::exp((ra - r0 - cost_at(i + 1, j)) / gamma) : 0.0;
            const double b = std::isfinite(rb) ? std::exp((rb - r0 - cost_at(i, j + 1)) / gamma) : 0.0;
            const double c = std::isfinite(rc) ? std::exp((rc - r0 - cost_at(i + 1, j + 1)) / gamma) : 0.0;
            E[i * stride + j] = a * E[(i + 1) * stride + j] + b * E[i * stride + (j + 1)] +
                                c * E[(i + 1) * stride + (j + 1)];
        }
    }
}

}  // namespace detail

// Soft-DTW between two vector sequences under squared Euclidean ground cost.
// x is (m, d), y is (n, d); returns r(m, n). gamma == 0 selects the hard-DTW
// recursion, which is valid as a reference value but has no gradient.
inline Tensor softdtw(const Tensor& x, const Tensor& y, double gamma) {
    if (x.rank() != 2 || y.rank() != 2) {
        detail::shape_error("softdtw", x.shape(), y.shape());
    }
    if (x.shape()[1] != y.shape()[1]) detail::shape_error("softdtw", x.shape(), y.shape());
    if (gamma < 0.0) throw Error("bad_loss", "softdtw gamma must be >= 0");
    const std::size_t m = x.shape()[0], n = y.shape()[0], d = x.shape()[1];
    if (m == 0 || n == 0) throw Error("empty_sequence", "softdtw on an empty sequence");

    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = x.data()[i * d + k] - y.data()[j * d + k];
                acc += diff * diff;
            }
            cost[i * n + j] = acc;
        }
    }

    std::vector<double> R;
    const double value = detail::softdtw_forward(cost, m, n, gamma, R);
    Tensor result = Tensor::scalar(value);

    if (detail::taping({&x, &y})) {
        if (gamma == 0.0) {
            throw Error("bad_loss", "softdtw with gamma=0 is not differentiable; use gamma > 0 for training");
        }
        NodePtr xn = x.node(), yn = y.node();
        detail::attach(result, {xn, yn},
                       [xn, yn, m, n, d, gamma, cost = std::move(cost), R = std::move(R)](TensorNode& self) mutable {
                           std::vector<double> E;
                           detail::softdtw_alignment(cost, m, n, gamma, R, E);
                           const double g = self.grad[0];
                           const std::size_t stride = n + 2;
                           for (std::size_t i = 0; i < m; ++i) {
                               for (std::size_t j = 0; j < n; ++j) {
                                   const double e = E[(i + 1) * stride + (j + 1)];
                                   if (e == 0.0) continue;
                                   for (std::size_t k = 0; k < d; ++k) {
                                       const double diff = xn->data[i * d + k] - yn->data[j * d + k];
                                       if (xn->requires_grad) {
                                           xn->ensure_grad();
                                           xn->grad[i * d + k] += g * e * 2.0 * diff;
                                       }
                                       if (yn->requires_grad) {
                                           yn->ensure_grad();
                                           yn->grad[j * d + k] -= g * e * 2.0 * diff;
                                       }
                                   }
                               }
                           }
                       });
    }
    return result;
}

// ---------------------------------------------------------------------------
// Batched training losses over (B, W, N) reconstruction/forecast tensors.

inline Tensor training_loss(const LossSpec& spec, const Tensor& pred, const Tensor& target) {
    switch (spec.kind) {
        case LossKind::mse:
            return mse_loss(pred, target);
        case LossKind::huber:
            return huber_loss(pred, target, spec.delta);
        case LossKind::softdtw: {
            if (pred.rank() != 3 || pred.shape() != target.shape()) {
                detail::shape_error("softdtw_loss", pred.shape(), target.shape());
            }
            const std::size_t batch = pred.shape()[0];
            const std::size_t window = pred.shape()[1];
            Tensor acc;
            for (std::size_t b = 0; b < batch; ++b) {
                Tensor pw = reshape(slice(pred, 0, b, 1), {window, pred.shape()[2]});
                Tensor tw = reshape(slice(target, 0, b, 1), {window, target.shape()[2]});
                Tensor v = softdtw(pw, tw, spec.gamma);
                acc = b == 0 ? v : add(acc, v);
            }
            // normalized per window length, averaged over the batch
            return scale(acc, 1.0 / (static_cast<double>(batch) * static_cast<double>(window)));
        }
    }
    throw Error("bad_loss", "unknown loss kind");
}

}  // namespace tsad
