// Dense row-major tensors with reverse-mode automatic differentiation.
//
// Every operation records itself on the computation graph when autograd is
// enabled and at least one operand requires gradients. backward() walks the
// graph in reverse topological order and accumulates dLoss/dX into the grad
// buffer of every node that requires gradients. Gradients of leaf tensors
// (parameters) persist across backward() calls until zero_grad().

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

// Finite-value checks on op outputs. On by default in debug builds.
#ifndef TSAD_CHECK_FINITE
#ifdef NDEBUG
#define TSAD_CHECK_FINITE 0
#else
#define TSAD_CHECK_FINITE 1
#endif
#endif

namespace tsad {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

namespace detail {

[[noreturn]] inline void shape_error(const std::string& op, const Shape& a, const Shape& b) {
    throw Error("shape_mismatch", op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

// Thread-local autograd switch; scoring paths disable taping via NoGradGuard.
inline bool& grad_mode() {
    thread_local bool enabled = true;
    return enabled;
}

}  // namespace detail

struct NoGradGuard {
    NoGradGuard() : prev_(detail::grad_mode()) { detail::grad_mode() = false; }
    ~NoGradGuard() { detail::grad_mode() = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

struct TensorNode {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first use
    bool requires_grad = false;
    std::string name;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;  // null for leaves

    std::size_t size() const { return data.size(); }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

using NodePtr = std::shared_ptr<TensorNode>;

class Tensor {
public:
    Tensor() = default;

    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false) {
        if (shape.empty()) throw Error("bad_shape", "tensor rank must be >= 1");
        for (std::size_t d : shape) {
            if (d == 0) throw Error("bad_shape", "zero-sized dimension in " + shape_str(shape));
        }
        if (shape_numel(shape) != data.size()) {
            throw Error("bad_shape", "shape " + shape_str(shape) + " does not match data length " +
                                         std::to_string(data.size()));
        }
        node_ = std::make_shared<TensorNode>();
        node_->shape = std::move(shape);
        node_->data = std::move(data);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        std::size_t n = shape_numel(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
    }

    static Tensor full(Shape shape, double value, bool requires_grad = false) {
        std::size_t n = shape_numel(shape);
        return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
    }

    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->data.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape[i]; }

    std::vector<double>& data() { return node_->data; }
    const std::vector<double>& data() const { return node_->data; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    const std::string& name() const { return node_->name; }
    void set_name(std::string name) { node_->name = std::move(name); }

    bool has_grad() const { return !node_->grad.empty(); }
    std::vector<double>& grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    const std::vector<double>& grad() const {
        if (node_->grad.empty()) {
            throw Error("no_grad", "gradient not populated for tensor '" + node_->name + "'; call backward() first");
        }
        return node_->grad;
    }

    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }

    double item() const {
        if (size() != 1) throw Error("not_scalar", "item() on tensor of shape " + shape_str(shape()));
        return node_->data[0];
    }

    double at(std::initializer_list<std::size_t> idx) const { return node_->data[offset(idx)]; }
    double& at(std::initializer_list<std::size_t> idx) { return node_->data[offset(idx)]; }

    void backward() const;

    NodePtr node() const { return node_; }

private:
    std::size_t offset(std::initializer_list<std::size_t> idx) const {
        const Shape& s = node_->shape;
        if (idx.size() != s.size()) throw Error("bad_index", "index rank mismatch for " + shape_str(s));
        std::size_t off = 0, i = 0;
        for (std::size_t v : idx) {
            if (v >= s[i]) throw Error("bad_index", "index out of range for " + shape_str(s));
            off = off * s[i] + v;
            ++i;
        }
        return off;
    }

    NodePtr node_;
};

namespace detail {

inline void check_finite(const Tensor& t, const char* op) {
#if TSAD_CHECK_FINITE
    for (double v : t.data()) {
        if (!std::isfinite(v)) {
            throw Error("non_finite", std::string(op) + " produced a non-finite value");
        }
    }
#else
    (void)t;
    (void)op;
#endif
}

inline bool taping(std::initializer_list<const Tensor*> inputs) {
    if (!grad_mode()) return false;
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

// Marks `out` as a graph node with the given parents and backward function.
inline void attach(Tensor& out, std::vector<NodePtr> parents, std::function<void(TensorNode&)> fn) {
    NodePtr n = out.node();
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
}

// Splits `shape` at `axis` into outer x n x inner extents.
struct AxisView {
    std::size_t outer, n, inner;
};

inline AxisView axis_view(const Shape& shape, std::size_t axis) {
    if (axis >= shape.size()) throw Error("bad_axis", "axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
    AxisView v{1, shape[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
    return v;
}

// C[m x n] += A[m x k] * B[k x n]
inline void mm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m x n] += A[m x k] * B^T, B given as [n x k]
inline void mm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C[k x n] += A^T * B, A given as [m x k], B as [m x n]
inline void mm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic. `b` may either match `a` exactly or be a suffix of
// its shape (broadcast over the leading axes), which covers bias and
// per-feature scale vectors.

namespace detail {

inline bool suffix_broadcastable(const Shape& a, const Shape& b) {
    if (b.size() > a.size()) return false;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[b.size() - 1 - i] != a[a.size() - 1 - i]) return false;
    }
    return true;
}

enum class EwKind { add, sub, mul };

inline Tensor elementwise(const Tensor& a, const Tensor& b, EwKind kind, const char* opname) {
    if (!suffix_broadcastable(a.shape(), b.shape())) detail::shape_error(opname, a.shape(), b.shape());
    const std::size_t bs = b.size();
    const std::size_t repeats = a.size() / bs;

    std::vector<double> out(a.size());
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    for (std::size_t r = 0; r < repeats; ++r) {
        const double* ar = pa + r * bs;
        double* or_ = out.data() + r * bs;
        switch (kind) {
            case EwKind::add:
                for (std::size_t j = 0; j < bs; ++j) or_[j] = ar[j] + pb[j];
                break;
            case EwKind::sub:
                for (std::size_t j = 0; j < bs; ++j) or_[j] = ar[j] - pb[j];
                break;
            case EwKind::mul:
                for (std::size_t j = 0; j < bs; ++j) or_[j] = ar[j] * pb[j];
                break;
        }
    }
    Tensor result(a.shape(), std::move(out));
    detail::check_finite(result, opname);

    if (detail::taping({&a, &b})) {
        NodePtr an = a.node(), bn = b.node();
        detail::attach(result, {an, bn}, [an, bn, bs, repeats, kind](TensorNode& self) {
            const double* g = self.grad.data();
            if (an->requires_grad) {
                an->ensure_grad();
                double* ga = an->grad.data();
                if (kind == EwKind::mul) {
                    const double* pb = bn->data.data();
                    for (std::size_t r = 0; r < repeats; ++r)
                        for (std::size_t j = 0; j < bs; ++j) ga[r * bs + j] += g[r * bs + j] * pb[j];
                } else {
                    for (std::size_t i = 0; i < self.size(); ++i) ga[i] += g[i];
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                double* gb = bn->grad.data();
                const double* pa = an->data.data();
                for (std::size_t r = 0; r < repeats; ++r) {
                    for (std::size_t j = 0; j < bs; ++j) {
                        const double gij = g[r * bs + j];
                        switch (kind) {
                            case EwKind::add: gb[j] += gij; break;
                            case EwKind::sub: gb[j] -= gij; break;
                            case EwKind::mul: gb[j] += gij * pa[r * bs + j]; break;
                        }
                    }
                }
            }
        });
    }
    return result;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) { return detail::elementwise(a, b, detail::EwKind::add, "add"); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return detail::elementwise(a, b, detail::EwKind::sub, "sub"); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return detail::elementwise(a, b, detail::EwKind::mul, "mul"); }

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// Multiply by a compile-time constant; never needs a gradient of its own.
inline Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] * c;
    Tensor result(a.shape(), std::move(out));
    detail::check_finite(result, "scale");
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, c](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (std::size_t i = 0; i < self.size(); ++i) an->grad[i] += self.grad[i] * c;
        });
    }
    return result;
}

// ---------------------------------------------------------------------------
// matmul supports (m,k)x(k,n), (b,m,k)x(k,n) with shared rhs, and
// (b,m,k)x(b,k,n) batched.

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    const bool a3 = sa.size() == 3, b3 = sb.size() == 3;
    if (!((sa.size() == 2 && sb.size() == 2) || (a3 && sb.size() == 2) || (a3 && b3))) {
        detail::shape_error("matmul", sa, sb);
    }
    const std::size_t batch = a3 ? sa[0] : 1;
    const std::size_t m = a3 ? sa[1] : sa[0];
    const std::size_t k = a3 ? sa[2] : sa[1];
    const std::size_t kb = b3 ? sb[1] : sb[0];
    const std::size_t n = b3 ? sb[2] : sb[1];
    if (k != kb || (b3 && (!a3 || sb[0] != batch))) detail::shape_error("matmul", sa, sb);

    Shape out_shape = a3 ? Shape{batch, m, n} : Shape{m, n};
    std::vector<double> out(batch * m * n, 0.0);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    for (std::size_t bi = 0; bi < batch; ++bi) {
        detail::mm_nn(pa + bi * m * k, b3 ? pb + bi * k * n : pb, out.data() + bi * m * n, m, k, n);
    }
    Tensor result(std::move(out_shape), std::move(out));
    detail::check_finite(result, "matmul");

    if (detail::taping({&a, &b})) {
        NodePtr an = a.node(), bn = b.node();
        detail::attach(result, {an, bn}, [an, bn, batch, m, k, n, b3](TensorNode& self) {
            const double* g = self.grad.data();
            if (an->requires_grad) {
                an->ensure_grad();
                const double* pb = bn->data.data();
                for (std::size_t bi = 0; bi < batch; ++bi) {
                    // dA = dC * B^T
                    detail::mm_nt(g + bi * m * n, b3 ? pb + bi * k * n : pb, an->grad.data() + bi * m * k, m, n, k);
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                const double* pa = an->data.data();
                for (std::size_t bi = 0; bi < batch; ++bi) {
                    // dB = A^T * dC; accumulates over the batch for a shared rhs
                    detail::mm_tn(pa + bi * m * k, g + bi * m * n, bn->grad.data() + (b3 ? bi * k * n : 0), m, k, n);
                }
            }
        });
    }
    return result;
}

// ---------------------------------------------------------------------------

inline Tensor transpose_last(const Tensor& a) {
    if (a.rank() < 2) throw Error("bad_shape", "transpose_last needs rank >= 2, got " + shape_str(a.shape()));
    Shape out_shape = a.shape();
    const std::size_t r = out_shape.size();
    std::swap(out_shape[r - 2], out_shape[r - 1]);
    const std::size_t rows = a.shape()[r - 2], cols = a.shape()[r - 1];
    const std::size_t batch = a.size() / (rows * cols);

    std::vector<double> out(a.size());
    const double* pa = a.data().data();
    for (std::size_t bi = 0; bi < batch; ++bi) {
        const double* src = pa + bi * rows * cols;
        double* dst = out.data() + bi * rows * cols;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
    }
    Tensor result(std::move(out_shape), std::move(out));

    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, batch, rows, cols](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* g = self.grad.data();
            for (std::size_t bi = 0; bi < batch; ++bi) {
                const double* gsrc = g + bi * rows * cols;  // grad is cols x rows
                double* gdst = an->grad.data() + bi * rows * cols;
                for (std::size_t j = 0; j < cols; ++j)
                    for (std::size_t i = 0; i < rows; ++i) gdst[i * cols + j] += gsrc[j * rows + i];
            }
        });
    }
    return result;
}

inline Tensor reshape(const Tensor& a, Shape new_shape) {
    if (shape_numel(new_shape) != a.size()) {
        detail::shape_error("reshape", a.shape(), new_shape);
    }
    Tensor result(std::move(new_shape), a.data());
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            for (std::size_t i = 0; i < self.size(); ++i) an->grad[i] += self.grad[i];
        });
    }
    return result;
}

// ---------------------------------------------------------------------------

inline Tensor softmax(const Tensor& a, std::size_t axis) {
    const detail::AxisView v = detail::axis_view(a.shape(), axis);
    std::vector<double> out(a.size());
    const double* pa = a.data().data();
    for (std::size_t o = 0; o < v.outer; ++o) {
        for (std::size_t in = 0; in < v.inner; ++in) {
            const std::size_t base = o * v.n * v.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < v.n; ++l) mx = std::max(mx, pa[base + l * v.inner]);
            double denom = 0.0;
            for (std::size_t l = 0; l < v.n; ++l) {
                const double e = std::exp(pa[base + l * v.inner] - mx);
                out[base + l * v.inner] = e;
                denom += e;
            }
            for (std::size_t l = 0; l < v.n; ++l) out[base + l * v.inner] /= denom;
        }
    }
    Tensor result(a.shape(), std::move(out));
    detail::check_finite(result, "softmax");

    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, v](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* y = self.data.data();  // own output
            const double* g = self.grad.data();
            for (std::size_t o = 0; o < v.outer; ++o) {
                for (std::size_t in = 0; in < v.inner; ++in) {
                    const std::size_t base = o * v.n * v.inner + in;
                    double dot = 0.0;
                    for (std::size_t l = 0; l < v.n; ++l) {
                        const std::size_t idx = base + l * v.inner;
                        dot += g[idx] * y[idx];
                    }
                    for (std::size_t l = 0; l < v.n; ++l) {
                        const std::size_t idx = base + l * v.inner;
                        an->grad[idx] += y[idx] * (g[idx] - dot);
                    }
                }
            }
        });
    }
    return result;
}

// Normalizes over the last axis; affine scale/shift are separate parameters
// applied by the caller. A constant row maps to zeros through the eps term.
inline Tensor layernorm(const Tensor& a, double eps = 1e-5) {
    const std::size_t L = a.shape().back();
    const std::size_t rows = a.size() / L;
    std::vector<double> out(a.size());
    std::vector<double> inv_std(rows);
    const double* pa = a.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = pa + r * L;
        double mean = 0.0;
        for (std::size_t l = 0; l < L; ++l) mean += x[l];
        mean /= static_cast<double>(L);
        double var = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double d = x[l] - mean;
            var += d * d;
        }
        var /= static_cast<double>(L);
        const double s = 1.0 / std::sqrt(var + eps);
        inv_std[r] = s;
        for (std::size_t l = 0; l < L; ++l) out[r * L + l] = (x[l] - mean) * s;
    }
    Tensor result(a.shape(), std::move(out));
    detail::check_finite(result, "layernorm");

    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, rows, L, inv_std = std::move(inv_std)](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* y = self.data.data();  // own output
            const double* g = self.grad.data();
            const double invL = 1.0 / static_cast<double>(L);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* yr = y + r * L;
                const double* gr = g + r * L;
                double gmean = 0.0, gymean = 0.0;
                for (std::size_t l = 0; l < L; ++l) {
                    gmean += gr[l];
                    gymean += gr[l] * yr[l];
                }
                gmean *= invL;
                gymean *= invL;
                const double s = inv_std[r];
                double* ga = an->grad.data() + r * L;
                for (std::size_t l = 0; l < L; ++l) ga[l] += s * (gr[l] - gmean - yr[l] * gymean);
            }
        });
    }
    return result;
}

namespace detail {
inline constexpr double kInvSqrt2 = 0.7071067811865475244;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace detail

inline Tensor gelu(const Tensor& a) {
    std::vector<double> out(a.size());
    const double* pa = a.data().data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = 0.5 * pa[i] * (1.0 + std::erf(pa[i] * detail::kInvSqrt2));
    }
    Tensor result(a.shape(), std::move(out));
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* x = an->data.data();
            for (std::size_t i = 0; i < self.size(); ++i) {
                const double cdf = 0.5 * (1.0 + std::erf(x[i] * detail::kInvSqrt2));
                const double pdf = detail::kInvSqrt2Pi * std::exp(-0.5 * x[i] * x[i]);
                an->grad[i] += self.grad[i] * (cdf + x[i] * pdf);
            }
        });
    }
    return result;
}

inline Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    const double* pa = a.data().data();
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    Tensor result(a.shape(), std::move(out));
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* x = an->data.data();
            for (std::size_t i = 0; i < self.size(); ++i) {
                if (x[i] > 0.0) an->grad[i] += self.grad[i];
            }
        });
    }
    return result;
}

inline Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    Tensor result = Tensor::scalar(acc);
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double g = self.grad[0];
            for (double& v : an->grad) v += g;
        });
    }
    return result;
}

inline Tensor mean(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    const double inv = 1.0 / static_cast<double>(a.size());
    Tensor result = Tensor::scalar(acc * inv);
    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, inv](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double g = self.grad[0] * inv;
            for (double& v : an->grad) v += g;
        });
    }
    return result;
}

// Contiguous slice [start, start+len) along `axis`.
inline Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len) {
    const detail::AxisView v = detail::axis_view(a.shape(), axis);
    if (len == 0 || start + len > v.n) {
        throw Error("bad_slice", "slice [" + std::to_string(start) + "," + std::to_string(start + len) +
                                     ") out of range for axis " + std::to_string(axis) + " of " + shape_str(a.shape()));
    }
    Shape out_shape = a.shape();
    out_shape[axis] = len;
    std::vector<double> out(shape_numel(out_shape));
    const double* pa = a.data().data();
    for (std::size_t o = 0; o < v.outer; ++o) {
        const double* src = pa + (o * v.n + start) * v.inner;
        double* dst = out.data() + o * len * v.inner;
        std::copy(src, src + len * v.inner, dst);
    }
    Tensor result(std::move(out_shape), std::move(out));

    if (detail::taping({&a})) {
        NodePtr an = a.node();
        detail::attach(result, {an}, [an, v, start, len](TensorNode& self) {
            if (!an->requires_grad) return;
            an->ensure_grad();
            const double* g = self.grad.data();
            for (std::size_t o = 0; o < v.outer; ++o) {
                double* dst = an->grad.data() + (o * v.n + start) * v.inner;
                const double* src = g + o * len * v.inner;
                for (std::size_t i = 0; i < len * v.inner; ++i) dst[i] += src[i];
            }
        });
    }
    return result;
}

inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw Error("bad_concat", "concat of zero tensors");
    const Shape& first = parts[0].shape();
    std::size_t total = 0;
    for (const Tensor& p : parts) {
        if (p.rank() != first.size()) detail::shape_error("concat", first, p.shape());
        for (std::size_t i = 0; i < first.size(); ++i) {
            if (i != axis && p.shape()[i] != first[i]) detail::shape_error("concat", first, p.shape());
        }
        total += p.shape()[axis];
    }
    Shape out_shape = first;
    out_shape[axis] = total;
    const detail::AxisView v = detail::axis_view(out_shape, axis);

    std::vector<double> out(shape_numel(out_shape));
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        const std::size_t pn = p.shape()[axis];
        const double* src = p.data().data();
        for (std::size_t o = 0; o < v.outer; ++o) {
            std::copy(src + o * pn * v.inner, src + (o + 1) * pn * v.inner,
                      out.data() + (o * v.n + off) * v.inner);
        }
        off += pn;
    }
    Tensor result(std::move(out_shape), std::move(out));

    bool tape = false;
    if (detail::grad_mode()) {
        for (const Tensor& p : parts) tape = tape || p.requires_grad();
    }
    if (tape) {
        std::vector<NodePtr> nodes;
        std::vector<std::size_t> widths;
        nodes.reserve(parts.size());
        for (const Tensor& p : parts) {
            nodes.push_back(p.node());
            widths.push_back(p.shape()[axis]);
        }
        detail::attach(result, nodes, [nodes, widths, v](TensorNode& self) {
            const double* g = self.grad.data();
            std::size_t off = 0;
            for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
                const std::size_t pn = widths[pi];
                if (nodes[pi]->requires_grad) {
                    nodes[pi]->ensure_grad();
                    double* dst = nodes[pi]->grad.data();
                    for (std::size_t o = 0; o < v.outer; ++o) {
                        const double* src = g + (o * v.n + off) * v.inner;
                        for (std::size_t i = 0; i < pn * v.inner; ++i) dst[o * pn * v.inner + i] += src[i];
                    }
                }
                off += pn;
            }
        });
    }
    return result;
}

// ---------------------------------------------------------------------------

inline void Tensor::backward() const {
    if (!node_) throw Error("no_tensor", "backward() on an empty tensor");
    if (size() != 1) {
        throw Error("not_scalar", "backward() requires a scalar loss, got shape " + shape_str(shape()));
    }

    // Iterative DFS post-order topological sort.
    std::vector<TensorNode*> topo;
    std::unordered_set<TensorNode*> visited;
    std::vector<std::pair<TensorNode*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [cur, next_child] = stack.back();
        if (next_child < cur->parents.size()) {
            TensorNode* p = cur->parents[next_child].get();
            ++next_child;
            if (!visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            topo.push_back(cur);
            stack.pop_back();
        }
    }

    // Interior grads are scratch per backward pass; leaf grads accumulate.
    for (TensorNode* n : topo) {
        if (n->backward_fn) {
            n->grad.assign(n->data.size(), 0.0);
        }
    }
    node_->ensure_grad();
    node_->grad[0] = 1.0;

    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        TensorNode* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

}  // namespace tsad
