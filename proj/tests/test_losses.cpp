#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "tsad/losses.hpp"
#include "tsad/rng.hpp"

using namespace tsad;
using tsad::testsupport::max_grad_rel_error;

namespace {

Tensor random_seq(Rng& rng, std::size_t len, std::size_t dim, bool requires_grad = false) {
    Tensor t = Tensor::zeros({len, dim}, requires_grad);
    for (double& v : t.data()) v = rng.uniform(-2.0, 2.0);
    return t;
}

}  // namespace

TEST_CASE("mse of equal inputs is zero", "[losses]") {
    Tensor a({2, 2}, {1, 2, 3, 4});
    CHECK(mse_loss(a, a).item() == 0.0);
}

TEST_CASE("mse scalar and elementwise values", "[losses]") {
    Tensor y_hat({2}, {0.0, 0.0});
    Tensor y({2}, {1.0, 3.0});
    CHECK(mse_loss(y_hat, y).item() == Catch::Approx(5.0));
    Tensor e = mse_elementwise(y_hat, y);
    CHECK(e.data() == std::vector<double>{1.0, 9.0});
}

TEST_CASE("mse is homogeneous of degree two in the residual", "[losses]") {
    Tensor y({3}, {1.0, -2.0, 0.5});
    Tensor zero({3}, {0.0, 0.0, 0.0});
    Tensor y2({3}, {2.0, -4.0, 1.0});
    CHECK(mse_loss(y2, zero).item() == Catch::Approx(4.0 * mse_loss(y, zero).item()));
}

TEST_CASE("huber values and branch continuity", "[losses]") {
    Tensor zero({1}, {0.0});
    CHECK(huber_loss(zero, zero, 1.0).item() == 0.0);

    Tensor half({1}, {0.5});
    CHECK(huber_loss(half, zero, 1.0).item() == Catch::Approx(0.125));

    Tensor two({1}, {2.0});
    CHECK(huber_loss(two, zero, 1.0).item() == Catch::Approx(1.5));

    // both branches evaluate to delta^2/2 at |r| == delta
    const double delta = 0.7;
    Tensor at({1}, {delta});
    CHECK(huber_loss(at, zero, delta).item() == Catch::Approx(0.5 * delta * delta));
}

TEST_CASE("huber equals half squared error below delta", "[losses]") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double r = rng.uniform(-0.99, 0.99);
        Tensor p({1}, {r});
        Tensor t({1}, {0.0});
        CHECK(huber_loss(p, t, 1.0).item() == 0.5 * r * r);
    }
}

TEST_CASE("huber is C1 at the transition", "[losses]") {
    const double delta = 1.0, h = 1e-7;
    auto f = [&](double r) {
        Tensor p({1}, {r});
        Tensor t({1}, {0.0});
        return huber_loss(p, t, delta).item();
    };
    const double left = (f(delta) - f(delta - h)) / h;
    const double right = (f(delta + h) - f(delta)) / h;
    CHECK(std::abs(left - delta) < 1e-6);
    CHECK(std::abs(right - delta) < 1e-6);
}

TEST_CASE("hard dtw of identical sequences is zero", "[losses][softdtw]") {
    Rng rng(17);
    Tensor x = random_seq(rng, 4, 2);
    CHECK(softdtw(x, x, 0.0).item() == 0.0);
}

TEST_CASE("hard dtw single-cell value", "[losses][softdtw]") {
    Tensor x({1, 1}, {0.0});
    Tensor y({1, 1}, {3.0});
    CHECK(softdtw(x, y, 0.0).item() == Catch::Approx(9.0));
}

TEST_CASE("softdtw matches exhaustive path enumeration", "[losses][softdtw]") {
    Rng rng(23);
    for (std::size_t m = 1; m <= 4; ++m) {
        for (std::size_t n = 1; n <= 4; ++n) {
            Tensor x = random_seq(rng, m, 2);
            Tensor y = random_seq(rng, n, 2);
            const double got = softdtw(x, y, 1.0).item();
            const double want = tsad::testsupport::softdtw_bruteforce(tsad::testsupport::squared_cost(x, y), 1.0);
            CHECK(std::abs(got - want) < 1e-8);
        }
    }
}

TEST_CASE("softdtw is below hard dtw and decreasing in gamma", "[losses][softdtw]") {
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_seq(rng, 5, 2);
        Tensor y = random_seq(rng, 4, 2);
        const double hard = softdtw(x, y, 0.0).item();
        double prev = hard;
        for (double gamma : {0.01, 0.1, 0.5, 1.0, 2.0}) {
            const double soft = softdtw(x, y, gamma).item();
            CHECK(soft <= hard + 1e-12);
            CHECK(soft <= prev + 1e-12);
            prev = soft;
        }
    }
}

TEST_CASE("softdtw gradient matches finite differences", "[losses][softdtw][gradcheck]") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = random_seq(rng, 6, 2, true);
        Tensor y = random_seq(rng, 5, 2, false);
        ParamList params{{"x", x}};
        CHECK(max_grad_rel_error(params, [=] { return softdtw(x, y, 1.0); }) < 1e-4);
    }
    // gradient with respect to the second argument as well
    Tensor x = random_seq(rng, 4, 3, false);
    Tensor y = random_seq(rng, 4, 3, true);
    ParamList params{{"y", y}};
    CHECK(max_grad_rel_error(params, [=] { return softdtw(x, y, 0.5); }) < 1e-4);
}

TEST_CASE("softdtw rejects dimension mismatch and training at gamma zero", "[losses][softdtw]") {
    Tensor x({1, 2}, {0.0, 0.0}, true);
    Tensor bad({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(softdtw(x, bad, 1.0), Error);  // dim mismatch
    CHECK_THROWS_AS(softdtw(x, x, 0.0), Error);    // differentiable path needs gamma > 0
}

TEST_CASE("training losses are batch permutation equivariant", "[losses]") {
    Rng rng(37);
    Tensor pred = Tensor::zeros({4, 3, 2}, false);
    Tensor target = Tensor::zeros({4, 3, 2}, false);
    for (double& v : pred.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : target.data()) v = rng.uniform(-1.0, 1.0);

    // reverse the batch order
    auto permute = [](const Tensor& t) {
        const std::size_t stride = 6;
        std::vector<double> d = t.data();
        for (std::size_t b = 0; b < 4; ++b) {
            std::copy(t.data().begin() + b * stride, t.data().begin() + (b + 1) * stride,
                      d.begin() + (3 - b) * stride);
        }
        return Tensor(t.shape(), std::move(d));
    };
    Tensor pred_p = permute(pred);
    Tensor target_p = permute(target);

    for (LossKind kind : {LossKind::mse, LossKind::huber, LossKind::softdtw}) {
        LossSpec spec;
        spec.kind = kind;
        const double a = training_loss(spec, pred, target).item();
        const double b = training_loss(spec, pred_p, target_p).item();
        CHECK(std::abs(a - b) < 1e-12);
    }
}

TEST_CASE("softdtw training loss is normalized by window length", "[losses]") {
    Tensor pred({1, 2, 1}, {0.0, 0.0});
    Tensor target({1, 2, 1}, {1.0, 1.0});
    LossSpec spec;
    spec.kind = LossKind::softdtw;
    const double raw = softdtw(reshape(pred, {2, 1}), reshape(target, {2, 1}), 1.0).item();
    CHECK(training_loss(spec, pred, target).item() == Catch::Approx(raw / 2.0));
}
