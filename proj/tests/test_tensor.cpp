#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/gradcheck.hpp"
#include "tsad/optim.hpp"
#include "tsad/rng.hpp"
#include "tsad/tensor.hpp"

using namespace tsad;
using tsad::testsupport::max_grad_rel_error;

namespace {

Tensor random_tensor(Rng& rng, Shape shape, bool requires_grad = true) {
    Tensor t = Tensor::zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

TEST_CASE("matmul matches hand multiplication", "[tensor]") {
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor b({2, 1}, {1, 1});
    Tensor c = matmul(a, b);
    REQUIRE(c.shape() == Shape{2, 1});
    CHECK(c.at({0, 0}) == 3.0);
    CHECK(c.at({1, 0}) == 7.0);
}

TEST_CASE("matmul batched and shared-rhs forms", "[tensor]") {
    Rng rng(7);
    Tensor a = random_tensor(rng, {3, 2, 4}, false);
    Tensor w = random_tensor(rng, {4, 5}, false);
    Tensor c = matmul(a, w);
    REQUIRE(c.shape() == Shape{3, 2, 5});
    // batch slice equals the 2-D product of that slice
    for (std::size_t bi = 0; bi < 3; ++bi) {
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                double acc = 0.0;
                for (std::size_t p = 0; p < 4; ++p) acc += a.at({bi, i, p}) * w.at({p, j});
                CHECK(c.at({bi, i, j}) == Catch::Approx(acc).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("shape mismatch raises a structured error", "[tensor]") {
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b({2, 2}, {1, 2, 3, 4});
    try {
        matmul(a, b);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "shape_mismatch");
        CHECK(std::string(e.what()).find("(2,3)") != std::string::npos);
        CHECK(std::string(e.what()).find("(2,2)") != std::string::npos);
    }
    CHECK_THROWS_AS(add(a, b), Error);
}

TEST_CASE("softmax of a singleton is 1", "[tensor]") {
    Tensor x({1}, {3.7});
    CHECK(softmax(x, 0).item() == 1.0);
}

TEST_CASE("softmax rows sum to 1", "[tensor]") {
    Rng rng(11);
    Tensor x = random_tensor(rng, {4, 6}, false);
    Tensor y = softmax(x, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 6; ++j) s += y.at({i, j});
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax over a non-trailing axis", "[tensor]") {
    Tensor x({2, 2}, {1.0, 5.0, 3.0, 5.0});
    Tensor y = softmax(x, 0);
    // column 0: softmax(1, 3); column 1: softmax(5, 5) = (0.5, 0.5)
    const double e0 = std::exp(1.0), e1 = std::exp(3.0);
    CHECK(y.at({0, 0}) == Catch::Approx(e0 / (e0 + e1)).epsilon(1e-12));
    CHECK(y.at({1, 0}) == Catch::Approx(e1 / (e0 + e1)).epsilon(1e-12));
    CHECK(y.at({0, 1}) == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("layernorm of a constant vector is zero", "[tensor]") {
    Tensor x({1, 4}, {2.5, 2.5, 2.5, 2.5});
    Tensor y = layernorm(x);
    for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("layernorm output statistics", "[tensor]") {
    Rng rng(13);
    Tensor x = random_tensor(rng, {5, 16}, false);
    for (double& v : x.data()) v *= 10.0;  // row variance well above eps
    Tensor y = layernorm(x);
    for (std::size_t r = 0; r < 5; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::size_t l = 0; l < 16; ++l) mean += y.at({r, l});
        mean /= 16.0;
        for (std::size_t l = 0; l < 16; ++l) var += (y.at({r, l}) - mean) * (y.at({r, l}) - mean);
        var /= 16.0;
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("backward of sum gives ones", "[tensor]") {
    Tensor w({3}, {1.0, -2.0, 0.5}, true);
    Tensor loss = sum(w);
    loss.backward();
    for (double g : w.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of sum of squares", "[tensor]") {
    Tensor w({2}, {1.0, 2.0}, true);
    Tensor loss = sum(mul(w, w));
    loss.backward();
    CHECK(w.grad()[0] == Catch::Approx(2.0));
    CHECK(w.grad()[1] == Catch::Approx(4.0));
}

TEST_CASE("backward requires a scalar loss", "[tensor]") {
    Tensor w({2}, {1.0, 2.0}, true);
    Tensor y = mul(w, w);
    CHECK_THROWS_AS(y.backward(), Error);
}

TEST_CASE("repeated backward accumulates until zero_grad", "[tensor]") {
    Tensor w({2}, {1.0, 2.0}, true);
    Tensor loss = sum(mul(w, w));
    loss.backward();
    loss.backward();
    CHECK(w.grad()[0] == Catch::Approx(4.0));
    CHECK(w.grad()[1] == Catch::Approx(8.0));
    w.zero_grad();
    loss.backward();
    CHECK(w.grad()[0] == Catch::Approx(2.0));
}

TEST_CASE("gradients match finite differences per op", "[tensor][gradcheck]") {
    Rng rng(101);
    auto check = [&](const char* tag, ParamList params, std::function<Tensor()> loss_fn) {
        INFO(tag);
        CHECK(max_grad_rel_error(params, loss_fn) < 1e-4);
    };

    {
        Tensor a = random_tensor(rng, {3, 4});
        Tensor b = random_tensor(rng, {4, 2});
        check("matmul", {{"a", a}, {"b", b}}, [=] { return sum(matmul(a, b)); });
    }
    {
        Tensor a = random_tensor(rng, {2, 3, 4});
        Tensor w = random_tensor(rng, {4, 3});
        check("matmul shared rhs", {{"a", a}, {"w", w}},
              [=] { return mean(mul(matmul(a, w), matmul(a, w))); });
    }
    {
        Tensor a = random_tensor(rng, {2, 2, 3});
        Tensor b = random_tensor(rng, {2, 3, 2});
        check("matmul batched", {{"a", a}, {"b", b}}, [=] { return sum(matmul(a, b)); });
    }
    {
        Tensor a = random_tensor(rng, {2, 5});
        Tensor bias = random_tensor(rng, {5});
        check("broadcast add", {{"a", a}, {"bias", bias}},
              [=] { return sum(mul(add(a, bias), add(a, bias))); });
    }
    {
        Tensor a = random_tensor(rng, {4, 3});
        Tensor b = random_tensor(rng, {4, 3});
        check("sub+mul", {{"a", a}, {"b", b}}, [=] { return mean(mul(sub(a, b), sub(a, b))); });
    }
    {
        Tensor a = random_tensor(rng, {2, 3, 4});
        check("transpose", {{"a", a}}, [=] {
            Tensor t = transpose_last(a);
            return sum(mul(t, t));
        });
    }
    {
        Tensor a = random_tensor(rng, {3, 5});
        Tensor w = random_tensor(rng, {5});
        check("softmax", {{"a", a}, {"w", w}}, [=] { return sum(mul(softmax(a, 1), w)); });
    }
    {
        Tensor a = random_tensor(rng, {2, 6});
        Tensor w = random_tensor(rng, {6});
        check("layernorm", {{"a", a}, {"w", w}}, [=] { return sum(mul(layernorm(a), w)); });
    }
    {
        Tensor a = random_tensor(rng, {3, 4});
        check("gelu", {{"a", a}}, [=] { return sum(gelu(a)); });
    }
    {
        Tensor a = random_tensor(rng, {3, 4});
        check("relu", {{"a", a}}, [=] { return sum(mul(relu(a), relu(a))); });
    }
    {
        Tensor a = random_tensor(rng, {2, 4, 3});
        check("slice", {{"a", a}}, [=] {
            Tensor s = slice(a, 1, 1, 2);
            return sum(mul(s, s));
        });
    }
    {
        Tensor a = random_tensor(rng, {2, 3});
        Tensor b = random_tensor(rng, {2, 2});
        check("concat", {{"a", a}, {"b", b}}, [=] {
            Tensor c = concat({a, b}, 1);
            return sum(mul(c, c));
        });
    }
    {
        Tensor a = random_tensor(rng, {2, 6});
        check("reshape+scale", {{"a", a}}, [=] {
            Tensor r = reshape(scale(a, 2.5), {3, 4});
            return mean(mul(r, r));
        });
    }
    {
        // composite graph touching most ops at once
        Tensor x = random_tensor(rng, {2, 3, 4});
        Tensor w1 = random_tensor(rng, {4, 4});
        Tensor b1 = random_tensor(rng, {4});
        check("composite", {{"x", x}, {"w1", w1}, {"b1", b1}}, [=] {
            Tensor h = gelu(add(matmul(x, w1), b1));
            Tensor attn = softmax(matmul(h, transpose_last(h)), 2);
            Tensor out = layernorm(matmul(attn, h));
            return mean(mul(out, out));
        });
    }
}

TEST_CASE("gradient does not flow into constants", "[tensor]") {
    Tensor w({2}, {1.0, 2.0}, true);
    Tensor c({2}, {3.0, 4.0});
    Tensor loss = sum(mul(w, c));
    loss.backward();
    CHECK(w.grad()[0] == 3.0);
    CHECK_FALSE(c.has_grad());
}

TEST_CASE("NoGradGuard suppresses taping", "[tensor]") {
    Tensor w({2}, {1.0, 2.0}, true);
    Tensor y = [&] {
        NoGradGuard ng;
        return sum(mul(w, w));
    }();
    y.backward();  // no recorded graph: nothing flows back to w
    CHECK_FALSE(w.has_grad());
}

TEST_CASE("non-finite op output raises in checked builds", "[tensor]") {
    Tensor big = Tensor::full({2}, 1e308);
    CHECK_THROWS_AS(add(big, big), Error);
}

TEST_CASE("adam first step has magnitude close to lr", "[optim]") {
    Rng rng(5);
    Tensor w = random_tensor(rng, {4, 4});
    w.set_requires_grad(true);
    ParamList params{{"w", w}};
    AdamState state = AdamState::for_params(params, 1e-4);

    Tensor shift = Tensor::full({4, 4}, 1.0);
    std::vector<double> before = w.data();
    Tensor loss = mean(mul(add(w, shift), add(w, shift)));
    loss.backward();
    adam_step(params, state);
    CHECK(state.step_count == 1);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double delta = std::abs(w.data()[i] - before[i]);
        CHECK(std::abs(delta - 1e-4) < 1e-6);
    }
}

TEST_CASE("adam with zero gradient leaves parameters unchanged", "[optim]") {
    Tensor w({3}, {1.0, 2.0, 3.0}, true);
    ParamList params{{"w", w}};
    AdamState state = AdamState::for_params(params);
    w.grad();  // allocate zero gradient buffer
    adam_step(params, state);
    CHECK(w.data() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("adam steps move opposite to a constant gradient", "[optim]") {
    Tensor w({2}, {0.5, -0.5}, true);
    ParamList params{{"w", w}};
    AdamState state = AdamState::for_params(params, 1e-2);
    for (int step = 0; step < 2; ++step) {
        zero_grads(params);
        std::vector<double>& g = w.grad();
        g[0] = 2.0;
        g[1] = -3.0;
        adam_step(params, state);
    }
    CHECK(state.step_count == 2);
    CHECK(w.data()[0] < 0.5);
    CHECK(w.data()[1] > -0.5);
}

TEST_CASE("adam reports the parameter missing a gradient", "[optim]") {
    Tensor w({2}, {1.0, 2.0}, true);
    ParamList params{{"encoder.weight", w}};
    AdamState state = AdamState::for_params(params);
    try {
        adam_step(params, state);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("encoder.weight") != std::string::npos);
    }
}

TEST_CASE("same seed gives identical weight streams", "[rng]") {
    Rng a(42), b(42);
    Tensor ta = init_weights(a, {3, 5});
    Tensor tb = init_weights(b, {3, 5});
    CHECK(ta.data() == tb.data());

    Rng c(43);
    Tensor tc = init_weights(c, {3, 5});
    CHECK(ta.data() != tc.data());
}

TEST_CASE("xavier bound for a 4x4 shape", "[rng]") {
    Rng rng(1);
    const double bound = std::sqrt(6.0 / 8.0);
    Tensor t = init_weights(rng, {4, 4});
    double lo = 1e9, hi = -1e9;
    for (double v : t.data()) {
        CHECK(std::abs(v) <= bound);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // with 16 samples both halves of the interval should be visited
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
}

TEST_CASE("rng uniform and normal are deterministic and sane", "[rng]") {
    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
    Rng c(10);
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) acc += c.normal();
    CHECK(std::abs(acc / 10000.0) < 0.05);
}

TEST_CASE("rng shuffle is a permutation", "[rng]") {
    Rng rng(77);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(v);
    std::vector<int> s = v;
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}
