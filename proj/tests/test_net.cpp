#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"

using namespace cornet;
using test_helpers::fd_gradients;
using test_helpers::max_rel_gradient_error;

namespace {

LayerStack stack_from(const std::vector<std::size_t>& dims, const std::vector<Matrix>& ws,
                      Activation out = Activation::identity) {
    LayerStack s;
    s.layer_dims = dims;
    s.weights = ws;
    s.output_activation = out;
    s.validate();
    return s;
}

Matrix mat(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Matrix m(r, c);
    std::copy(vals.begin(), vals.end(), m.a.begin());
    return m;
}

}  // namespace

TEST_CASE("forward: zero weights annihilate any input") {
    auto s = stack_from({2, 3, 2}, {Matrix(3, 2), Matrix(2, 3)});
    const Vec out = forward(s, Vec{1.7, -0.4});
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward: single identity layer is the identity map") {
    auto s = stack_from({2, 2}, {mat(2, 2, {1, 0, 0, 1})});
    const Vec out = forward(s, Vec{1.5, -2.0});
    CHECK(out[0] == 1.5);
    CHECK(out[1] == -2.0);
}

TEST_CASE("forward: tanh oddness cancels symmetric two-unit net") {
    // 1 -> 2 -> 1, W1 = [[1],[-1]], W2 = [[0.5, 0.5]]
    auto s = stack_from({1, 2, 1}, {mat(2, 1, {1, -1}), mat(1, 2, {0.5, 0.5})});
    const Vec out = forward(s, Vec{0.3});
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("forward: dimension mismatch raises a shape error") {
    auto s = stack_from({2, 2}, {mat(2, 2, {1, 0, 0, 1})});
    CHECK_THROWS_AS((void)forward(s, Vec{1.0, 2.0, 3.0}), shape_error);
}

TEST_CASE("forward is pure: identical inputs give bit-identical outputs") {
    Rng rng = make_rng(11);
    auto s = make_stack({5, 7, 3}, Activation::identity, rng);
    const Vec x = {0.3, -1.2, 0.9, 2.2, -0.1};
    const Vec a = forward(s, x);
    const Vec b = forward(s, x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("hidden tanh outputs are bounded by 1") {
    Rng rng = make_rng(5);
    auto s = make_stack({4, 6, 6}, Activation::identity, rng);
    // expose the last hidden layer by appending an identity readout
    Matrix eye(6, 6);
    for (int i = 0; i < 6; ++i) eye(i, i) = 1.0;
    s.weights.back() = eye;  // last layer maps tanh activations straight out
    for (int trial = 0; trial < 20; ++trial) {
        Vec x(4);
        for (double& v : x) v = draw_gaussian(rng, 0.0, 3.0);
        for (double v : forward(s, x)) CHECK(std::abs(v) <= 1.0);
    }
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    Rng rng = make_rng(3);
    auto s = make_stack({3, 4, 2}, Activation::identity, rng);
    const GradientSet g = backward(s, Vec{0.1, 0.2, 0.3}, Vec{0.0, 0.0});
    for (const auto& m : g.g)
        for (double v : m.a) CHECK(v == 0.0);
}

TEST_CASE("backward: single linear layer gradient is the outer product") {
    auto s = stack_from({2, 2}, {mat(2, 2, {0.5, -1.0, 2.0, 0.25})});
    const Vec x = {1.5, -0.5};
    const Vec up = {2.0, -3.0};
    const GradientSet g = backward(s, x, up);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(g.g[0](i, j) == doctest::Approx(up[i] * x[j]).epsilon(1e-14));
}

TEST_CASE("backward matches central finite differences on a 3-4-2 tanh net") {
    Rng rng = make_rng(17);
    auto s = make_stack({3, 4, 2}, Activation::identity, rng);
    Vec x(3), up(2);
    for (double& v : x) v = draw_gaussian(rng);
    for (double& v : up) v = draw_gaussian(rng);
    const GradientSet g = backward(s, x, up);
    const GradientSet fd = fd_gradients(s, x, up);
    CHECK(max_rel_gradient_error(g, fd) < 1e-4);
}

TEST_CASE("backward matches finite differences: 100 random nets, dims <= 8") {
    Rng rng = make_rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(1, 8);
        std::uniform_int_distribution<int> depth(1, 3);
        std::vector<std::size_t> dims;
        const int layers = depth(rng);
        for (int k = 0; k <= layers; ++k) dims.push_back(dim(rng));
        const Activation act = trial % 3 == 2 ? Activation::sigmoid : Activation::identity;
        auto s = make_stack(dims, act, rng);
        Vec x(dims.front()), up(dims.back());
        for (double& v : x) v = draw_gaussian(rng);
        for (double& v : up) v = draw_gaussian(rng);
        worst = std::max(worst, max_rel_gradient_error(backward(s, x, up), fd_gradients(s, x, up)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("reverse_gradient basics") {
    const Vec a = reverse_gradient(Vec{1.0, -2.0}, 1.0);
    CHECK(a[0] == -1.0);
    CHECK(a[1] == 2.0);
    const Vec b = reverse_gradient(Vec{5.0, -7.0, 0.1}, 0.0);
    for (double v : b) CHECK(v == 0.0);
    const Vec c = reverse_gradient(Vec{0.4}, 2.5);
    CHECK(c[0] == doctest::Approx(-1.0));
}

TEST_CASE("reverse_gradient twice with scale 1 is the identity") {
    Rng rng = make_rng(8);
    Vec g(6);
    for (double& v : g) v = draw_gaussian(rng);
    const Vec twice = reverse_gradient(reverse_gradient(g, 1.0), 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(twice[i] == g[i]);
}

TEST_CASE("adam_step: zero gradients leave weights unchanged") {
    Rng rng = make_rng(21);
    auto s = make_stack({3, 3}, Activation::identity, rng);
    const auto before = s.weights[0].a;
    auto st = OptimizerState::init(s);
    adam_step(st, GradientSet::zeros_like(s), s);
    CHECK(s.weights[0].a == before);
    CHECK(st.step_count == 1);
}

TEST_CASE("adam_step: zero learning rate freezes weights but moments accumulate") {
    Rng rng = make_rng(22);
    auto s = make_stack({2, 2}, Activation::identity, rng);
    const auto before = s.weights[0].a;
    auto st = OptimizerState::init(s, 0.0);
    GradientSet g = GradientSet::zeros_like(s);
    g.g[0].fill(1.0);
    adam_step(st, g, s);
    CHECK(s.weights[0].a == before);
    CHECK(st.first_moment[0].a[0] > 0.0);
    CHECK(st.second_moment[0].a[0] > 0.0);
}

TEST_CASE("adam_step: positive gradient decreases a scalar weight") {
    LayerStack s;
    s.layer_dims = {1, 1};
    s.weights = {mat(1, 1, {1.0})};
    auto st = OptimizerState::init(s, 0.1);
    GradientSet g = GradientSet::zeros_like(s);
    g.g[0](0, 0) = 1.0;
    adam_step(st, g, s);
    CHECK(s.weights[0](0, 0) < 1.0);
}

TEST_CASE("adam_step: non-finite gradients abort with a numeric error") {
    Rng rng = make_rng(23);
    auto s = make_stack({2, 2}, Activation::identity, rng);
    auto st = OptimizerState::init(s);
    GradientSet g = GradientSet::zeros_like(s);
    g.g[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(st, g, s), numeric_error);
}

TEST_CASE("batch backward sums the per-sample gradients") {
    Rng rng = make_rng(31);
    auto s = make_stack({3, 5, 2}, Activation::identity, rng);
    Matrix xb(4, 3), dz(4, 2);
    for (double& v : xb.a) v = draw_gaussian(rng);
    for (double& v : dz.a) v = draw_gaussian(rng);
    ForwardCache cache = forward_batch(s, xb);
    const GradientSet batch = backward_batch(s, cache, dz);
    GradientSet acc = GradientSet::zeros_like(s);
    for (std::size_t i = 0; i < 4; ++i) {
        Vec x(xb.row(i).begin(), xb.row(i).end());
        Vec up(dz.row(i).begin(), dz.row(i).end());
        acc.add_scaled(backward(s, x, up), 1.0);
    }
    CHECK(max_rel_gradient_error(batch, acc) < 1e-10);
}

TEST_CASE("batch forward agrees with the single-sample path") {
    Rng rng = make_rng(32);
    auto s = make_stack({4, 6, 3}, Activation::sigmoid, rng);
    Matrix xb(5, 4);
    for (double& v : xb.a) v = draw_gaussian(rng);
    const Matrix out = cache_outputs(s, forward_batch(s, xb));
    for (std::size_t i = 0; i < 5; ++i) {
        const Vec single = forward(s, xb.row(i));
        for (std::size_t j = 0; j < 3; ++j) CHECK(out(i, j) == doctest::Approx(single[j]).epsilon(1e-14));
    }
}

TEST_CASE("stack serialization round-trips exactly") {
    Rng rng = make_rng(77);
    auto s = make_stack({3, 5, 2}, Activation::sigmoid, rng);
    std::stringstream ss;
    save_stack(ss, s);
    const LayerStack r = load_stack(ss);
    CHECK(r.layer_dims == s.layer_dims);
    CHECK(r.output_activation == s.output_activation);
    for (std::size_t k = 0; k < s.weights.size(); ++k) CHECK(r.weights[k].a == s.weights[k].a);
}
