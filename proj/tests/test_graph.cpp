#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "visa/errors.hpp"
#include "visa/graph.hpp"
#include "visa/rng.hpp"

using namespace visa;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat m(r, c);
    for (double& v : m.a) v = scale * rng.uniform(-1.0, 1.0);
    return m;
}

// Central finite differences of a scalar-graph builder with respect to one
// leaf matrix, compared against backward(). Builder receives the leaf value
// and must return the scalar loss node of a fresh graph.
double max_rel_err(const std::function<double(const Mat&)>& eval, const Mat& at,
                   const Mat& analytic, double eps = 1e-6) {
    double worst = 0.0;
    Mat x = at;
    for (size_t i = 0; i < x.a.size(); ++i) {
        double keep = x.a[i];
        x.a[i] = keep + eps;
        double up = eval(x);
        x.a[i] = keep - eps;
        double dn = eval(x);
        x.a[i] = keep;
        double fd = (up - dn) / (2.0 * eps);
        double an = analytic.a[i];
        double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("forward values of the elementwise ops") {
    Graph g;
    Mat x(1, 3, {-2.0, 0.5, 3.0});
    auto v = g.input(x);
    CHECK(g.value(g.relu(v))(0, 0) == 0.0);
    CHECK(g.value(g.relu(v))(0, 2) == 3.0);
    CHECK(g.value(g.tanh(v))(0, 1) == doctest::Approx(std::tanh(0.5)));
    CHECK(g.value(g.clamp(v, -1.0, 1.0))(0, 0) == -1.0);
    CHECK(g.value(g.clamp(v, -1.0, 1.0))(0, 2) == 1.0);
    CHECK(g.value(g.exp(v))(0, 1) == doctest::Approx(std::exp(0.5)));
    CHECK(g.value(g.scale(v, -2.0))(0, 2) == -6.0);
    CHECK(g.value(g.add_const(v, 1.5))(0, 0) == -0.5);
    // softplus stays finite and accurate at large inputs
    Mat big(1, 2, {40.0, -40.0});
    auto b = g.input(big);
    CHECK(g.value(g.softplus(b))(0, 0) == doctest::Approx(40.0));
    CHECK(g.value(g.softplus(b))(0, 1) == doctest::Approx(std::exp(-40.0)));
}

TEST_CASE("linear matches an explicit triple loop") {
    Rng rng(11);
    Mat x = random_mat(4, 3, rng), W = random_mat(5, 3, rng), b = random_mat(1, 5, rng);
    Graph g;
    auto y = g.linear(g.input(x), g.input(W), g.input(b));
    for (int i = 0; i < 4; ++i) {
        for (int o = 0; o < 5; ++o) {
            double want = b(0, o);
            for (int k = 0; k < 3; ++k) want += x(i, k) * W(o, k);
            CHECK(g.value(y)(i, o) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("row_logsumexp is max-shifted and exact") {
    Graph g;
    Mat s(2, 3, {1000.0, 999.0, 998.0, -5.0, -4.0, -3.0});
    auto l = g.row_logsumexp(g.input(s));
    // naive exp would overflow on row 0
    double want0 = 1000.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-2.0));
    double want1 = -3.0 + std::log(std::exp(-2.0) + std::exp(-1.0) + 1.0);
    CHECK(g.value(l)(0, 0) == doctest::Approx(want0).epsilon(1e-14));
    CHECK(g.value(l)(1, 0) == doctest::Approx(want1).epsilon(1e-14));
}

TEST_CASE("gradients of every op agree with finite differences") {
    Rng rng(42);
    // A composite touching linear, relu, tanh, clamp, softplus, exp, log,
    // scale, add/sub/mul, concat, slice, matmul_nt, row_dot, diag,
    // row_logsumexp, sum_cols, offdiag_mean and mean_all in one scalar.
    Mat x0 = random_mat(3, 4, rng);
    Rng wrng(7);
    Mat weights = random_mat(4, 4, wrng);
    auto build = [&](const Mat& x, Mat* sink) {
        Graph g;
        auto v = g.param(x, sink);
        auto w = g.input(weights);
        auto lin = g.linear(v, w, g.input(Mat(1, 4)));
        auto h = g.add(g.relu(lin), g.tanh(g.scale(lin, 0.5)));
        auto h2 = g.mul(g.clamp(h, -0.8, 0.8), g.softplus(g.sub(h, g.scale(h, 2.0))));
        auto cat = g.concat_cols(h2, g.exp(g.scale(h2, 0.1)));
        auto sl = g.slice_cols(cat, 2, 4);
        auto scores = g.matmul_nt(sl, sl);
        auto lse = g.row_logsumexp(scores);
        auto d = g.diag(scores);
        auto rd = g.row_dot(sl, sl);
        auto lg = g.log(g.add_const(g.mul(rd, rd), 1.0));
        auto parts = g.add(g.sub(d, lse), g.add(lg, g.sum_cols(sl)));
        auto loss = g.add(g.mean_all(parts), g.scale(g.offdiag_mean(scores), 0.3));
        return std::pair<Graph, Graph::Value>(std::move(g), loss);
    };

    Mat grad(3, 4);
    {
        auto [g, loss] = build(x0, &grad);
        g.backward(loss);
    }
    auto eval = [&](const Mat& x) {
        auto [g, loss] = build(x, nullptr);
        return g.scalar(loss);
    };
    CHECK(max_rel_err(eval, x0, grad) < 1e-6);
}

TEST_CASE("gather_cols picks one entry per row and routes gradient there") {
    Graph g;
    Mat s(3, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) s(i, j) = 10.0 * i + j;
    Mat grad(3, 4);
    auto v = g.param(s, &grad);
    auto picked = g.gather_cols(v, {2, 0, 3});
    CHECK(g.value(picked)(0, 0) == 2.0);
    CHECK(g.value(picked)(1, 0) == 10.0);
    CHECK(g.value(picked)(2, 0) == 23.0);
    g.backward(g.mean_all(picked));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            double want = (j == std::vector<int>{2, 0, 3}[i]) ? 1.0 / 3.0 : 0.0;
            CHECK(grad(i, j) == doctest::Approx(want));
        }
}

TEST_CASE("detach blocks gradient but passes value") {
    Graph g;
    Mat x(1, 2, {3.0, -1.0});
    Mat grad(1, 2);
    auto v = g.param(x, &grad);
    auto d = g.detach(v);
    CHECK(g.value(d)(0, 0) == 3.0);
    // loss = mean(v * detach(v)): gradient is detach(v)/2, not 2v/2
    auto loss = g.mean_all(g.mul(v, d));
    g.backward(loss);
    CHECK(grad(0, 0) == doctest::Approx(1.5));
    CHECK(grad(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("frozen params (null sink) contribute no gradient and no crash") {
    Graph g;
    Mat x(1, 2, {1.0, 2.0});
    Mat grad(1, 2);
    auto a = g.param(x, &grad);
    auto b = g.param(x, nullptr);
    g.backward(g.mean_all(g.mul(a, b)));
    CHECK(grad(0, 0) == doctest::Approx(0.5));
    CHECK(grad(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("non-finite forward values are rejected at the producing node") {
    Graph g;
    Mat x(1, 1, {0.0});
    auto v = g.input(x);
    CHECK_THROWS_AS(g.log(v), NumericError);
    Mat big(1, 1, {1e308});
    CHECK_THROWS_AS(g.exp(g.input(big)), NumericError);
}

TEST_CASE("gradient accumulates across multiple uses of one param") {
    Graph g;
    Mat x(1, 1, {2.0});
    Mat grad(1, 1);
    auto v = g.param(x, &grad);
    auto loss = g.mean_all(g.add(g.mul(v, v), g.scale(v, 3.0)));  // x^2 + 3x
    g.backward(loss);
    CHECK(grad(0, 0) == doctest::Approx(2.0 * 2.0 + 3.0));
}
