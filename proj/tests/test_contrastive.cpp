#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "visa/contrastive.hpp"
#include "visa/errors.hpp"

using namespace visa;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat m(r, c);
    for (size_t i = 0; i < m.size(); ++i) m.a[i] = scale * rng.normal();
    return m;
}

Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Small batch with every field build_score_nodes touches.
ContrastiveBatch random_batch(int B, int state_dim, int action_dim, Rng& rng, bool with_aug) {
    ContrastiveBatch b;
    b.anchor_state = random_mat(B, state_dim, rng);
    b.anchor_action = random_mat(B, action_dim, rng);
    b.visited = random_mat(B, state_dim, rng);
    b.goal = random_mat(B, state_dim, rng);
    if (with_aug) {
        b.augmented = random_mat(B, state_dim, rng);
        b.has_aug = true;
    }
    return b;
}

std::vector<Mat> flatten(const EncoderSet& e) {
    std::vector<Mat> out;
    for (const ParamSet* p : {&e.psi, &e.phi, &e.phi_hat})
        for (const Mat* m : mat_refs(*p)) out.push_back(*m);
    return out;
}

EncoderSet unflatten(const EncoderSet& proto, const std::vector<Mat>& mats) {
    EncoderSet e = proto;
    size_t idx = 0;
    for (ParamSet* p : {&e.psi, &e.phi, &e.phi_hat})
        for (Mat* m : mat_refs(*p)) *m = mats.at(idx++);
    return e;
}

using LossBuilder = std::function<Graph::Value(Graph&, const ScoreNodes&)>;

double eval_loss(const EncoderSet& enc, const ContrastiveBatch& batch, EncoderSet* grads,
                 const LossBuilder& build) {
    Graph g;
    ScoreNodes nodes = build_score_nodes(g, enc, grads, batch);
    Graph::Value loss = build(g, nodes);
    if (grads) g.backward(loss);
    return g.scalar(loss);
}

double fd_error(const EncoderSet& enc, const ContrastiveBatch& batch, const LossBuilder& build) {
    EncoderSet grads = zeros_like(enc);
    eval_loss(enc, batch, &grads, build);
    auto loss_fn = [&](const std::vector<Mat>& mats) {
        EncoderSet e = unflatten(enc, mats);
        return eval_loss(e, batch, nullptr, build);
    };
    return finite_diff_check(loss_fn, flatten(enc), flatten(grads), 1e-5);
}

}  // namespace

TEST_CASE("method and convention tags parse and print") {
    for (auto s : {"visa", "crl_cpc", "crl_nce", "only_augment"})
        CHECK(to_string(parse_method(s)) == s);
    CHECK_THROWS_AS(parse_method("sac"), ConfigError);
    for (auto s : {"prose", "literal"})
        CHECK(to_string(parse_safe_convention(s)) == s);
    CHECK_THROWS_AS(parse_safe_convention(""), ConfigError);
}

TEST_CASE("init_encoders wires the three input widths") {
    Rng rng(5);
    EncoderSet e = init_encoders(3, 2, 8, {16}, rng);
    CHECK(e.psi.layers[0].W.cols == 5);      // state + action
    CHECK(e.phi.layers[0].W.cols == 3);      // state
    CHECK(e.phi_hat.layers[0].W.cols == 6);  // visited + augmented
    for (const ParamSet* p : {&e.psi, &e.phi, &e.phi_hat}) {
        CHECK(p->layers.back().W.rows == 8);
    }
    CHECK_THROWS_AS(init_encoders(3, 2, 0, {16}, rng), ConfigError);
}

TEST_CASE("estimators reproduce hand-computed reference values") {
    Mat eye = identity(2);
    CHECK(std::abs(infonce_objective(eye) - (-0.3132616875182228)) < 1e-15);
    CHECK(std::abs(infonce_mi_estimate(eye) - 0.3798854930417225) < 1e-15);
    CHECK(club_estimate(eye) == doctest::Approx(1.0).epsilon(1e-15));

    Mat s(2, 2);
    s(0, 0) = 2.0; s(0, 1) = -2.0;
    s(1, 0) = -2.0; s(1, 1) = 2.0;
    CHECK(std::abs(binary_nce_objective(s) - (-0.25385602208594515)) < 1e-15);

    // all-equal scores: infonce and bo sit at -log B, club at zero
    CriticScores uniform;
    uniform.s_v = Mat(4, 4);
    uniform.s_full = Mat(4, 4);
    uniform.has_full = true;
    CHECK(std::abs(safe_loss(uniform, SafeConvention::prose, 1.0) - 2.772588722239781) < 1e-14);
    CHECK(std::abs(safe_loss(uniform, SafeConvention::literal, 1.0) - 0.0) < 1e-14);
    CHECK(std::abs(bo_estimate(uniform) - (-std::log(4.0))) < 1e-15);
}

TEST_CASE("infonce is shift-invariant, non-positive, and capped at log B") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Mat s = random_mat(8, 8, rng, 3.0);
        double obj = infonce_objective(s);
        CHECK(obj <= 1e-12);
        CHECK(infonce_mi_estimate(s) <= std::log(8.0) + 1e-12);
        Mat shifted = s;
        for (size_t i = 0; i < shifted.size(); ++i) shifted.a[i] += 7.5;
        CHECK(infonce_objective(shifted) == doctest::Approx(obj).epsilon(1e-12));
    }
}

TEST_CASE("estimators reject non-square or tiny score matrices") {
    CHECK_THROWS_AS(infonce_objective(Mat(2, 3)), InputError);
    CHECK_THROWS_AS(infonce_objective(Mat(1, 1)), InputError);
    CHECK_THROWS_AS(binary_nce_objective(Mat(3, 2)), InputError);
    CHECK_THROWS_AS(club_estimate(Mat(1, 1)), InputError);
}

TEST_CASE("score_matrices equals explicit per-pair encoder dot products") {
    Rng rng(23);
    EncoderSet enc = init_encoders(3, 2, 6, {8}, rng);
    ContrastiveBatch batch = random_batch(5, 3, 2, rng, true);
    CriticScores sc = score_matrices(enc, batch);
    REQUIRE(sc.has_full);
    REQUIRE(sc.s_v.rows == 5);
    for (int i = 0; i < 5; ++i) {
        Vec sa(batch.anchor_state.row(i), batch.anchor_state.row(i) + 3);
        sa.insert(sa.end(), batch.anchor_action.row(i), batch.anchor_action.row(i) + 2);
        Vec psi = mlp_forward(enc.psi, sa);
        for (int j = 0; j < 5; ++j) {
            Vec phi = mlp_forward(enc.phi, Vec(batch.visited.row(j), batch.visited.row(j) + 3));
            Vec pair(batch.visited.row(j), batch.visited.row(j) + 3);
            pair.insert(pair.end(), batch.augmented.row(j), batch.augmented.row(j) + 3);
            Vec ph = mlp_forward(enc.phi_hat, pair);
            double sv = 0.0, boost = 0.0;
            for (int d = 0; d < 6; ++d) {
                sv += psi[d] * phi[d];
                boost += psi[d] * ph[d];
            }
            CHECK(sc.s_v(i, j) == doctest::Approx(sv).epsilon(1e-12));
            CHECK(sc.s_full(i, j) == doctest::Approx(sv + boost).epsilon(1e-12));
        }
    }
}

TEST_CASE("q_value is the psi/phi inner product") {
    Rng rng(29);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    Vec s{0.3, -0.7}, a{0.5}, g{-0.2, 0.9};
    Vec psi = mlp_forward(enc.psi, Vec{0.3, -0.7, 0.5});
    Vec phi = mlp_forward(enc.phi, g);
    double want = 0.0;
    for (int d = 0; d < 4; ++d) want += psi[d] * phi[d];
    CHECK(q_value(enc, s, a, g) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("bo equals the full-matrix objective and demands augmented scores") {
    Rng rng(31);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    ContrastiveBatch batch = random_batch(4, 2, 1, rng, true);
    CriticScores sc = score_matrices(enc, batch);
    CHECK(bo_estimate(sc) == doctest::Approx(infonce_objective(sc.s_full)).epsilon(1e-14));

    CriticScores no_aug = score_matrices(enc, random_batch(4, 2, 1, rng, false));
    CHECK_FALSE(no_aug.has_full);
    CHECK_THROWS_AS(bo_estimate(no_aug), InputError);
    CHECK_THROWS_AS(safe_loss(no_aug, SafeConvention::prose, 0.5), InputError);
    CHECK_THROWS_AS(crl_loss(no_aug, CrlVariant::only_augment), InputError);
    CHECK_NOTHROW(crl_loss(no_aug, CrlVariant::cpc));
}

TEST_CASE("safe_loss validates the club weight range") {
    Rng rng(37);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    CriticScores sc = score_matrices(enc, random_batch(4, 2, 1, rng, true));
    CHECK_THROWS_AS(safe_loss(sc, SafeConvention::prose, -0.1), InputError);
    CHECK_THROWS_AS(safe_loss(sc, SafeConvention::prose, 1.1), InputError);
    CHECK_NOTHROW(safe_loss(sc, SafeConvention::prose, 0.0));
    CHECK_NOTHROW(safe_loss(sc, SafeConvention::prose, 1.0));
}

TEST_CASE("a zero phi_hat collapses the full critic onto the base") {
    Rng rng(41);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    enc.phi_hat.fill(0.0);
    ContrastiveBatch batch = random_batch(4, 2, 1, rng, true);
    CriticScores sc = score_matrices(enc, batch);
    for (size_t i = 0; i < sc.s_v.size(); ++i) CHECK(sc.s_full.a[i] == sc.s_v.a[i]);
    CHECK(bo_estimate(sc) == doctest::Approx(infonce_objective(sc.s_v)).epsilon(1e-14));
}

TEST_CASE("graph nodes agree with the scalar estimators") {
    Rng rng(43);
    EncoderSet enc = init_encoders(3, 2, 5, {8}, rng);
    ContrastiveBatch batch = random_batch(6, 3, 2, rng, true);
    CriticScores sc = score_matrices(enc, batch);

    Graph g;
    ScoreNodes nodes = build_score_nodes(g, enc, nullptr, batch);
    REQUIRE(nodes.has_full);
    CHECK(g.scalar(infonce_node(g, nodes.s_v)) ==
          doctest::Approx(infonce_objective(sc.s_v)).epsilon(1e-12));
    CHECK(g.scalar(binary_nce_node(g, nodes.s_v)) ==
          doctest::Approx(binary_nce_objective(sc.s_v)).epsilon(1e-12));
    CHECK(g.scalar(club_node(g, nodes.s_full)) ==
          doctest::Approx(club_estimate(sc.s_full)).epsilon(1e-12));
    CHECK(g.scalar(bo_node(g, nodes, false)) == doctest::Approx(bo_estimate(sc)).epsilon(1e-12));
    CHECK(g.scalar(bo_node(g, nodes, true)) == doctest::Approx(bo_estimate(sc)).epsilon(1e-12));
    for (auto conv : {SafeConvention::prose, SafeConvention::literal}) {
        CHECK(g.scalar(safe_loss_node(g, nodes, conv, 0.7, false)) ==
              doctest::Approx(safe_loss(sc, conv, 0.7)).epsilon(1e-12));
    }
    CHECK(g.scalar(crl_loss_node(g, nodes, CrlVariant::cpc)) ==
          doctest::Approx(crl_loss(sc, CrlVariant::cpc)).epsilon(1e-12));
    CHECK(g.scalar(crl_loss_node(g, nodes, CrlVariant::nce)) ==
          doctest::Approx(crl_loss(sc, CrlVariant::nce)).epsilon(1e-12));
    CHECK(g.scalar(crl_loss_node(g, nodes, CrlVariant::only_augment)) ==
          doctest::Approx(crl_loss(sc, CrlVariant::only_augment)).epsilon(1e-12));
}

TEST_CASE("every loss builder passes a finite-difference gradient check") {
    Rng rng(47);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    ContrastiveBatch batch = random_batch(4, 2, 1, rng, true);

    auto check = [&](const std::string& name, const LossBuilder& build) {
        INFO(name);
        CHECK(fd_error(enc, batch, build) < 1e-6);
    };
    check("infonce", [](Graph& g, const ScoreNodes& n) { return infonce_node(g, n.s_v); });
    check("binary_nce", [](Graph& g, const ScoreNodes& n) { return binary_nce_node(g, n.s_v); });
    check("club", [](Graph& g, const ScoreNodes& n) { return club_node(g, n.s_full); });
    check("bo", [](Graph& g, const ScoreNodes& n) { return bo_node(g, n, false); });
    check("safe_prose", [](Graph& g, const ScoreNodes& n) {
        return safe_loss_node(g, n, SafeConvention::prose, 0.7, false);
    });
    check("safe_literal", [](Graph& g, const ScoreNodes& n) {
        return safe_loss_node(g, n, SafeConvention::literal, 0.7, false);
    });
    check("crl_cpc", [](Graph& g, const ScoreNodes& n) {
        return crl_loss_node(g, n, CrlVariant::cpc);
    });
    check("crl_nce", [](Graph& g, const ScoreNodes& n) {
        return crl_loss_node(g, n, CrlVariant::nce);
    });
    check("crl_only_augment", [](Graph& g, const ScoreNodes& n) {
        return crl_loss_node(g, n, CrlVariant::only_augment);
    });
}

TEST_CASE("detached bo freezes the base path but keeps the boost path exact") {
    // Finite differences see through detach (the value map is unchanged), so
    // the detached analytic gradient intentionally disagrees with FD along the
    // psi path. The phi_hat path never touches S_v, so it must still match.
    Rng rng(53);
    EncoderSet enc = init_encoders(2, 1, 4, {8}, rng);
    ContrastiveBatch batch = random_batch(4, 2, 1, rng, true);
    auto detached_bo = [](Graph& g, const ScoreNodes& n) { return bo_node(g, n, true); };

    EncoderSet grads = zeros_like(enc);
    eval_loss(enc, batch, &grads, detached_bo);

    std::vector<Mat> at, an;
    for (const Mat* m : mat_refs(enc.phi_hat)) at.push_back(*m);
    for (const Mat* m : mat_refs(grads.phi_hat)) an.push_back(*m);
    auto loss_fn = [&](const std::vector<Mat>& mats) {
        EncoderSet e = enc;
        size_t idx = 0;
        for (Mat* m : mat_refs(e.phi_hat)) *m = mats.at(idx++);
        return eval_loss(e, batch, nullptr, detached_bo);
    };
    CHECK(finite_diff_check(loss_fn, at, an, 1e-5) < 1e-6);

    // Full-parameter FD disagrees: the bracket's base-path gradient is gone.
    CHECK(fd_error(enc, batch, detached_bo) > 1e-4);

    EncoderSet plain = zeros_like(enc);
    eval_loss(enc, batch, &plain, [](Graph& g, const ScoreNodes& n) {
        return bo_node(g, n, false);
    });
    double psi_diff = 0.0;
    for (size_t l = 0; l < plain.psi.layers.size(); ++l)
        for (size_t i = 0; i < plain.psi.layers[l].W.size(); ++i)
            psi_diff += std::abs(plain.psi.layers[l].W.a[i] - grads.psi.layers[l].W.a[i]);
    CHECK(psi_diff > 1e-8);
}

TEST_CASE("alphabet classification node computes masked cross entropy") {
    Rng rng(59);
    Mat scores = random_mat(3, 5, rng);
    std::vector<int> positive{1, 0, 4};

    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
        double lse = 0.0;
        for (int j = 0; j < 5; ++j) lse += std::exp(scores(i, j));
        want += scores(i, positive[i]) - std::log(lse);
    }
    want = -want / 3.0;

    Mat grad(3, 5);
    Graph g;
    Graph::Value s = g.param(scores, &grad);
    Graph::Value loss = alphabet_cpc_node(g, s, positive);
    CHECK(g.scalar(loss) == doctest::Approx(want).epsilon(1e-12));

    g.backward(loss);
    auto loss_fn = [&](const std::vector<Mat>& mats) {
        Graph g2;
        return g2.scalar(alphabet_cpc_node(g2, g2.input(mats[0]), positive));
    };
    CHECK(finite_diff_check(loss_fn, {scores}, {grad}, 1e-5) < 1e-6);
}
