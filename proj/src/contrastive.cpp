#include "visa/contrastive.hpp"

#include <algorithm>
#include <cmath>

#include "visa/errors.hpp"

namespace visa {

Method parse_method(const std::string& s) {
    if (s == "visa") return Method::visa;
    if (s == "crl_cpc") return Method::crl_cpc;
    if (s == "crl_nce") return Method::crl_nce;
    if (s == "only_augment") return Method::only_augment;
    throw ConfigError("unknown method: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::visa: return "visa";
        case Method::crl_cpc: return "crl_cpc";
        case Method::crl_nce: return "crl_nce";
        case Method::only_augment: return "only_augment";
    }
    return "?";
}

SafeConvention parse_safe_convention(const std::string& s) {
    if (s == "prose") return SafeConvention::prose;
    if (s == "literal") return SafeConvention::literal;
    throw ConfigError("unknown safe_convention: " + s);
}

std::string to_string(SafeConvention c) {
    return c == SafeConvention::prose ? "prose" : "literal";
}

EncoderSet init_encoders(int state_dim, int action_dim, int embed_dim,
                         const std::vector<int>& hidden, Rng& rng) {
    if (embed_dim < 1) throw ConfigError("init_encoders: embed_dim must be >= 1");
    EncoderSet e;
    e.embed_dim = embed_dim;
    e.psi = mlp_init(state_dim + action_dim, hidden, embed_dim, rng);
    e.phi = mlp_init(state_dim, hidden, embed_dim, rng);
    e.phi_hat = mlp_init(2 * state_dim, hidden, embed_dim, rng);
    return e;
}

EncoderSet zeros_like(const EncoderSet& e) {
    EncoderSet z;
    z.embed_dim = e.embed_dim;
    z.psi = zeros_like(e.psi);
    z.phi = zeros_like(e.phi);
    z.phi_hat = zeros_like(e.phi_hat);
    return z;
}

EncoderOpt opt_state_for(const EncoderSet& e) {
    return EncoderOpt{opt_state_for(e.psi), opt_state_for(e.phi), opt_state_for(e.phi_hat)};
}

namespace {

Mat hcat(const Mat& a, const Mat& b) {
    Mat out(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        std::copy(a.row(i), a.row(i) + a.cols, out.row(i));
        std::copy(b.row(i), b.row(i) + b.cols, out.row(i) + a.cols);
    }
    return out;
}

Mat pairwise_dots(const Mat& x, const Mat& y) {
    Mat s(x.rows, y.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < y.rows; ++j) s(i, j) = dot(x.row(i), y.row(j), x.cols);
    return s;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

void require_square(const Mat& S, const char* who) {
    if (S.rows != S.cols || S.rows < 2)
        throw InputError(std::string(who) + ": need a square score matrix with B >= 2");
}

}  // namespace

CriticScores score_matrices(const EncoderSet& enc, const ContrastiveBatch& batch) {
    CriticScores out;
    Mat psi_out = mlp_forward(enc.psi, hcat(batch.anchor_state, batch.anchor_action));
    Mat phi_out = mlp_forward(enc.phi, batch.visited);
    out.s_v = pairwise_dots(psi_out, phi_out);
    if (batch.has_aug) {
        Mat pair_out = mlp_forward(enc.phi_hat, hcat(batch.visited, batch.augmented));
        Mat boost = pairwise_dots(psi_out, pair_out);
        out.s_full = out.s_v;
        for (size_t i = 0; i < boost.size(); ++i) out.s_full.a[i] += boost.a[i];
        out.has_full = true;
    }
    return out;
}

double infonce_objective(const Mat& S) {
    require_square(S, "infonce_objective");
    double acc = 0.0;
    for (int i = 0; i < S.rows; ++i) {
        const double* r = S.row(i);
        double m = r[0];
        for (int j = 1; j < S.cols; ++j) m = std::max(m, r[j]);
        double denom = 0.0;
        for (int j = 0; j < S.cols; ++j) denom += std::exp(r[j] - m);
        acc += (r[i] - m) - std::log(denom);
    }
    return acc / S.rows;
}

double infonce_mi_estimate(const Mat& S) {
    return std::log(static_cast<double>(S.rows)) + infonce_objective(S);
}

double binary_nce_objective(const Mat& S) {
    require_square(S, "binary_nce_objective");
    double pos = 0.0, neg = 0.0;
    for (int i = 0; i < S.rows; ++i) {
        for (int j = 0; j < S.cols; ++j) {
            // log sigma(x) = -softplus(-x); log(1 - sigma(x)) = -softplus(x)
            double x = S(i, j);
            double sp = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
            if (i == j)
                pos += sp - x;  // softplus(-x) = softplus(x) - x
            else
                neg += sp;
        }
    }
    int B = S.rows;
    return -pos / B - neg / (static_cast<double>(B) * (B - 1));
}

double club_estimate(const Mat& S) {
    require_square(S, "club_estimate");
    double diag = 0.0, off = 0.0;
    for (int i = 0; i < S.rows; ++i)
        for (int j = 0; j < S.cols; ++j)
            (i == j ? diag : off) += S(i, j);
    int B = S.rows;
    return diag / B - off / (static_cast<double>(B) * (B - 1));
}

double bo_estimate(const CriticScores& scores) {
    if (!scores.has_full) throw InputError("bo_estimate: S_full required");
    // infonce(S_v) + [infonce(S_full) - infonce(S_v)]: the base terms cancel
    // in value, and detaching only changes gradients, never the value.
    return infonce_objective(scores.s_full);
}

double safe_loss(const CriticScores& scores, SafeConvention conv, double lambda_club) {
    if (!scores.has_full) throw InputError("safe_loss: S_full required");
    if (lambda_club < 0.0 || lambda_club > 1.0)
        throw InputError("safe_loss: lambda_club must lie in [0,1]");
    double bo = bo_estimate(scores);
    double base = infonce_objective(scores.s_v);
    double club = club_estimate(scores.s_full);
    if (conv == SafeConvention::prose) return -(bo + base - lambda_club * club);
    return -(bo - base + lambda_club * club);
}

double crl_loss(const CriticScores& scores, CrlVariant variant) {
    switch (variant) {
        case CrlVariant::cpc: return -infonce_objective(scores.s_v);
        case CrlVariant::nce: return -binary_nce_objective(scores.s_v);
        case CrlVariant::only_augment:
            if (!scores.has_full) throw InputError("crl_loss: only_augment requires S_full");
            return -bo_estimate(scores);
    }
    throw InputError("crl_loss: unknown variant");
}

double q_value(const EncoderSet& enc, const Vec& s, const Vec& a, const Vec& g) {
    Vec sa(s);
    sa.insert(sa.end(), a.begin(), a.end());
    Vec psi_out = mlp_forward(enc.psi, sa);
    Vec phi_out = mlp_forward(enc.phi, g);
    return dot(psi_out.data(), phi_out.data(), static_cast<int>(psi_out.size()));
}

ScoreNodes build_score_nodes(Graph& g, const EncoderSet& enc, EncoderSet* grads,
                             const ContrastiveBatch& batch) {
    ScoreNodes out;
    Graph::Value psi_in = g.input(hcat(batch.anchor_state, batch.anchor_action));
    Graph::Value psi_out = mlp_apply(g, enc.psi, grads ? &grads->psi : nullptr, psi_in);
    Graph::Value phi_out =
        mlp_apply(g, enc.phi, grads ? &grads->phi : nullptr, g.input(batch.visited));
    out.s_v = g.matmul_nt(psi_out, phi_out);
    if (batch.has_aug) {
        Graph::Value pair_in = g.input(hcat(batch.visited, batch.augmented));
        Graph::Value pair_out =
            mlp_apply(g, enc.phi_hat, grads ? &grads->phi_hat : nullptr, pair_in);
        out.boost = g.matmul_nt(psi_out, pair_out);
        out.s_full = g.add(out.s_v, out.boost);
        out.has_full = true;
    }
    return out;
}

Graph::Value infonce_node(Graph& g, Graph::Value S) {
    return g.mean_all(g.sub(g.diag(S), g.row_logsumexp(S)));
}

Graph::Value binary_nce_node(Graph& g, Graph::Value S) {
    Graph::Value d = g.diag(S);
    Graph::Value pos = g.mean_all(g.scale(g.softplus(g.scale(d, -1.0)), -1.0));
    Graph::Value neg = g.offdiag_mean(g.scale(g.softplus(S), -1.0));
    return g.add(pos, neg);
}

Graph::Value club_node(Graph& g, Graph::Value S) {
    return g.sub(g.mean_all(g.diag(S)), g.offdiag_mean(S));
}

Graph::Value bo_node(Graph& g, const ScoreNodes& s, bool detach_base) {
    if (!s.has_full) throw InputError("bo_node: S_full required");
    if (!detach_base)
        return g.add(infonce_node(g, s.s_v),
                     g.sub(infonce_node(g, s.s_full), infonce_node(g, s.s_v)));
    // Boost increment measured against a frozen base: gradients of the
    // bracketed terms do not flow through the S_v summand.
    Graph::Value base_frozen = g.detach(s.s_v);
    Graph::Value full_frozen_base = g.add(base_frozen, s.boost);
    return g.add(infonce_node(g, s.s_v),
                 g.sub(infonce_node(g, full_frozen_base), infonce_node(g, base_frozen)));
}

Graph::Value safe_loss_node(Graph& g, const ScoreNodes& s, SafeConvention conv,
                            double lambda_club, bool detach_base) {
    if (!s.has_full) throw InputError("safe_loss_node: S_full required");
    Graph::Value bo = bo_node(g, s, detach_base);
    Graph::Value base = infonce_node(g, s.s_v);
    Graph::Value club = club_node(g, s.s_full);
    Graph::Value inner;
    if (conv == SafeConvention::prose)
        inner = g.add(g.add(bo, base), g.scale(club, -lambda_club));
    else
        inner = g.add(g.sub(bo, base), g.scale(club, lambda_club));
    return g.scale(inner, -1.0);
}

Graph::Value crl_loss_node(Graph& g, const ScoreNodes& s, CrlVariant variant,
                           bool bo_detach_base) {
    switch (variant) {
        case CrlVariant::cpc: return g.scale(infonce_node(g, s.s_v), -1.0);
        case CrlVariant::nce: return g.scale(binary_nce_node(g, s.s_v), -1.0);
        case CrlVariant::only_augment: return g.scale(bo_node(g, s, bo_detach_base), -1.0);
    }
    throw InputError("crl_loss_node: unknown variant");
}

Graph::Value alphabet_cpc_node(Graph& g, Graph::Value scores, const std::vector<int>& positive) {
    Graph::Value hit = g.gather_cols(scores, positive);
    return g.scale(g.mean_all(g.sub(hit, g.row_logsumexp(scores))), -1.0);
}

}  // namespace visa
