#pragma once

#include <string>
#include <vector>

#include "visa/graph.hpp"
#include "visa/mlp.hpp"
#include "visa/replay.hpp"
#include "visa/rng.hpp"

namespace visa {

enum class Method { visa, crl_cpc, crl_nce, only_augment };
Method parse_method(const std::string& s);
std::string to_string(Method m);

// Sign convention for combining the bound estimators into the critic loss.
// `prose` maximizes both lower bounds and minimizes the upper bound;
// `literal` flips the sign of the unique-information correction. Both exist
// because the source material states them inconsistently.
enum class SafeConvention { prose, literal };
SafeConvention parse_safe_convention(const std::string& s);
std::string to_string(SafeConvention c);

// psi encodes (s,a), phi encodes a visited state (or goal), phi_hat encodes
// a (visited, augmented) pair. All map into R^embed_dim; critics are inner
// products of these embeddings.
struct EncoderSet {
    ParamSet psi;
    ParamSet phi;
    ParamSet phi_hat;
    int embed_dim = 0;
};

EncoderSet init_encoders(int state_dim, int action_dim, int embed_dim,
                         const std::vector<int>& hidden, Rng& rng);
EncoderSet zeros_like(const EncoderSet& e);

struct EncoderOpt {
    OptState psi, phi, phi_hat;
};
EncoderOpt opt_state_for(const EncoderSet& e);

// S_v[i][j]    = psi(s_i,a_i) . phi(s_v_j)
// S_full[i][j] = S_v[i][j] + psi(s_i,a_i) . phi_hat(s_v_j, s_a_j)
// Diagonal entries pair each anchor with its own sampled states; off-diagonal
// entries are the in-batch negatives. S_full only exists when the batch
// carries augmented states.
struct CriticScores {
    Mat s_v;
    Mat s_full;
    bool has_full = false;
};

CriticScores score_matrices(const EncoderSet& enc, const ContrastiveBatch& batch);

// ---- estimator values (no gradients) ----

// mean_i log softmax_row(S)[i][i], computed with max subtraction; always <= 0.
double infonce_objective(const Mat& S);

// log(B) + infonce_objective(S); never exceeds log B.
double infonce_mi_estimate(const Mat& S);

// mean_i log sigmoid(S[i][i]) + mean_{i != j} log(1 - sigmoid(S[i][j])).
double binary_nce_objective(const Mat& S);

// mean(diag) - mean(offdiag): contrastive upper-bound estimate at the critic.
double club_estimate(const Mat& S);

// Boosted lower bound on the joint: infonce(S_v) + [infonce(S_full) -
// infonce(S_v)], equal to infonce(S_full) in value. With detach_base the
// bracket is evaluated with gradients blocked through the S_v summand, so the
// boost term learns the increment over a frozen base (value unchanged).
double bo_estimate(const CriticScores& scores);

// Critic training loss (to be minimized).
//   prose  : L = -[ bo + infonce(S_v) - lambda_club * club(S_full) ]
//   literal: L = -[ bo - infonce(S_v) + lambda_club * club(S_full) ]
double safe_loss(const CriticScores& scores, SafeConvention conv, double lambda_club);

enum class CrlVariant { cpc, nce, only_augment };

// cpc -> -infonce(S_v); nce -> -binary_nce(S_v); only_augment -> -bo.
double crl_loss(const CriticScores& scores, CrlVariant variant);

// psi(s,a) . phi(g): the goal-conditioned value surrogate.
double q_value(const EncoderSet& enc, const Vec& s, const Vec& a, const Vec& g);

// ---- graph builders (for training updates and gradient checks) ----

struct ScoreNodes {
    Graph::Value s_v = -1;
    Graph::Value boost = -1;
    Graph::Value s_full = -1;
    bool has_full = false;
};

// Encoder forward passes + score matrices on a graph. Gradients accumulate
// into `grads` (zeroed by the caller); nullptr freezes all encoders.
ScoreNodes build_score_nodes(Graph& g, const EncoderSet& enc, EncoderSet* grads,
                             const ContrastiveBatch& batch);

Graph::Value infonce_node(Graph& g, Graph::Value S);
Graph::Value binary_nce_node(Graph& g, Graph::Value S);
Graph::Value club_node(Graph& g, Graph::Value S);
Graph::Value bo_node(Graph& g, const ScoreNodes& s, bool detach_base);
Graph::Value safe_loss_node(Graph& g, const ScoreNodes& s, SafeConvention conv,
                            double lambda_club, bool detach_base);
Graph::Value crl_loss_node(Graph& g, const ScoreNodes& s, CrlVariant variant,
                           bool bo_detach_base = false);

// Softmax classification of each anchor's visited state against an explicit
// candidate row set: loss = -mean_i [S[i][pos_i] - logsumexp(S[i])]. Used by
// critic-only training on enumerable state spaces, where the candidate set is
// the whole state alphabet instead of the batch rows.
Graph::Value alphabet_cpc_node(Graph& g, Graph::Value scores, const std::vector<int>& positive);

}  // namespace visa
