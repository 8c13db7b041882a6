#pragma once

#include <vector>

#include "visa/contrastive.hpp"
#include "visa/env.hpp"
#include "visa/graph.hpp"
#include "visa/mlp.hpp"
#include "visa/rng.hpp"

namespace visa {

// Tanh-squashed Gaussian policy. The trunk maps (s, g) to 2*action_dim
// outputs: mean in the first half, log_std (clamped to [-5, 2]) in the
// second. Actions are a = center + half * tanh(mean + std * noise) where
// center/half come from the env's action bounds.
struct PolicyParams {
    ParamSet trunk;
    int action_dim = 0;
    double log_std_lo = -5.0;
    double log_std_hi = 2.0;
};

PolicyParams init_policy(int state_dim, int goal_dim, int action_dim,
                         const std::vector<int>& hidden, Rng& rng);

struct ActionSample {
    Vec action;
    double log_prob;  // includes tanh change of variables and bound scaling
};

ActionSample policy_sample(const PolicyParams& pi, const Vec& s, const Vec& g, double action_lo,
                           double action_hi, Rng& rng);

// Deterministic head: center + half * tanh(mean).
Vec policy_mean_action(const PolicyParams& pi, const Vec& s, const Vec& g, double action_lo,
                       double action_hi);

// mean_i [ alpha * log pi(a_i|s_i,g_i) - psi(s_i,a_i).phi(g_i) ] over
// reparameterized samples. Encoders receive no gradient from this loss.
double actor_loss(const PolicyParams& pi, const EncoderSet& enc, const Mat& states,
                  const Mat& goals, double alpha, double action_lo, double action_hi, Rng& rng);

struct ActorLossNodes {
    Graph::Value loss;
    Graph::Value mean_logp;  // policy entropy estimate is -value(mean_logp)
};

// Graph form with caller-supplied standard-normal noise (B, action_dim), so
// the same draw can be replayed for gradient checks. `policy_grads` may be
// null to freeze the policy; encoders are always frozen here unless
// `enc_grads` is supplied (finite-difference tests only).
ActorLossNodes actor_loss_graph(Graph& g, const PolicyParams& pi, ParamSet* policy_grads,
                                const EncoderSet& enc, EncoderSet* enc_grads, const Mat& states,
                                const Mat& goals, const Mat& noise, double alpha,
                                double action_lo, double action_hi);

}  // namespace visa
