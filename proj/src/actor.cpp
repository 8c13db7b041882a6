#include "visa/actor.hpp"

#include <cmath>

#include "visa/errors.hpp"

namespace visa {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kLog2 = 0.6931471805599453;

double stable_softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// log(1 - tanh(u)^2) without catastrophic cancellation near |u| large.
double log_one_minus_tanh_sq(double u) {
    return 2.0 * (kLog2 - u - stable_softplus(-2.0 * u));
}

}  // namespace

PolicyParams init_policy(int state_dim, int goal_dim, int action_dim,
                         const std::vector<int>& hidden, Rng& rng) {
    if (action_dim < 1) throw ConfigError("init_policy: action_dim must be >= 1");
    PolicyParams p;
    p.action_dim = action_dim;
    p.trunk = mlp_init(state_dim + goal_dim, hidden, 2 * action_dim, rng);
    return p;
}

ActionSample policy_sample(const PolicyParams& pi, const Vec& s, const Vec& g, double action_lo,
                           double action_hi, Rng& rng) {
    if (action_hi <= action_lo) throw InputError("policy_sample: bad action bounds");
    Vec in(s);
    in.insert(in.end(), g.begin(), g.end());
    Vec out = mlp_forward(pi.trunk, in);
    int A = pi.action_dim;
    double center = 0.5 * (action_lo + action_hi);
    double half = 0.5 * (action_hi - action_lo);

    ActionSample r;
    r.action.resize(A);
    r.log_prob = 0.0;
    for (int d = 0; d < A; ++d) {
        double mean = out[d];
        double ls = std::clamp(out[A + d], pi.log_std_lo, pi.log_std_hi);
        double xi = rng.normal();
        double u = mean + std::exp(ls) * xi;
        r.action[d] = center + half * std::tanh(u);
        r.log_prob += -0.5 * xi * xi - ls - 0.5 * kLog2Pi;  // N(u; mean, std)
        r.log_prob -= log_one_minus_tanh_sq(u) + std::log(half);
    }
    if (!std::isfinite(r.log_prob)) throw NumericError("policy_sample: non-finite log_prob");
    return r;
}

Vec policy_mean_action(const PolicyParams& pi, const Vec& s, const Vec& g, double action_lo,
                       double action_hi) {
    Vec in(s);
    in.insert(in.end(), g.begin(), g.end());
    Vec out = mlp_forward(pi.trunk, in);
    double center = 0.5 * (action_lo + action_hi);
    double half = 0.5 * (action_hi - action_lo);
    Vec a(pi.action_dim);
    for (int d = 0; d < pi.action_dim; ++d) a[d] = center + half * std::tanh(out[d]);
    return a;
}

ActorLossNodes actor_loss_graph(Graph& g, const PolicyParams& pi, ParamSet* policy_grads,
                                const EncoderSet& enc, EncoderSet* enc_grads, const Mat& states,
                                const Mat& goals, const Mat& noise, double alpha,
                                double action_lo, double action_hi) {
    if (alpha < 0.0) throw InputError("actor_loss_graph: alpha must be >= 0");
    if (noise.rows != states.rows || noise.cols != pi.action_dim)
        throw InputError("actor_loss_graph: noise shape mismatch");
    int A = pi.action_dim;
    double center = 0.5 * (action_lo + action_hi);
    double half = 0.5 * (action_hi - action_lo);

    Graph::Value s_in = g.input(states);
    Graph::Value trunk_in = g.concat_cols(s_in, g.input(goals));
    Graph::Value out = mlp_apply(g, pi.trunk, policy_grads, trunk_in);
    Graph::Value mean = g.slice_cols(out, 0, A);
    Graph::Value ls = g.clamp(g.slice_cols(out, A, A), pi.log_std_lo, pi.log_std_hi);
    Graph::Value xi = g.input(noise);
    Graph::Value u = g.add(mean, g.mul(g.exp(ls), xi));

    // log N(u; mean, std) = -xi^2/2 - log_std - log(2 pi)/2, per component
    Graph::Value gauss = g.add_const(g.sub(g.scale(g.mul(xi, xi), -0.5), ls), -0.5 * kLog2Pi);
    // tanh + bound-scaling change of variables: log(1 - tanh(u)^2) + log(half)
    Graph::Value corr =
        g.add_const(g.scale(g.add(u, g.softplus(g.scale(u, -2.0))), -2.0), 2.0 * kLog2);
    Graph::Value logp_el = g.add_const(g.sub(gauss, corr), -std::log(half));
    Graph::Value logp = g.sum_cols(logp_el);  // (B, 1)

    Graph::Value action = g.add_const(g.scale(g.tanh(u), half), center);
    Graph::Value psi_in = g.concat_cols(s_in, action);
    Graph::Value psi_out = mlp_apply(g, enc.psi, enc_grads ? &enc_grads->psi : nullptr, psi_in);
    Graph::Value phi_out =
        mlp_apply(g, enc.phi, enc_grads ? &enc_grads->phi : nullptr, g.input(goals));
    Graph::Value q = g.row_dot(psi_out, phi_out);  // (B, 1)

    ActorLossNodes nodes;
    nodes.loss = g.mean_all(g.sub(g.scale(logp, alpha), q));
    nodes.mean_logp = g.mean_all(logp);
    return nodes;
}

double actor_loss(const PolicyParams& pi, const EncoderSet& enc, const Mat& states,
                  const Mat& goals, double alpha, double action_lo, double action_hi, Rng& rng) {
    Mat noise(states.rows, pi.action_dim);
    for (double& v : noise.a) v = rng.normal();
    Graph g;
    ActorLossNodes nodes = actor_loss_graph(g, pi, nullptr, enc, nullptr, states, goals, noise,
                                            alpha, action_lo, action_hi);
    return g.scalar(nodes.loss);
}

}  // namespace visa
