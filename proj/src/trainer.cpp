#include "visa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "visa/actor.hpp"
#include "visa/contrastive.hpp"
#include "visa/errors.hpp"
#include "visa/oracle.hpp"
#include "visa/replay.hpp"

namespace visa {

namespace {

constexpr const char* kMetricsHeader =
    "env_step,eval_success_rate,critic_loss,infonce_value,club_value,bo_value,"
    "actor_loss,policy_entropy,mean_reach_visited,mean_reach_augmented";

EnvOptions env_options(const TrainConfig& cfg) {
    EnvOptions opt;
    opt.episode_len = cfg.episode_len;
    opt.chain_n = cfg.chain_n;
    opt.chain_p_forward = cfg.chain_p_forward;
    return opt;
}

Vec random_action(const GoalEnvSpec& spec, Rng& rng) {
    Vec a(spec.action_dim);
    if (spec.discrete_action_count > 0) {
        for (double& v : a) v = static_cast<double>(rng.uniform_int(spec.discrete_action_count));
    } else {
        for (double& v : a) v = rng.uniform(spec.action_lo, spec.action_hi);
    }
    return a;
}

// Success latches: an episode counts once any state (including the initial
// one) enters the goal ball; the rollout stops there.
bool greedy_episode_success(const GoalEnv& env, const EncoderSet&, const PolicyParams& pi,
                            Rng& rng) {
    Vec goal = env.sample_goal(rng);
    Vec s = env.reset(goal, rng);
    if (env.is_success(s, goal)) return true;
    const auto& spec = env.spec();
    for (int t = 0; t < spec.episode_len; ++t) {
        Vec a = policy_mean_action(pi, s, goal, spec.action_lo, spec.action_hi);
        StepResult r = env.step(s, a, goal, t, rng);
        if (r.success) return true;
        s = std::move(r.next_state);
        if (r.terminal) break;
    }
    return false;
}

double eval_success_rate(const GoalEnv& env, const EncoderSet& enc, const PolicyParams& pi,
                         int episodes, Rng& rng) {
    int hits = 0;
    for (int e = 0; e < episodes; ++e) {
        if (greedy_episode_success(env, enc, pi, rng)) ++hits;
    }
    return static_cast<double>(hits) / episodes;
}

// Accumulators for the per-interval metric columns.
struct MetricSums {
    double critic_loss = 0, infonce = 0, club = 0, bo = 0;
    double actor_loss = 0, entropy = 0;
    double reach_v = 0, reach_a = 0;
    long critic_n = 0, actor_n = 0;

    void reset() { *this = MetricSums{}; }
};

void append_metrics_row(std::string& out, long env_step, double success, const MetricSums& m) {
    auto div = [](double s, long n) { return n > 0 ? s / n : 0.0; };
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  env_step, success, div(m.critic_loss, m.critic_n), div(m.infonce, m.critic_n),
                  div(m.club, m.critic_n), div(m.bo, m.critic_n), div(m.actor_loss, m.actor_n),
                  div(m.entropy, m.actor_n), div(m.reach_v, m.critic_n),
                  div(m.reach_a, m.critic_n));
    out += buf;
}

int state_index_of_row(const Mat& states, int row) {
    // One-hot decode; sample_batch validated finiteness already.
    int best = 0;
    double best_v = states(row, 0);
    for (int j = 1; j < states.cols; ++j) {
        if (states(row, j) > best_v) {
            best_v = states(row, j);
            best = j;
        }
    }
    return best;
}

CrlVariant crl_variant_of(Method m) {
    switch (m) {
        case Method::crl_cpc: return CrlVariant::cpc;
        case Method::crl_nce: return CrlVariant::nce;
        case Method::only_augment: return CrlVariant::only_augment;
        default: throw ConfigError("method has no crl variant");
    }
}

struct Trainer {
    const TrainConfig& cfg;
    std::unique_ptr<GoalEnv> env;
    EncoderSet enc;
    EncoderSet enc_grads;
    PolicyParams pi;
    ParamSet pi_grads;
    EncoderOpt enc_opt;
    OptState pi_opt;
    AdamConfig adam_critic, adam_actor;
    ReplayBuffer buffer;
    AugmentationSpec aug;
    Mat alphabet;  // (n, n) one-hot rows, critic_only classification targets

    Rng rng_env, rng_goal, rng_policy, rng_batch, rng_noise;

    MetricSums sums;
    TrainResult result;
    double reach_v_total = 0, reach_a_total = 0;
    long reach_v_count = 0, reach_a_count = 0;

    explicit Trainer(const TrainConfig& c)
        : cfg(c),
          env(make_env(c.env, env_options(c))),
          enc{},
          enc_grads{},
          pi{},
          pi_grads{},
          enc_opt{},
          pi_opt{},
          buffer(static_cast<size_t>(c.buffer_capacity)),
          rng_env(derive_seed(c.seed, "env")),
          rng_goal(derive_seed(c.seed, "goal")),
          rng_policy(derive_seed(c.seed, "policy")),
          rng_batch(derive_seed(c.seed, "batch")),
          rng_noise(derive_seed(c.seed, "noise")) {
        const auto& spec = env->spec();
        Rng rng_init(derive_seed(c.seed, "init"));
        enc = init_encoders(spec.state_dim, spec.action_dim, c.embed_dim, c.hidden, rng_init);
        enc_grads = zeros_like(enc);
        pi = init_policy(spec.state_dim, spec.goal_dim, spec.action_dim, c.hidden, rng_init);
        pi_grads = zeros_like(pi.trunk);
        enc_opt = opt_state_for(enc);
        pi_opt = opt_state_for(pi.trunk);
        adam_critic.lr = c.lr_critic;
        adam_actor.lr = c.lr_actor;
        aug.tag = c.aug;
        aug.gamma_aug = c.gamma_aug;
        if (c.critic_only) {
            alphabet = Mat(spec.state_dim, spec.state_dim);
            for (int i = 0; i < spec.state_dim; ++i) alphabet(i, i) = 1.0;
        }
    }

    bool uses_phi_hat() const {
        return cfg.method == Method::visa || cfg.method == Method::only_augment;
    }

    void record_coverage(const ContrastiveBatch& batch) {
        for (int i = 0; i < batch.size(); ++i) {
            double rv = reachability_score(batch.t[i], batch.j[i], batch.T[i]);
            reach_v_total += rv;
            ++reach_v_count;
            int bin = std::min(19, static_cast<int>(rv * 20.0));
            ++result.reach_hist_visited[bin];
            if (batch.has_aug) {
                double ra = batch.k_traj[i] == batch.traj[i]
                                ? reachability_score(batch.t[i], batch.k[i], batch.T[i])
                                : 1.0;
                reach_a_total += ra;
                ++reach_a_count;
                int abin = std::min(19, static_cast<int>(ra * 20.0));
                ++result.reach_hist_augmented[abin];
            }
        }
        sums.reach_v += batch.mean_reach_visited();
        sums.reach_a += batch.mean_reach_augmented();
    }

    void critic_update() {
        ContrastiveBatch batch = sample_batch(buffer, cfg.batch, cfg.gamma, aug, rng_batch);
        record_coverage(batch);

        Graph g;
        enc_grads.psi.fill(0.0);
        enc_grads.phi.fill(0.0);
        enc_grads.phi_hat.fill(0.0);

        Graph::Value loss;
        Graph::Value penalized_scores;
        Mat s_v_val, s_full_val;
        bool has_full = false;

        if (cfg.critic_only) {
            // Classify the visited state against the whole state alphabet so
            // softmax(q-row) can converge to the occupancy itself.
            Graph::Value x_sa =
                g.concat_cols(g.input(batch.anchor_state), g.input(batch.anchor_action));
            Graph::Value psi_e = mlp_apply(g, enc.psi, &enc_grads.psi, x_sa);
            Graph::Value phi_e = mlp_apply(g, enc.phi, &enc_grads.phi, g.input(alphabet));
            Graph::Value scores = g.matmul_nt(psi_e, phi_e);
            std::vector<int> positive(batch.size());
            for (int i = 0; i < batch.size(); ++i) {
                positive[i] = state_index_of_row(batch.visited, i);
            }
            loss = alphabet_cpc_node(g, scores, positive);
            penalized_scores = scores;
            s_v_val = g.value(scores);
        } else {
            ScoreNodes nodes = build_score_nodes(g, enc, &enc_grads, batch);
            if (cfg.method == Method::visa) {
                loss = safe_loss_node(g, nodes, cfg.safe_convention, cfg.lambda_club,
                                      cfg.bo_detach_base);
            } else {
                loss = crl_loss_node(g, nodes, crl_variant_of(cfg.method), cfg.bo_detach_base);
            }
            // The logit drift penalty pins the InfoNCE shift invariance; it
            // applies to the base score matrix except for only_augment,
            // which never trains S_v on its own.
            penalized_scores = cfg.method == Method::only_augment ? nodes.s_full : nodes.s_v;
            s_v_val = g.value(nodes.s_v);
            has_full = nodes.has_full;
            if (has_full) s_full_val = g.value(nodes.s_full);
        }

        double loss_value = g.scalar(loss);
        Graph::Value total = loss;
        if (cfg.logit_penalty > 0.0) {
            Graph::Value lse = g.row_logsumexp(penalized_scores);
            Graph::Value pen = g.mean_all(g.mul(lse, lse));
            total = g.add(loss, g.scale(pen, cfg.logit_penalty));
        }
        g.backward(total);

        opt_step(enc.psi, enc_grads.psi, enc_opt.psi, adam_critic);
        opt_step(enc.phi, enc_grads.phi, enc_opt.phi, adam_critic);
        if (uses_phi_hat() && has_full) {
            opt_step(enc.phi_hat, enc_grads.phi_hat, enc_opt.phi_hat, adam_critic);
        }

        sums.critic_loss += loss_value;
        if (cfg.critic_only) {
            sums.infonce += -loss_value;
        } else {
            sums.infonce += infonce_objective(s_v_val);
            sums.club += club_estimate(has_full ? s_full_val : s_v_val);
            if (has_full) sums.bo += infonce_objective(s_full_val);
        }
        ++sums.critic_n;
    }

    void actor_update() {
        // Goals are relabeled visited states, sampled with the same
        // truncated-geometric index distribution as the critic positives.
        AugmentationSpec no_aug;
        ContrastiveBatch batch = sample_batch(buffer, cfg.batch, cfg.gamma, no_aug, rng_batch);
        Mat noise(batch.size(), env->spec().action_dim);
        for (double& v : noise.a) v = rng_noise.normal();

        Graph g;
        pi_grads.fill(0.0);
        ActorLossNodes nodes =
            actor_loss_graph(g, pi, &pi_grads, enc, nullptr, batch.anchor_state, batch.visited,
                             noise, cfg.alpha, env->spec().action_lo, env->spec().action_hi);
        double loss_value = g.scalar(nodes.loss);
        double mean_logp = g.scalar(nodes.mean_logp);
        g.backward(nodes.loss);
        opt_step(pi.trunk, pi_grads, pi_opt, adam_actor);

        sums.actor_loss += loss_value;
        sums.entropy += -mean_logp;
        ++sums.actor_n;
    }

    Checkpoint checkpoint() const {
        Checkpoint ck;
        const auto& spec = env->spec();
        ck.state_dim = spec.state_dim;
        ck.action_dim = spec.action_dim;
        ck.goal_dim = spec.goal_dim;
        ck.embed_dim = cfg.embed_dim;
        ck.hidden = cfg.hidden;
        ck.enc = enc;
        ck.pi = pi;
        return ck;
    }

    TrainResult run(const std::string& out_dir) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

        const auto& spec = env->spec();
        std::string metrics;
        metrics += kMetricsHeader;
        metrics += "\n";

        long env_step = 0;
        long eval_ordinal = 0;
        double last_success = 0.0;

        Vec goal, s;
        Trajectory traj;
        int t_in_episode = 0;
        auto begin_episode = [&] {
            goal = env->sample_goal(rng_goal);
            s = env->reset(goal, rng_env);
            traj = Trajectory{};
            traj.states = Mat(spec.episode_len + 1, spec.state_dim);
            traj.actions = Mat(spec.episode_len, spec.action_dim);
            traj.goal = goal;
            std::copy(s.begin(), s.end(), traj.states.row(0));
            t_in_episode = 0;
        };
        begin_episode();

        while (env_step < cfg.total_env_steps) {
            bool explore_randomly = cfg.critic_only || env_step < cfg.warmup_steps;
            Vec a = explore_randomly
                        ? random_action(spec, rng_policy)
                        : policy_sample(pi, s, goal, spec.action_lo, spec.action_hi, rng_policy)
                              .action;
            StepResult r = env->step(s, a, goal, t_in_episode, rng_env);
            std::copy(a.begin(), a.end(), traj.actions.row(t_in_episode));
            std::copy(r.next_state.begin(), r.next_state.end(),
                      traj.states.row(t_in_episode + 1));
            s = std::move(r.next_state);
            ++t_in_episode;
            ++env_step;
            if (r.terminal) {
                buffer.append(std::move(traj));
                begin_episode();
            }

            if (env_step >= cfg.warmup_steps && buffer.size() >= 2) {
                for (int u = 0; u < cfg.updates_per_step; ++u) {
                    critic_update();
                    if (!cfg.critic_only) actor_update();
                }
            }

            if (env_step % cfg.eval_every == 0 || env_step == cfg.total_env_steps) {
                Rng rng_eval(derive_seed(cfg.seed, "eval", static_cast<uint64_t>(eval_ordinal)));
                ++eval_ordinal;
                last_success = eval_success_rate(*env, enc, pi, cfg.eval_episodes, rng_eval);
                result.best_success = std::max(result.best_success, last_success);
                append_metrics_row(metrics, env_step, last_success, sums);
                sums.reset();
            }
        }

        result.final_success = last_success;
        result.mean_reach_visited = reach_v_count ? reach_v_total / reach_v_count : 0.0;
        result.mean_reach_augmented = reach_a_count ? reach_a_total / reach_a_count : 0.0;

        result.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
        result.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
        {
            std::ofstream mf(result.metrics_path, std::ios::binary);
            if (!mf) throw ConfigError("cannot write '" + result.metrics_path + "'");
            mf << metrics;
        }
        save_checkpoint(result.checkpoint_path, checkpoint());
        {
            std::ofstream cf((fs::path(out_dir) / "config.txt").string(), std::ios::binary);
            cf << config_to_string(cfg);
        }
        return result;
    }
};

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::string& out_dir) {
    validate_config(cfg);
    Trainer tr(cfg);
    return tr.run(out_dir);
}

double evaluate(const Checkpoint& ck, const std::string& env_tag, int n_episodes,
                std::uint64_t seed, const EnvOptions& opt) {
    if (n_episodes < 1) throw InputError("evaluate needs n_episodes >= 1");
    auto env = make_env(env_tag, opt);
    const auto& spec = env->spec();
    if (spec.state_dim != ck.state_dim || spec.action_dim != ck.action_dim ||
        spec.goal_dim != ck.goal_dim) {
        throw InputError("checkpoint dimensions do not match env '" + env_tag + "'");
    }
    Rng rng(derive_seed(seed, "eval"));
    return eval_success_rate(*env, ck.enc, ck.pi, n_episodes, rng);
}

namespace {

struct VariantSpec {
    Method method;
    AugTag aug;
};

VariantSpec variant_of(const std::string& name, const TrainConfig& base) {
    if (name == "visa") {
        AugTag tag = base.aug != AugTag::none ? base.aug : AugTag::strong_unbias;
        return {Method::visa, tag};
    }
    if (name == "crl_cpc" || name == "none") return {Method::crl_cpc, AugTag::none};
    if (name == "crl_nce") return {Method::crl_nce, AugTag::none};
    if (name == "only_augment") return {Method::only_augment, AugTag::only_augment};
    AugTag tag = parse_aug_tag(name);  // InputError on unknown names
    return {Method::visa, tag};
}

}  // namespace

std::string run_ablation(const TrainConfig& base, const std::vector<std::string>& variants,
                         const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    if (variants.empty()) throw ConfigError("ablation needs at least one variant");
    if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

    nlohmann::json summary;
    summary["variants"] = nlohmann::json::object();

    for (const std::string& name : variants) {
        VariantSpec vs = variant_of(name, base);
        TrainConfig cfg = base;
        cfg.method = vs.method;
        cfg.aug = vs.aug;
        // Per-sample fairness: methods that see no augmented states train on
        // a doubled batch so their visited-state draw count matches the
        // visited + augmented total of the others.
        if (cfg.aug == AugTag::none) cfg.batch = base.batch * 2;

        nlohmann::json group;
        group["method"] = to_string(cfg.method);
        group["aug"] = to_string(cfg.aug);
        group["batch"] = cfg.batch;
        auto finals = nlohmann::json::array();
        auto bests = nlohmann::json::array();
        auto used_seeds = nlohmann::json::array();
        std::vector<long> hist_v(20, 0), hist_a(20, 0);
        double mean_reach_v = 0, mean_reach_a = 0;
        double mean_final = 0;

        for (std::uint64_t seed : seeds) {
            cfg.seed = seed;
            validate_config(cfg);
            std::string run_dir =
                (fs::path(out_dir) / (name + "_seed" + std::to_string(seed))).string();
            TrainResult r = train(cfg, run_dir);
            finals.push_back(r.final_success);
            bests.push_back(r.best_success);
            used_seeds.push_back(seed);
            for (int b = 0; b < 20; ++b) {
                hist_v[b] += r.reach_hist_visited[b];
                hist_a[b] += r.reach_hist_augmented[b];
            }
            mean_reach_v += r.mean_reach_visited;
            mean_reach_a += r.mean_reach_augmented;
            mean_final += r.final_success;
        }
        size_t n = seeds.size();
        mean_final /= n;
        double var_final = 0;
        for (const auto& f : finals) {
            double d = f.get<double>() - mean_final;
            var_final += d * d;
        }
        var_final /= n;

        group["seeds"] = used_seeds;
        group["final_success"] = finals;
        group["best_success"] = bests;
        group["mean_final_success"] = mean_final;
        group["var_final_success"] = var_final;
        group["mean_reach_visited"] = mean_reach_v / n;
        group["mean_reach_augmented"] = mean_reach_a / n;
        group["reach_hist_visited"] = hist_v;
        group["reach_hist_augmented"] = hist_a;
        summary["variants"][name] = group;
    }

    std::string path = (fs::path(out_dir) / "summary.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << summary.dump(2) << "\n";
    return path;
}

void mi_bench(const std::vector<double>& rhos, int batch, int steps, std::uint64_t seed,
              const std::string& out_path) {
    if (batch < 2) throw ConfigError("mi-bench needs batch >= 2");
    if (steps < 1) throw ConfigError("mi-bench needs steps >= 1");
    for (double rho : rhos) {
        if (!(std::abs(rho) < 1.0)) throw ConfigError("mi-bench needs |rho| < 1");
    }

    std::string csv = "rho,infonce_mi,club,analytic\n";
    const std::vector<int> hidden = {32};
    const int embed = 8;

    for (size_t ri = 0; ri < rhos.size(); ++ri) {
        double rho = rhos[ri];
        Rng rng(derive_seed(seed, "mi_bench", ri));
        ParamSet fx = mlp_init(1, hidden, embed, rng);
        ParamSet fy = mlp_init(1, hidden, embed, rng);
        ParamSet gx = zeros_like(fx), gy = zeros_like(fy);
        OptState ox = opt_state_for(fx), oy = opt_state_for(fy);
        AdamConfig adam;
        adam.lr = 1e-3;

        auto draw_pair = [&](Mat& X, Mat& Y) {
            for (int i = 0; i < batch; ++i) {
                double x = rng.normal();
                double y = rho * x + std::sqrt(1.0 - rho * rho) * rng.normal();
                X(i, 0) = x;
                Y(i, 0) = y;
            }
        };

        Mat X(batch, 1), Y(batch, 1);
        for (int step = 0; step < steps; ++step) {
            draw_pair(X, Y);
            Graph g;
            gx.fill(0.0);
            gy.fill(0.0);
            Graph::Value ex = mlp_apply(g, fx, &gx, g.input(X));
            Graph::Value ey = mlp_apply(g, fy, &gy, g.input(Y));
            Graph::Value scores = g.matmul_nt(ex, ey);
            Graph::Value loss = g.scale(infonce_node(g, scores), -1.0);
            g.backward(loss);
            opt_step(fx, gx, ox, adam);
            opt_step(fy, gy, oy, adam);
        }

        // Held-out estimate, averaged to tame batch noise.
        const int eval_batches = 20;
        double mi_sum = 0, club_sum = 0;
        for (int e = 0; e < eval_batches; ++e) {
            draw_pair(X, Y);
            Mat ex = mlp_forward(fx, X);
            Mat ey = mlp_forward(fy, Y);
            Mat scores(batch, batch);
            for (int i = 0; i < batch; ++i)
                for (int j = 0; j < batch; ++j)
                    scores(i, j) = dot(ex.row(i), ey.row(j), embed);
            mi_sum += infonce_mi_estimate(scores);
            club_sum += club_estimate(scores);
        }

        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", rho, mi_sum / eval_batches,
                      club_sum / eval_batches, gaussian_mi(rho));
        csv += buf;
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    out << csv;
}

void dump_embeddings(const Checkpoint& ck, const std::string& env_tag, int n_rollouts,
                     std::uint64_t seed, const std::string& out_path, const EnvOptions& opt) {
    if (n_rollouts < 1) throw InputError("dump-embeddings needs at least one rollout");
    auto env = make_env(env_tag, opt);
    const auto& spec = env->spec();
    if (spec.state_dim != ck.state_dim || spec.action_dim != ck.action_dim ||
        spec.goal_dim != ck.goal_dim) {
        throw InputError("checkpoint dimensions do not match env '" + env_tag + "'");
    }

    int E = ck.embed_dim;
    std::string csv = "episode,step";
    for (int e = 0; e < E; ++e) csv += ",psi_" + std::to_string(e);
    for (int e = 0; e < E; ++e) csv += ",phi_" + std::to_string(e);
    csv += ",q_value\n";

    auto append_row = [&](int episode, int step, const Vec& psi, const Vec& phi, double q) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d,%d", episode, step);
        csv += buf;
        for (double v : psi) {
            std::snprintf(buf, sizeof(buf), ",%.12g", v);
            csv += buf;
        }
        for (double v : phi) {
            std::snprintf(buf, sizeof(buf), ",%.12g", v);
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.12g\n", q);
        csv += buf;
    };

    for (int r = 0; r < n_rollouts; ++r) {
        Rng rng(derive_seed(seed, "dump", static_cast<uint64_t>(r)));
        Vec goal = env->sample_goal(rng);
        Vec s = env->reset(goal, rng);
        Vec phi_g = mlp_forward(ck.enc.phi, goal);
        append_row(r, -1, Vec(E, 0.0), phi_g, 0.0);

        for (int t = 0; t <= spec.episode_len; ++t) {
            Vec a = policy_mean_action(ck.pi, s, goal, spec.action_lo, spec.action_hi);
            Vec sa;
            sa.reserve(s.size() + a.size());
            sa.insert(sa.end(), s.begin(), s.end());
            sa.insert(sa.end(), a.begin(), a.end());
            Vec psi = mlp_forward(ck.enc.psi, sa);
            double q = dot(psi.data(), phi_g.data(), E);
            append_row(r, t, psi, phi_g, q);
            if (t < spec.episode_len) {
                StepResult step = env->step(s, a, goal, t, rng);
                s = std::move(step.next_state);
            }
        }
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    out << csv;
}

}  // namespace visa
