#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "visa/contrastive.hpp"
#include "visa/replay.hpp"

namespace visa {

// Everything a training run needs, loadable from a flat key = value file.
// Defaults are the desk-scale baseline; see keys() for the full surface.
struct TrainConfig {
    std::string env = "point_reach";
    Method method = Method::visa;
    AugTag aug = AugTag::strong_unbias;
    double gamma = 0.99;        // visited-state sampler decay
    double gamma_aug = 0.99;    // augmentation sampler decay
    SafeConvention safe_convention = SafeConvention::prose;
    double lambda_club = 1.0;
    int batch = 256;
    int embed_dim = 16;
    std::vector<int> hidden = {64, 64};
    double lr_critic = 3e-4;
    double lr_actor = 3e-4;
    double alpha = 0.05;  // entropy weight in the actor loss
    long total_env_steps = 200000;
    int updates_per_step = 1;
    long eval_every = 5000;
    int eval_episodes = 50;
    int buffer_capacity = 1000;  // episodes
    std::uint64_t seed = 0;
    long warmup_steps = 2000;  // uniform-random action collection before updates
    bool bo_detach_base = false;
    // Weight of mean(logsumexp(score_row)^2) added to the critic update.
    // InfoNCE is invariant to per-row shifts, so without this the logits
    // drift unboundedly during RL training and the actor signal degrades.
    double logit_penalty = 0.01;
    // Freeze the actor and collect with a uniform-random policy; the critic
    // classifies the visited state against the whole state alphabet. Only
    // valid on tabular envs (chain).
    bool critic_only = false;
    int episode_len = 0;  // 0 keeps the env default
    int chain_n = 5;
    double chain_p_forward = 0.7;
};

// Ordered list of recognized keys (one CLI flag per key mirrors these).
const std::vector<std::string>& config_keys();

// Parse `key = value` lines ('#' starts a comment, blank lines ignored).
// Unknown keys, duplicate keys and malformed lines raise ConfigError.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Apply typed values onto cfg; raises ConfigError on bad value or key.
void apply_config(TrainConfig& cfg, const std::map<std::string, std::string>& kv);

// Full semantic validation: ranges, method/aug compatibility
// (crl_* requires aug = none; visa and only_augment require aug != none),
// env tag existence, critic_only restrictions.
void validate_config(const TrainConfig& cfg);

TrainConfig load_config(const std::string& path,
                        const std::map<std::string, std::string>& overrides = {});

// The config rendered back as a parseable key = value file.
std::string config_to_string(const TrainConfig& cfg);

}  // namespace visa
