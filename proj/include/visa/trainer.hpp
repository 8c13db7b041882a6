#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visa/checkpoint.hpp"
#include "visa/config.hpp"
#include "visa/env.hpp"

namespace visa {

struct TrainResult {
    std::string metrics_path;
    std::string checkpoint_path;
    double final_success = 0.0;
    double best_success = 0.0;
    // Coverage statistics over every critic batch drawn during the run:
    // mean reachability score and 20-bin histograms over [0, 1] of the
    // visited and augmented samples.
    double mean_reach_visited = 0.0;
    double mean_reach_augmented = 0.0;
    std::vector<long> reach_hist_visited = std::vector<long>(20, 0);
    std::vector<long> reach_hist_augmented = std::vector<long>(20, 0);
};

// Full training run: rollout collection, critic/actor updates, periodic
// evaluation. Writes <out_dir>/metrics.csv, <out_dir>/checkpoint.bin and
// <out_dir>/config.txt; byte-identical outputs for identical config.
TrainResult train(const TrainConfig& cfg, const std::string& out_dir);

// Greedy (mean-action) success rate over n_episodes fresh goals. An episode
// succeeds if any visited state enters the goal ball.
double evaluate(const Checkpoint& ck, const std::string& env_tag, int n_episodes,
                std::uint64_t seed, const EnvOptions& opt = {});

// One train() per (variant, seed). Variants name methods or augmentation
// tags ("strong_unbias", "random_goal", ..., "crl_cpc", "crl_nce",
// "only_augment", "visa", "none"). Baselines without augmentation train on a
// doubled batch so visited-state draw counts match the augmented methods.
// Writes per-run directories plus <out_dir>/summary.json; returns the
// summary path.
std::string run_ablation(const TrainConfig& base, const std::vector<std::string>& variants,
                         const std::vector<std::uint64_t>& seeds, const std::string& out_dir);

// Trains InfoNCE encoders on rho-correlated Gaussian pairs and records
// lower/upper bound estimates next to the analytic MI, one CSV row per rho.
void mi_bench(const std::vector<double>& rhos, int batch, int steps, std::uint64_t seed,
              const std::string& out_path);

// Greedy rollouts from a trained checkpoint; one CSV row per (rollout, step)
// holding psi(s, a), phi(goal) and their dot product, plus one goal row per
// rollout (step -1, zero psi).
void dump_embeddings(const Checkpoint& ck, const std::string& env_tag, int n_rollouts,
                     std::uint64_t seed, const std::string& out_path,
                     const EnvOptions& opt = {});

}  // namespace visa
