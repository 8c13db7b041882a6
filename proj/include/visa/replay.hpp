#pragma once

#include <string>
#include <vector>

#include "visa/mat.hpp"
#include "visa/rng.hpp"

namespace visa {

// One episode: states[0..T], actions[0..T-1], and the goal the behavior
// policy was commanded during collection. episode_id is assigned on append.
struct Trajectory {
    Mat states;   // (T+1, state_dim)
    Mat actions;  // (T, action_dim)
    std::vector<double> goal;
    long episode_id = -1;

    int horizon() const { return actions.rows; }
};

// Ring of whole episodes; oldest evicted first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity_episodes);

    void append(Trajectory t);

    size_t size() const { return ring_.size(); }
    const Trajectory& at(size_t i) const;  // i in [0, size), oldest first
    long episodes_appended() const { return next_id_; }

  private:
    std::vector<Trajectory> ring_;
    size_t capacity_;
    size_t head_ = 0;  // slot the next append overwrites once full
    long next_id_ = 0;
};

enum class AugTag { none, strong_unbias, middle_unbias, weak_unbias, random_time, random_goal, only_augment };

AugTag parse_aug_tag(const std::string& s);
std::string to_string(AugTag tag);

struct AugmentationSpec {
    AugTag tag = AugTag::none;
    double gamma_aug = 0.99;
    double middle_exponent = 0.25;  // decay flattening for middle_unbias
};

// Visited-state index: j = t + delta with P(delta=d) proportional to
// (1-gamma)*gamma^(d-1) over d in {1, ..., T-t} (truncated geometric,
// renormalized). Requires 0 <= t < T.
int sample_visited_index(int T, int t, double gamma, Rng& rng);

// Augmented-state index for a visited state at j of trajectory
// `source_traj`. Same-trajectory tags return (source_traj, k); random_goal
// draws a different trajectory uniformly. Offsets d = k - j:
//   strong_unbias / only_augment : w_d = 1 - (1-g)*g^(d-1), increasing in d
//   weak_unbias                  : w_d = (1-g)*g^(d-1)
//   middle_unbias                : weak_unbias with g -> g^middle_exponent
//   random_time                  : k uniform over {0..T} \ {j}
//   random_goal                  : uniform other trajectory, uniform k
// Future-only tags fall back to k = j when j = T.
std::pair<size_t, int> sample_augmented_index(int T, int j, const AugmentationSpec& spec, Rng& rng,
                                              const ReplayBuffer& buffer, size_t source_traj);

// Unnormalized strong_unbias weight for offset d >= 1.
double strong_unbias_weight(double gamma_aug, int d);

// N/T coverage score between an anchor index and a same-trajectory sample;
// cross-trajectory rows are scored 1 (N = T) by the batch assembler.
double reachability_score(int t, int k, int T);

// Aligned row arrays for one contrastive update. Negatives are realized
// in-batch: rows l != i act as the negatives of row i, which is why rows are
// drawn from distinct trajectories whenever the buffer allows it.
struct ContrastiveBatch {
    Mat anchor_state;   // (B, state_dim)
    Mat anchor_action;  // (B, action_dim)
    Mat visited;        // (B, state_dim)   s_v at index j > t, same trajectory
    Mat augmented;      // (B, state_dim)   s_a, empty when spec.tag == none
    Mat goal;           // (B, goal_dim)    exploration goal of the anchor row
    std::vector<size_t> traj;    // buffer index of the anchor trajectory
    std::vector<int> t, j, k;    // anchor / visited / augmented step indices
    std::vector<int> T;          // horizon of the anchor trajectory
    std::vector<size_t> k_traj;  // trajectory the augmented state came from
    bool has_aug = false;

    int size() const { return anchor_state.rows; }
    double mean_reach_visited() const;
    double mean_reach_augmented() const;  // 0 when has_aug is false
};

// B rows, each: uniform trajectory, uniform anchor t in {0..T-1}, visited
// index via sample_visited_index, augmented index per spec. Buffer must hold
// at least two trajectories and B >= 2. Trajectories are sampled without
// replacement when size() >= B so in-batch negatives come from other
// episodes, matching how negatives are defined.
ContrastiveBatch sample_batch(const ReplayBuffer& buffer, int B, double gamma,
                              const AugmentationSpec& spec, Rng& rng);

}  // namespace visa
