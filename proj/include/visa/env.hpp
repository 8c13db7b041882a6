#pragma once

#include <memory>
#include <string>
#include <vector>

#include "visa/mat.hpp"
#include "visa/rng.hpp"

namespace visa {

struct GoalEnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    int goal_dim = 0;  // goal space is a subset of state space
    double action_lo = -1.0;
    double action_hi = 1.0;
    int episode_len = 0;        // T: time-limit termination only
    double success_radius = 0;  // epsilon for the goal ball
    // > 0 for tabular envs: actions are representative reals for {0, ..., n-1}
    int discrete_action_count = 0;
};

struct StepResult {
    Vec next_state;
    bool success = false;   // distance(next_state, goal) <= success_radius
    bool terminal = false;  // step_index + 1 == episode_len
};

// Goal-conditioned environment with no scalar reward: training consumes only
// states, actions and the epsilon-ball success flag. Dynamics are pure
// functions of (state, action, rng), so instances carry no mutable state and
// the caller owns the episode clock.
class GoalEnv {
  public:
    virtual ~GoalEnv() = default;

    const GoalEnvSpec& spec() const { return spec_; }
    const std::string& tag() const { return tag_; }

    // Initial state draw; `goal` is validated but does not shift the
    // distribution in any of the bundled tasks.
    virtual Vec reset(const Vec& goal, Rng& rng) const = 0;

    StepResult step(const Vec& state, const Vec& action, const Vec& goal, int step_index,
                    Rng& rng) const;

    virtual Vec sample_goal(Rng& rng) const = 0;

    // Task metric between a state and a goal (L2, circular, ...).
    virtual double goal_distance(const Vec& state, const Vec& goal) const = 0;

    bool is_success(const Vec& state, const Vec& goal) const {
        return goal_distance(state, goal) <= spec_.success_radius;
    }

    virtual void validate_goal(const Vec& goal) const = 0;

  protected:
    virtual Vec dynamics(const Vec& state, const Vec& action, Rng& rng) const = 0;

    GoalEnvSpec spec_;
    std::string tag_;
};

struct EnvOptions {
    int episode_len = 0;  // 0 keeps the env default (50 continuous, 20 chain)
    int chain_n = 5;
    double chain_p_forward = 0.7;
};

// Tags: point_reach, point_reach_wall, valve_turn, chain.
std::unique_ptr<GoalEnv> make_env(const std::string& tag, const EnvOptions& opt = {});

// Transition tensor for the n-state chain used by the oracles: kernel[a](s,s')
// with a=0 stay, a=1 forward (+1 w.p. p_forward, else stay; last state
// absorbing). Every row is a probability vector.
std::vector<Mat> chain_mdp_kernel(int n, double p_forward);

}  // namespace visa
