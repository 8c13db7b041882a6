#include "visa/env.hpp"

#include <algorithm>
#include <cmath>

#include "visa/errors.hpp"

namespace visa {

namespace {

constexpr double kPi = 3.141592653589793;

double l2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

void check_action(const Vec& action, int dim) {
    if (static_cast<int>(action.size()) != dim)
        throw InputError("env: action dimension mismatch");
    for (double v : action)
        if (!std::isfinite(v)) throw InputError("env: non-finite action");
}

// Maps any angle into [-pi, pi).
double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

class PointReach : public GoalEnv {
  public:
    explicit PointReach(bool wall, int episode_len) : wall_(wall) {
        spec_.state_dim = 2;
        spec_.action_dim = 2;
        spec_.goal_dim = 2;
        spec_.action_lo = -1.0;
        spec_.action_hi = 1.0;
        spec_.episode_len = episode_len > 0 ? episode_len : 50;
        spec_.success_radius = 0.1;
        tag_ = wall ? "point_reach_wall" : "point_reach";
    }

    Vec reset(const Vec& goal, Rng& rng) const override {
        validate_goal(goal);
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }

    Vec sample_goal(Rng& rng) const override {
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }

    double goal_distance(const Vec& state, const Vec& goal) const override {
        return l2(state, goal);
    }

    void validate_goal(const Vec& goal) const override {
        if (goal.size() != 2 || std::abs(goal[0]) > 1.0 || std::abs(goal[1]) > 1.0 ||
            !std::isfinite(goal[0]) || !std::isfinite(goal[1]))
            throw InputError("point_reach: goal outside [-1,1]^2");
    }

  protected:
    Vec dynamics(const Vec& state, const Vec& action, Rng&) const override {
        double ax = std::clamp(action[0], -1.0, 1.0);
        double ay = std::clamp(action[1], -1.0, 1.0);
        Vec next = {std::clamp(state[0] + 0.05 * ax, -1.0, 1.0),
                    std::clamp(state[1] + 0.05 * ay, -1.0, 1.0)};
        if (wall_ && (state[0] > 0.0) != (next[0] > 0.0) && state[0] != next[0]) {
            // The segment crosses the plane x=0; block it at the wall
            // x=0, |y|<=0.8 so no step passes through the wall interior.
            double tau = (0.0 - state[0]) / (next[0] - state[0]);
            double y_hit = state[1] + tau * (next[1] - state[1]);
            if (std::abs(y_hit) <= 0.8) {
                double side = state[0] > 0.0 ? 1e-6 : -1e-6;
                next = {side, y_hit};
            }
        }
        return next;
    }

  private:
    bool wall_;
};

class ValveTurn : public GoalEnv {
  public:
    explicit ValveTurn(int episode_len) {
        spec_.state_dim = 1;
        spec_.action_dim = 1;
        spec_.goal_dim = 1;
        spec_.action_lo = -1.0;
        spec_.action_hi = 1.0;
        spec_.episode_len = episode_len > 0 ? episode_len : 50;
        spec_.success_radius = 0.15;
        tag_ = "valve_turn";
    }

    Vec reset(const Vec& goal, Rng& rng) const override {
        validate_goal(goal);
        return {rng.uniform(-kPi, kPi)};
    }

    Vec sample_goal(Rng& rng) const override { return {rng.uniform(-kPi, kPi)}; }

    double goal_distance(const Vec& state, const Vec& goal) const override {
        double d = std::abs(wrap_angle(state[0] - goal[0]));
        return d;
    }

    void validate_goal(const Vec& goal) const override {
        if (goal.size() != 1 || !std::isfinite(goal[0]) || goal[0] < -kPi || goal[0] >= kPi)
            throw InputError("valve_turn: goal outside [-pi, pi)");
    }

  protected:
    Vec dynamics(const Vec& state, const Vec& action, Rng&) const override {
        double a = std::clamp(action[0], -1.0, 1.0);
        return {wrap_angle(state[0] + 0.1 * a)};
    }
};

class ChainMdp : public GoalEnv {
  public:
    ChainMdp(int n, double p_forward, int episode_len) : n_(n), p_forward_(p_forward) {
        if (n < 2) throw ConfigError("chain: n must be >= 2");
        if (p_forward <= 0.0 || p_forward > 1.0)
            throw ConfigError("chain: p_forward must lie in (0, 1]");
        spec_.state_dim = n;  // one-hot
        spec_.action_dim = 1;
        spec_.goal_dim = n;
        spec_.action_lo = 0.0;
        spec_.action_hi = 1.0;
        spec_.episode_len = episode_len > 0 ? episode_len : 20;
        spec_.success_radius = 0.5;  // one-hot vectors differ by sqrt(2)
        spec_.discrete_action_count = 2;
        tag_ = "chain";
    }

    Vec reset(const Vec& goal, Rng&) const override {
        validate_goal(goal);
        return one_hot(0);
    }

    Vec sample_goal(Rng& rng) const override { return one_hot(rng.uniform_int(n_)); }

    double goal_distance(const Vec& state, const Vec& goal) const override {
        return l2(state, goal);
    }

    void validate_goal(const Vec& goal) const override {
        if (static_cast<int>(goal.size()) != n_) throw InputError("chain: goal dimension mismatch");
        state_index(goal);  // throws unless one-hot
    }

    int state_index(const Vec& onehot) const {
        int idx = -1;
        for (int i = 0; i < n_; ++i) {
            if (onehot[i] == 1.0) {
                if (idx >= 0) throw InputError("chain: state is not one-hot");
                idx = i;
            } else if (onehot[i] != 0.0) {
                throw InputError("chain: state is not one-hot");
            }
        }
        if (idx < 0) throw InputError("chain: state is not one-hot");
        return idx;
    }

    Vec one_hot(int i) const {
        Vec v(n_, 0.0);
        v[i] = 1.0;
        return v;
    }

  protected:
    Vec dynamics(const Vec& state, const Vec& action, Rng& rng) const override {
        int s = state_index(state);
        bool forward = action[0] >= 0.5;
        int next = s;
        if (forward && s + 1 < n_ && rng.uniform() < p_forward_) next = s + 1;
        return one_hot(next);
    }

  private:
    int n_;
    double p_forward_;
};

}  // namespace

StepResult GoalEnv::step(const Vec& state, const Vec& action, const Vec& goal, int step_index,
                         Rng& rng) const {
    check_action(action, spec_.action_dim);
    if (static_cast<int>(state.size()) != spec_.state_dim)
        throw InputError("env: state dimension mismatch");
    StepResult r;
    r.next_state = dynamics(state, action, rng);
    r.success = is_success(r.next_state, goal);
    r.terminal = step_index + 1 >= spec_.episode_len;
    return r;
}

std::unique_ptr<GoalEnv> make_env(const std::string& tag, const EnvOptions& opt) {
    if (tag == "point_reach") return std::make_unique<PointReach>(false, opt.episode_len);
    if (tag == "point_reach_wall") return std::make_unique<PointReach>(true, opt.episode_len);
    if (tag == "valve_turn") return std::make_unique<ValveTurn>(opt.episode_len);
    if (tag == "chain")
        return std::make_unique<ChainMdp>(opt.chain_n, opt.chain_p_forward, opt.episode_len);
    throw ConfigError("unknown env tag: " + tag);
}

std::vector<Mat> chain_mdp_kernel(int n, double p_forward) {
    if (n < 2) throw ConfigError("chain_mdp_kernel: n must be >= 2");
    if (p_forward <= 0.0 || p_forward > 1.0)
        throw ConfigError("chain_mdp_kernel: p_forward must lie in (0, 1]");
    std::vector<Mat> kernel(2, Mat(n, n));
    for (int s = 0; s < n; ++s) {
        kernel[0](s, s) = 1.0;  // stay
        if (s + 1 < n) {
            kernel[1](s, s + 1) = p_forward;
            kernel[1](s, s) = 1.0 - p_forward;
        } else {
            kernel[1](s, s) = 1.0;  // last state absorbs under forward
        }
    }
    return kernel;
}

}  // namespace visa
