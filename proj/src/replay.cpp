#include "visa/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "visa/errors.hpp"

namespace visa {

ReplayBuffer::ReplayBuffer(size_t capacity_episodes) : capacity_(capacity_episodes) {
    if (capacity_ < 1) throw ConfigError("replay: capacity must be >= 1");
    ring_.reserve(std::min<size_t>(capacity_, 4096));
}

void ReplayBuffer::append(Trajectory t) {
    if (t.states.rows != t.actions.rows + 1)
        throw InputError("replay: trajectory needs exactly T+1 states for T actions");
    if (t.actions.rows < 1) throw InputError("replay: empty trajectory");
    if (!t.states.all_finite() || !t.actions.all_finite())
        throw InputError("replay: non-finite trajectory data");
    t.episode_id = next_id_++;
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(t));
    } else {
        ring_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

const Trajectory& ReplayBuffer::at(size_t i) const {
    if (i >= ring_.size()) throw InputError("replay: index out of range");
    if (ring_.size() < capacity_) return ring_[i];
    return ring_[(head_ + i) % capacity_];
}

AugTag parse_aug_tag(const std::string& s) {
    if (s == "none") return AugTag::none;
    if (s == "strong_unbias") return AugTag::strong_unbias;
    if (s == "middle_unbias") return AugTag::middle_unbias;
    if (s == "weak_unbias") return AugTag::weak_unbias;
    if (s == "random_time") return AugTag::random_time;
    if (s == "random_goal") return AugTag::random_goal;
    if (s == "only_augment") return AugTag::only_augment;
    throw ConfigError("unknown augmentation tag: " + s);
}

std::string to_string(AugTag tag) {
    switch (tag) {
        case AugTag::none: return "none";
        case AugTag::strong_unbias: return "strong_unbias";
        case AugTag::middle_unbias: return "middle_unbias";
        case AugTag::weak_unbias: return "weak_unbias";
        case AugTag::random_time: return "random_time";
        case AugTag::random_goal: return "random_goal";
        case AugTag::only_augment: return "only_augment";
    }
    return "?";
}

namespace {

// Draws d in {1..m} with probability proportional to weights[d-1].
int sample_weighted_offset(const std::vector<double>& weights, Rng& rng) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = rng.uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(weights.size());  // u landed on the rounding edge
}

std::vector<double> geometric_weights(double gamma, int m) {
    std::vector<double> w(m);
    double g = 1.0;
    for (int d = 1; d <= m; ++d) {
        w[d - 1] = (1.0 - gamma) * g;
        g *= gamma;
    }
    return w;
}

}  // namespace

int sample_visited_index(int T, int t, double gamma, Rng& rng) {
    if (t < 0 || t >= T) throw InputError("sample_visited_index: need 0 <= t < T");
    if (gamma <= 0.0 || gamma >= 1.0) throw InputError("sample_visited_index: gamma in (0,1)");
    return t + sample_weighted_offset(geometric_weights(gamma, T - t), rng);
}

double strong_unbias_weight(double gamma_aug, int d) {
    return 1.0 - (1.0 - gamma_aug) * std::pow(gamma_aug, d - 1);
}

std::pair<size_t, int> sample_augmented_index(int T, int j, const AugmentationSpec& spec, Rng& rng,
                                              const ReplayBuffer& buffer, size_t source_traj) {
    if (spec.tag == AugTag::none) throw InputError("sample_augmented_index: tag is none");
    if (j <= 0 || j > T) throw InputError("sample_augmented_index: need 0 < j <= T");
    if (spec.gamma_aug <= 0.0 || spec.gamma_aug >= 1.0)
        throw InputError("sample_augmented_index: gamma_aug in (0,1)");

    switch (spec.tag) {
        case AugTag::strong_unbias:
        case AugTag::only_augment: {
            if (j == T) return {source_traj, j};
            std::vector<double> w(T - j);
            for (int d = 1; d <= T - j; ++d) w[d - 1] = strong_unbias_weight(spec.gamma_aug, d);
            return {source_traj, j + sample_weighted_offset(w, rng)};
        }
        case AugTag::weak_unbias: {
            if (j == T) return {source_traj, j};
            return {source_traj, j + sample_weighted_offset(geometric_weights(spec.gamma_aug, T - j), rng)};
        }
        case AugTag::middle_unbias: {
            if (j == T) return {source_traj, j};
            double g_mid = std::pow(spec.gamma_aug, spec.middle_exponent);
            return {source_traj, j + sample_weighted_offset(geometric_weights(g_mid, T - j), rng)};
        }
        case AugTag::random_time: {
            int k = rng.uniform_int(T);  // {0..T-1}, shift past j
            if (k >= j) ++k;
            return {source_traj, k};
        }
        case AugTag::random_goal: {
            if (buffer.size() < 2)
                throw InputError("sample_augmented_index: random_goal needs >= 2 trajectories");
            size_t other = static_cast<size_t>(rng.uniform_int(static_cast<int>(buffer.size()) - 1));
            if (other >= source_traj) ++other;
            int horizon = buffer.at(other).horizon();
            return {other, rng.uniform_int(horizon + 1)};
        }
        case AugTag::none: break;
    }
    throw InputError("sample_augmented_index: unreachable tag");
}

double reachability_score(int t, int k, int T) {
    if (T < 1) throw InputError("reachability_score: T must be >= 1");
    return static_cast<double>(std::abs(k - t)) / static_cast<double>(T);
}

double ContrastiveBatch::mean_reach_visited() const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) acc += reachability_score(t[i], j[i], T[i]);
    return acc / size();
}

double ContrastiveBatch::mean_reach_augmented() const {
    if (!has_aug) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < size(); ++i)
        acc += (k_traj[i] == traj[i]) ? reachability_score(t[i], k[i], T[i]) : 1.0;
    return acc / size();
}

ContrastiveBatch sample_batch(const ReplayBuffer& buffer, int B, double gamma,
                              const AugmentationSpec& spec, Rng& rng) {
    if (B < 2) throw InputError("sample_batch: B must be >= 2");
    if (buffer.size() < 2) throw InputError("sample_batch: buffer needs >= 2 trajectories");

    size_t n = buffer.size();
    std::vector<size_t> picks(B);
    if (n >= static_cast<size_t>(B)) {
        // Sample B distinct trajectories (partial Fisher-Yates) so no row
        // serves as an in-batch negative for a same-trajectory anchor; each
        // row's marginal stays uniform over the buffer.
        std::vector<size_t> pool(n);
        std::iota(pool.begin(), pool.end(), size_t{0});
        for (int i = 0; i < B; ++i) {
            int r = i + rng.uniform_int(static_cast<int>(n) - i);
            std::swap(pool[i], pool[r]);
            picks[i] = pool[i];
        }
    } else {
        for (int i = 0; i < B; ++i) picks[i] = static_cast<size_t>(rng.uniform_int(static_cast<int>(n)));
    }

    const Trajectory& first = buffer.at(picks[0]);
    int state_dim = first.states.cols;
    int action_dim = first.actions.cols;
    int goal_dim = static_cast<int>(first.goal.size());

    ContrastiveBatch b;
    b.anchor_state = Mat(B, state_dim);
    b.anchor_action = Mat(B, action_dim);
    b.visited = Mat(B, state_dim);
    b.goal = Mat(B, goal_dim);
    b.has_aug = spec.tag != AugTag::none;
    if (b.has_aug) b.augmented = Mat(B, state_dim);
    b.traj.resize(B);
    b.t.resize(B);
    b.j.resize(B);
    b.T.resize(B);
    b.k.assign(B, 0);
    b.k_traj.assign(B, 0);

    for (int i = 0; i < B; ++i) {
        const Trajectory& tr = buffer.at(picks[i]);
        int T = tr.horizon();
        int t = rng.uniform_int(T);
        int j = sample_visited_index(T, t, gamma, rng);
        b.traj[i] = picks[i];
        b.t[i] = t;
        b.j[i] = j;
        b.T[i] = T;
        std::copy(tr.states.row(t), tr.states.row(t) + state_dim, b.anchor_state.row(i));
        std::copy(tr.actions.row(t), tr.actions.row(t) + action_dim, b.anchor_action.row(i));
        std::copy(tr.states.row(j), tr.states.row(j) + state_dim, b.visited.row(i));
        std::copy(tr.goal.begin(), tr.goal.end(), b.goal.row(i));
        if (b.has_aug) {
            auto [ktraj, k] = sample_augmented_index(T, j, spec, rng, buffer, picks[i]);
            b.k_traj[i] = ktraj;
            b.k[i] = k;
            const Trajectory& ktr = buffer.at(ktraj);
            std::copy(ktr.states.row(k), ktr.states.row(k) + state_dim, b.augmented.row(i));
        }
    }
    return b;
}

}  // namespace visa
