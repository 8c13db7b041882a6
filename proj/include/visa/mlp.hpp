#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "visa/graph.hpp"
#include "visa/mat.hpp"
#include "visa/rng.hpp"

namespace visa {

enum class Activation { relu, tanh };

// Fully-connected network parameters. Hidden layers use `hidden_act`, the
// output layer is linear. Also reused as the container for gradients and
// optimizer moments, which are shaped exactly like the parameters.
struct ParamSet {
    struct Layer {
        Mat W;  // (out, in)
        Mat b;  // (1, out)
    };
    std::vector<Layer> layers;
    Activation hidden_act = Activation::relu;

    size_t count() const;       // total number of scalar parameters
    void fill(double v);
    bool all_finite() const;
};

// Layer sizes in -> hidden... -> out, weights and biases drawn uniformly from
// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ParamSet mlp_init(int in_dim, const std::vector<int>& hidden, int out_dim, Rng& rng,
                  Activation hidden_act = Activation::relu);

ParamSet zeros_like(const ParamSet& p);

// Pure forward pass (no graph, no allocations beyond the output).
std::vector<double> mlp_forward(const ParamSet& p, const std::vector<double>& x);
Mat mlp_forward(const ParamSet& p, const Mat& x);  // batched, rows are inputs

// Builds the forward pass on a graph. Gradients accumulate into `grads`
// (same shape as p); pass nullptr to treat the network as frozen.
Graph::Value mlp_apply(Graph& g, const ParamSet& p, ParamSet* grads, Graph::Value x);

// Adam with bias correction.
struct OptState {
    ParamSet m, v;
    long step = 0;
};

OptState opt_state_for(const ParamSet& p);

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

void opt_step(ParamSet& params, const ParamSet& grads, OptState& state, const AdamConfig& cfg);

// Flat views over all parameter matrices (W0, b0, W1, b1, ...), used by the
// checkpoint writer and the finite-difference checker.
std::vector<Mat*> mat_refs(ParamSet& p);
std::vector<const Mat*> mat_refs(const ParamSet& p);

// Central-difference gradient check. Perturbs every scalar in `at` (or a
// seeded subsample of 10^4 coordinates when there are more than that),
// re-evaluates `loss`, and returns the largest relative error against
// `analytic`, with rel = |fd - an| / max(1, |fd|, |an|).
double finite_diff_check(const std::function<double(const std::vector<Mat>&)>& loss,
                         const std::vector<Mat>& at, const std::vector<Mat>& analytic,
                         double eps, uint64_t subsample_seed = 0);

}  // namespace visa
