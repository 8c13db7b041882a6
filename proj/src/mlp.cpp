#include "visa/mlp.hpp"

#include <cmath>

#include "visa/errors.hpp"

namespace visa {

size_t ParamSet::count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
}

void ParamSet::fill(double v) {
    for (auto& l : layers) {
        l.W.fill(v);
        l.b.fill(v);
    }
}

bool ParamSet::all_finite() const {
    for (const auto& l : layers)
        if (!l.W.all_finite() || !l.b.all_finite()) return false;
    return true;
}

ParamSet mlp_init(int in_dim, const std::vector<int>& hidden, int out_dim, Rng& rng,
                  Activation hidden_act) {
    if (in_dim < 1 || out_dim < 1) throw InputError("mlp_init: dimensions must be positive");
    ParamSet p;
    p.hidden_act = hidden_act;
    std::vector<int> dims;
    dims.push_back(in_dim);
    for (int h : hidden) {
        if (h < 1) throw InputError("mlp_init: hidden sizes must be positive");
        dims.push_back(h);
    }
    dims.push_back(out_dim);
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        ParamSet::Layer l;
        l.W = Mat(dims[i + 1], dims[i]);
        l.b = Mat(1, dims[i + 1]);
        double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        for (double& w : l.W.a) w = rng.uniform(-bound, bound);
        for (double& b : l.b.a) b = rng.uniform(-bound, bound);
        p.layers.push_back(std::move(l));
    }
    return p;
}

ParamSet zeros_like(const ParamSet& p) {
    ParamSet z;
    z.hidden_act = p.hidden_act;
    z.layers.reserve(p.layers.size());
    for (const auto& l : p.layers)
        z.layers.push_back({Mat(l.W.rows, l.W.cols), Mat(l.b.rows, l.b.cols)});
    return z;
}

Mat mlp_forward(const ParamSet& p, const Mat& x) {
    if (p.layers.empty()) throw InputError("mlp_forward: empty ParamSet");
    if (x.cols != p.layers.front().W.cols)
        throw ConfigError("mlp_forward: input dim " + std::to_string(x.cols) + " != expected " +
                          std::to_string(p.layers.front().W.cols));
    Mat cur = x;
    for (size_t li = 0; li < p.layers.size(); ++li) {
        const Mat& W = p.layers[li].W;
        const Mat& b = p.layers[li].b;
        Mat next(cur.rows, W.rows);
        for (int i = 0; i < cur.rows; ++i) {
            const double* xi = cur.row(i);
            double* yi = next.row(i);
            for (int o = 0; o < W.rows; ++o) yi[o] = dot(xi, W.row(o), cur.cols) + b.a[o];
        }
        if (li + 1 < p.layers.size()) {
            if (p.hidden_act == Activation::relu)
                for (double& v : next.a) v = std::max(v, 0.0);
            else
                for (double& v : next.a) v = std::tanh(v);
        }
        cur = std::move(next);
    }
    if (!cur.all_finite()) throw NumericError("mlp_forward: non-finite output");
    return cur;
}

std::vector<double> mlp_forward(const ParamSet& p, const std::vector<double>& x) {
    Mat out = mlp_forward(p, row_vec(x));
    return out.a;
}

Graph::Value mlp_apply(Graph& g, const ParamSet& p, ParamSet* grads, Graph::Value x) {
    if (p.layers.empty()) throw InputError("mlp_apply: empty ParamSet");
    Graph::Value cur = x;
    for (size_t li = 0; li < p.layers.size(); ++li) {
        Mat* gw = grads ? &grads->layers[li].W : nullptr;
        Mat* gb = grads ? &grads->layers[li].b : nullptr;
        Graph::Value w = g.param(p.layers[li].W, gw);
        Graph::Value b = g.param(p.layers[li].b, gb);
        cur = g.linear(cur, w, b);
        if (li + 1 < p.layers.size())
            cur = (p.hidden_act == Activation::relu) ? g.relu(cur) : g.tanh(cur);
    }
    return cur;
}

OptState opt_state_for(const ParamSet& p) {
    OptState s;
    s.m = zeros_like(p);
    s.v = zeros_like(p);
    s.step = 0;
    return s;
}

void opt_step(ParamSet& params, const ParamSet& grads, OptState& state, const AdamConfig& cfg) {
    if (cfg.lr <= 0.0) throw InputError("opt_step: lr must be positive");
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
        throw InputError("opt_step: betas must lie in [0, 1)");
    if (params.layers.size() != grads.layers.size())
        throw InputError("opt_step: grads shape mismatch");

    state.step += 1;
    double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    auto update = [&](Mat& p, const Mat& g, Mat& m, Mat& v) {
        if (!p.same_shape(g)) throw InputError("opt_step: grads shape mismatch");
        for (size_t i = 0; i < p.size(); ++i) {
            m.a[i] = cfg.beta1 * m.a[i] + (1.0 - cfg.beta1) * g.a[i];
            v.a[i] = cfg.beta2 * v.a[i] + (1.0 - cfg.beta2) * g.a[i] * g.a[i];
            double mh = m.a[i] / c1;
            double vh = v.a[i] / c2;
            p.a[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        }
    };
    for (size_t li = 0; li < params.layers.size(); ++li) {
        update(params.layers[li].W, grads.layers[li].W, state.m.layers[li].W, state.v.layers[li].W);
        update(params.layers[li].b, grads.layers[li].b, state.m.layers[li].b, state.v.layers[li].b);
    }
    if (!params.all_finite()) throw NumericError("opt_step: parameters became non-finite");
}

std::vector<Mat*> mat_refs(ParamSet& p) {
    std::vector<Mat*> out;
    for (auto& l : p.layers) {
        out.push_back(&l.W);
        out.push_back(&l.b);
    }
    return out;
}

std::vector<const Mat*> mat_refs(const ParamSet& p) {
    std::vector<const Mat*> out;
    for (const auto& l : p.layers) {
        out.push_back(&l.W);
        out.push_back(&l.b);
    }
    return out;
}

double finite_diff_check(const std::function<double(const std::vector<Mat>&)>& loss,
                         const std::vector<Mat>& at, const std::vector<Mat>& analytic,
                         double eps, uint64_t subsample_seed) {
    if (eps <= 0.0) throw InputError("finite_diff_check: eps must be positive");
    if (at.size() != analytic.size()) throw InputError("finite_diff_check: grad list size mismatch");

    size_t total = 0;
    for (const Mat& m : at) total += m.size();

    // (matrix index, flat offset) pairs to probe
    std::vector<std::pair<size_t, size_t>> coords;
    const size_t kMaxProbes = 10000;
    if (total <= kMaxProbes) {
        for (size_t mi = 0; mi < at.size(); ++mi)
            for (size_t k = 0; k < at[mi].size(); ++k) coords.emplace_back(mi, k);
    } else {
        Rng rng(subsample_seed == 0 ? 0x9d2c5680u : subsample_seed);
        for (size_t n = 0; n < kMaxProbes; ++n) {
            size_t flat = static_cast<size_t>(rng.uniform_int(static_cast<int>(total)));
            size_t mi = 0;
            while (flat >= at[mi].size()) flat -= at[mi++].size();
            coords.emplace_back(mi, flat);
        }
    }

    std::vector<Mat> work = at;
    double worst = 0.0;
    for (auto [mi, k] : coords) {
        double orig = work[mi].a[k];
        work[mi].a[k] = orig + eps;
        double up = loss(work);
        work[mi].a[k] = orig - eps;
        double dn = loss(work);
        work[mi].a[k] = orig;
        double fd = (up - dn) / (2.0 * eps);
        double an = analytic[mi].a[k];
        double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace visa
