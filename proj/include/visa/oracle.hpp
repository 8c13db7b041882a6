#pragma once

#include <vector>

#include "visa/mat.hpp"

namespace visa {

// Tabular MDP for exact ground-truth computations. One row-stochastic
// (n x n) transition matrix per action; policy rows are distributions
// over actions.
struct TabularMDP {
    std::vector<Mat> transition;  // transition[a](s, s') = P(s' | s, a)
    Mat policy;                   // (n, A), policy(s, a) = pi(a | s)
    double gamma = 0.99;

    int num_states() const { return policy.rows; }
    int num_actions() const { return policy.cols; }
};

// Throws InputError if transition/policy rows are not probability vectors,
// shapes disagree, or gamma is outside (0, 1).
void validate_mdp(const TabularMDP& mdp);

// Exact discounted state-occupancy of the post-action state distribution:
//   mu(g) = (1 - gamma) * sum_{t>=0} gamma^t P(s_{1+t} = g | s_0=s, a_0=a)
// computed by a dense linear solve of (I - gamma * P_pi^T) x = (1-gamma) d0
// where d0 = P(. | s, a). The result is a probability vector.
Mat discounted_occupancy(const TabularMDP& mdp, int s, int a);

// All (s, a) anchors stacked; row index s * A + a.
Mat discounted_occupancy_all(const TabularMDP& mdp);

// Joint pmf over finite alphabet triples (x, y, z).
struct DiscreteJoint {
    int nx = 0, ny = 0, nz = 0;
    std::vector<double> p;  // size nx*ny*nz, index (i*ny + j)*nz + k

    double& at(int i, int j, int k) { return p[(i * ny + j) * nz + k]; }
    double at(int i, int j, int k) const { return p[(i * ny + j) * nz + k]; }
};

DiscreteJoint make_joint(int nx, int ny, int nz);

// Throws InputError unless entries are non-negative and sum to 1 within 1e-12.
void validate_joint(const DiscreteJoint& joint);

enum class MiKind {
    I_xy,          // I(X; Y)
    I_x_yz,        // I(X; (Y, Z))
    I_xz_given_y,  // I(X; Z | Y)
};

// Exact plug-in (conditional) mutual information in nats by enumeration,
// with the 0 * log 0 = 0 convention. The chain rule
// I(X;Y) = I(X;(Y,Z)) - I(X;Z|Y) holds exactly for every valid joint.
double discrete_mi(const DiscreteJoint& joint, MiKind which);

// MI of a bivariate Gaussian with correlation rho: -0.5 * ln(1 - rho^2).
// Throws InputError if |rho| >= 1.
double gaussian_mi(double rho);

}  // namespace visa
