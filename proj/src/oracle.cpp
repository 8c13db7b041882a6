#include "visa/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "visa/errors.hpp"

namespace visa {

namespace {

void check_prob_rows(const Mat& m, const char* what) {
    for (int i = 0; i < m.rows; ++i) {
        double sum = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            double v = m(i, j);
            if (!(v >= 0.0)) {
                throw InputError(std::string(what) + " row " + std::to_string(i) +
                                 " has a negative entry");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw InputError(std::string(what) + " row " + std::to_string(i) +
                             " sums to " + std::to_string(sum) + ", not 1");
        }
    }
}

}  // namespace

void validate_mdp(const TabularMDP& mdp) {
    int n = mdp.num_states();
    int A = mdp.num_actions();
    if (n < 1 || A < 1) throw InputError("empty MDP");
    if (static_cast<int>(mdp.transition.size()) != A) {
        throw InputError("transition tensor has " +
                         std::to_string(mdp.transition.size()) + " actions, policy has " +
                         std::to_string(A));
    }
    for (const Mat& t : mdp.transition) {
        if (t.rows != n || t.cols != n) throw InputError("transition matrix shape mismatch");
        check_prob_rows(t, "transition");
    }
    check_prob_rows(mdp.policy, "policy");
    if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0)) throw InputError("gamma must be in (0, 1)");
}

Mat discounted_occupancy(const TabularMDP& mdp, int s, int a) {
    validate_mdp(mdp);
    int n = mdp.num_states();
    int A = mdp.num_actions();
    if (s < 0 || s >= n || a < 0 || a >= A) throw InputError("state/action out of range");

    // State-to-state kernel under the policy.
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int act = 0; act < A; ++act) v += mdp.policy(i, act) * mdp.transition[act](i, j);
            P(i, j) = v;
        }
    }

    Eigen::VectorXd d0(n);
    for (int j = 0; j < n; ++j) d0(j) = mdp.transition[a](s, j);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * P.transpose();
    Eigen::VectorXd mu = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve((1.0 - mdp.gamma) * d0);

    Mat out(1, n);
    for (int j = 0; j < n; ++j) out(0, j) = mu(j);
    return out;
}

Mat discounted_occupancy_all(const TabularMDP& mdp) {
    int n = mdp.num_states();
    int A = mdp.num_actions();
    Mat out(n * A, n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < A; ++a) {
            Mat row = discounted_occupancy(mdp, s, a);
            for (int j = 0; j < n; ++j) out(s * A + a, j) = row(0, j);
        }
    }
    return out;
}

DiscreteJoint make_joint(int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1) throw InputError("joint alphabet sizes must be positive");
    DiscreteJoint j;
    j.nx = nx;
    j.ny = ny;
    j.nz = nz;
    j.p.assign(static_cast<size_t>(nx) * ny * nz, 0.0);
    return j;
}

void validate_joint(const DiscreteJoint& joint) {
    if (joint.p.size() != static_cast<size_t>(joint.nx) * joint.ny * joint.nz) {
        throw InputError("joint pmf storage does not match alphabet sizes");
    }
    double sum = 0.0;
    for (double v : joint.p) {
        if (!(v >= 0.0)) throw InputError("joint pmf has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InputError("joint pmf sums to " + std::to_string(sum) + ", not 1");
    }
}

namespace {

// p * log(num / den) with the 0 * log 0 convention.
double plogr(double p, double num, double den) {
    if (p <= 0.0) return 0.0;
    return p * std::log(num / den);
}

}  // namespace

double discrete_mi(const DiscreteJoint& joint, MiKind which) {
    validate_joint(joint);
    int nx = joint.nx, ny = joint.ny, nz = joint.nz;

    std::vector<double> px(nx, 0.0), py(ny, 0.0);
    Mat pxy(nx, ny), pyz(ny, nz);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < nz; ++k) {
                double v = joint.at(i, j, k);
                px[i] += v;
                py[j] += v;
                pxy(i, j) += v;
                pyz(j, k) += v;
            }
        }
    }

    double mi = 0.0;
    switch (which) {
        case MiKind::I_xy:
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    mi += plogr(pxy(i, j), pxy(i, j), px[i] * py[j]);
            break;
        case MiKind::I_x_yz:
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nz; ++k) {
                        double v = joint.at(i, j, k);
                        mi += plogr(v, v, px[i] * pyz(j, k));
                    }
            break;
        case MiKind::I_xz_given_y:
            // I(X;Z|Y) = sum p(x,y,z) log[ p(x,y,z) p(y) / (p(x,y) p(y,z)) ]
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nz; ++k) {
                        double v = joint.at(i, j, k);
                        mi += plogr(v, v * py[j], pxy(i, j) * pyz(j, k));
                    }
            break;
    }
    return mi;
}

double gaussian_mi(double rho) {
    if (!(std::abs(rho) < 1.0)) throw InputError("gaussian_mi requires |rho| < 1");
    return -0.5 * std::log(1.0 - rho * rho);
}

}  // namespace visa
