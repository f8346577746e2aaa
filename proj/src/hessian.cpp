#include <cmath>

#include "iongate/constants.hpp"
#include "iongate/modes.hpp"

namespace iongate {

Eigen::MatrixXd coulomb_hessian(const Eigen::MatrixXd& positions) {
    const int n = static_cast<int>(positions.rows());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Eigen::RowVector3d u = positions.row(i) - positions.row(j);
            const double r2 = u.squaredNorm();
            const double r5 = r2 * r2 * std::sqrt(r2);
            for (int s = 0; s < 3; ++s) {
                for (int t = 0; t < 3; ++t) {
                    const double off = s == t ? (r2 - 3.0 * u[s] * u[t]) / r5
                                              : -3.0 * u[s] * u[t] / r5;
                    k(3 * i + s, 3 * j + t) = off;
                    k(3 * i + s, 3 * i + t) -= off;  // diagonal balances the row
                }
            }
        }
    }
    return k;
}

HessianSeries build_hessian_series(const EquilibriumTrajectory& traj,
                                   const TrapDrive& drive, int m_trunc) {
    if (m_trunc < 1) throw ConfigError("hessian truncation must be >= 1");
    const int n_ions = traj.n_ions;
    const int dof = 3 * n_ions;
    const int count = std::max(64, 8 * (m_trunc + 1));

    std::vector<Eigen::MatrixXd> samples(count);
    for (int s = 0; s < count; ++s) {
        const double t = s * pi / count;
        samples[s] = coulomb_hessian(traj.positions(t));
        const double asym = (samples[s] - samples[s].transpose()).cwiseAbs().maxCoeff();
        if (!(asym <= 1e-10))
            throw ConvergenceError("sampled Hessian is not symmetric; trajectory is broken");
    }

    // cosine harmonics kappa_n of K(t) = kappa_0 + 2 sum kappa_n cos(2nt)
    std::vector<Eigen::MatrixXd> kappa(m_trunc + 1, Eigen::MatrixXd::Zero(dof, dof));
    for (int n = 0; n <= m_trunc; ++n) {
        for (int s = 0; s < count; ++s)
            kappa[n] += std::cos(2.0 * n * s * pi / count) * samples[s];
        kappa[n] /= count;
    }

    HessianSeries h;
    h.n_ions = n_ions;
    h.a_eff = 4.0 * kappa[0];
    h.q_eff = -4.0 * kappa[1];
    for (int i = 0; i < n_ions; ++i) {
        h.a_eff.block<3, 3>(3 * i, 3 * i) += drive.a_matrix;
        h.q_eff.block<3, 3>(3 * i, 3 * i) += drive.q_matrix;
    }
    for (int n = 2; n <= m_trunc; ++n) h.q_high.push_back(-4.0 * kappa[n]);
    return h;
}

}  // namespace iongate
