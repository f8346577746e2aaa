#include "iongate/trap.hpp"

#include <cmath>
#include <string>

#include "iongate/constants.hpp"

namespace iongate {

TrapDrive TrapDrive::from_diagonal(double rf_rad_s,
                                   const Eigen::Vector3d& a,
                                   const Eigen::Vector3d& q) {
    TrapDrive d;
    d.rf_rad_s = rf_rad_s;
    d.a_matrix = a.asDiagonal();
    d.q_matrix = q.asDiagonal();
    d.validate();
    return d;
}

TrapDrive TrapDrive::from_matrices(double rf_rad_s,
                                   const Eigen::Matrix3d& a,
                                   const Eigen::Matrix3d& q) {
    TrapDrive d;
    d.rf_rad_s = rf_rad_s;
    d.a_matrix = a;
    d.q_matrix = q;
    d.validate();
    return d;
}

void TrapDrive::validate() const {
    if (!(rf_rad_s > 0.0)) throw ConfigError("rf frequency must be positive");
    if ((a_matrix - a_matrix.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw ConfigError("DC matrix A must be symmetric");
    if ((q_matrix - q_matrix.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw ConfigError("RF matrix Q must be symmetric");
}

namespace {

// One RK4 sweep of the 6x6 fundamental matrix of
//   x'' + (A - 2 Q cos 2t) x = 0
// over t in [0, pi].
Eigen::Matrix<double, 6, 6> mathieu_monodromy(const Eigen::Matrix3d& a,
                                              const Eigen::Matrix3d& q) {
    using Mat6 = Eigen::Matrix<double, 6, 6>;
    auto rhs = [&](double t, const Mat6& y) {
        Eigen::Matrix3d k = a - 2.0 * std::cos(2.0 * t) * q;
        Mat6 dy;
        dy.topRows<3>() = y.bottomRows<3>();
        dy.bottomRows<3>() = -k * y.topRows<3>();
        return dy;
    };
    Mat6 y = Mat6::Identity();
    const int steps = 4096;
    const double h = pi / steps;
    double t = 0.0;
    for (int s = 0; s < steps; ++s) {
        Mat6 k1 = rhs(t, y);
        Mat6 k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        Mat6 k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        Mat6 k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return y;
}

}  // namespace

std::string single_ion_instability(const TrapDrive& drive) {
    const bool diagonal = drive.a_matrix.isDiagonal(0.0) && drive.q_matrix.isDiagonal(0.0);
    const char* axes[3] = {"x", "y", "z"};
    if (diagonal) {
        for (int s = 0; s < 3; ++s) {
            Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
            Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
            a(0, 0) = drive.a_matrix(s, s);
            q(0, 0) = drive.q_matrix(s, s);
            auto m = mathieu_monodromy(a, q);
            Eigen::Matrix2d m2;
            m2 << m(0, 0), m(0, 3), m(3, 0), m(3, 3);
            // |trace| > 2 means a real Floquet multiplier off the unit circle.
            if (std::abs(m2.trace()) > 2.0 + 1e-9)
                return std::string("single-ion motion unstable along ") + axes[s];
        }
        return {};
    }
    auto m = mathieu_monodromy(drive.a_matrix, drive.q_matrix);
    Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(m);
    for (int i = 0; i < 6; ++i) {
        if (std::abs(es.eigenvalues()[i]) > 1.0 + 1e-7)
            return "single-ion motion unstable (coupled axes)";
    }
    return {};
}

}  // namespace iongate
