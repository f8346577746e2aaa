#pragma once

#include <Eigen/Dense>

#include "iongate/errors.hpp"

namespace iongate {

/// Paul-trap drive: DC matrix A, RF matrix Q (dimensionless Mathieu
/// coefficients) and the RF angular frequency.  A and Q must be symmetric;
/// asymmetric input is rejected rather than symmetrized.
struct TrapDrive {
    double rf_rad_s = 0.0;
    Eigen::Matrix3d a_matrix = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d q_matrix = Eigen::Matrix3d::Zero();

    static TrapDrive from_diagonal(double rf_rad_s,
                                   const Eigen::Vector3d& a,
                                   const Eigen::Vector3d& q);
    static TrapDrive from_matrices(double rf_rad_s,
                                   const Eigen::Matrix3d& a,
                                   const Eigen::Matrix3d& q);

    void validate() const;
};

/// Single-ion linear stability of the drive: integrates the 3D Mathieu
/// system over one period and checks the monodromy spectrum.  Returns the
/// empty string when stable, otherwise a description naming the axis (or
/// "coupled" for non-diagonal drives).
std::string single_ion_instability(const TrapDrive& drive);

}  // namespace iongate
