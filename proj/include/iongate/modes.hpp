#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iongate/equilibrium.hpp"
#include "iongate/trap.hpp"

namespace iongate {

/// Cosine harmonics of the linearized EOM about a periodic crystal.  The
/// zeroth and first Coulomb harmonics are absorbed into the effective DC
/// and RF matrices; higher harmonics enter as additional drive matrices.
struct HessianSeries {
    int n_ions = 0;
    Eigen::MatrixXd a_eff;               // 3N x 3N, symmetric
    Eigen::MatrixXd q_eff;               // 3N x 3N, symmetric
    std::vector<Eigen::MatrixXd> q_high;  // q_high[d] couples harmonics 2(d+2) apart

    int dof() const { return 3 * n_ions; }
};

/// Instantaneous Coulomb curvature matrix at the given positions.
Eigen::MatrixXd coulomb_hessian(const Eigen::MatrixXd& positions);

HessianSeries build_hessian_series(const EquilibriumTrajectory& traj,
                                   const TrapDrive& drive, int m_trunc);

/// Small-parameter generalized-eigenvalue pencil whose eigenvalues
/// approximate the squared Floquet exponents.
struct SeedPencil {
    Eigen::MatrixXd lhs;
    Eigen::MatrixXd rhs;
};

SeedPencil make_seed_pencil(const HessianSeries& h);

/// One Floquet normal mode: exponent beta and sideband vectors c[n+ncut]
/// for n in [-ncut, ncut].  Mode frequency is beta * (rf/2).
struct NormalMode {
    double beta = 0.0;
    bool imaginary = false;  // unstable exponent; beta holds |Im beta|
    int ncut = 0;
    std::vector<Eigen::VectorXd> c;
    double residual = 0.0;
    bool normalized = false;

    const Eigen::VectorXd& sideband(int n) const { return c[n + ncut]; }
    Eigen::VectorXd& sideband(int n) { return c[n + ncut]; }
    /// sum_n c_n  and  sum_n (2n + beta) c_n, the two vectors entering the
    /// quantization bilinear form.
    Eigen::VectorXd sum_c() const;
    Eigen::VectorXd weighted_sum_c() const;
};

struct ModeSet {
    std::vector<NormalMode> modes;  // ascending beta
    bool stable = true;
    std::string crystal_hash;
    double bilinear_defect = 0.0;  // max deviation of the form matrix from diag(beta)
};

struct RefineSettings {
    int block_order = 5;       // harmonic truncation of the block matrix
    double eps = 1e-12;        // |beta' - beta| stop
    int max_iterations = 80;
    double cluster_threshold = 1e-6;  // seed spacing that triggers joint refinement
    int dense_threshold = 1000;       // above this dimension use shift-invert
    int n_threads = 1;
};

/// Pencil seeds for all 3N modes: beta2 ascending (negative values flag
/// unstable exponents), columns of c0 are the matching vectors.
struct ModeSeeds {
    Eigen::VectorXd beta2;
    Eigen::MatrixXd c0;
};

ModeSeeds seed_modes(const HessianSeries& h);

/// Stacked-sideband start vector for the block refinement, built from a
/// pencil eigenpair and the leading sideband estimates.
NormalMode seed_mode_vector(const HessianSeries& h, double beta,
                            const Eigen::VectorXd& c0, int ncut);

/// The beta-dependent block matrix whose kernel is the mode.
Eigen::MatrixXd assemble_block_matrix(const HessianSeries& h, double beta, int order);

NormalMode refine_mode(const HessianSeries& h, const NormalMode& seed,
                       const RefineSettings& settings);

/// Joint refinement of a near-degenerate cluster; preserves branch
/// identity by eigenvalue order and eigenvector overlap.
std::vector<NormalMode> resolve_degeneracy(const HessianSeries& h,
                                           const std::vector<NormalMode>& seeds,
                                           const RefineSettings& settings);

/// Scale modes to the quantization condition
///   sum_n (2n+beta) c_n . sum_m c_m = beta
/// and verify cross-mode orthogonality under the same form.
ModeSet normalize_modeset(std::vector<NormalMode> modes);

/// Full pipeline: seeds, clustering, refinement, normalization.
ModeSet solve_modes(const HessianSeries& h, int ncut, const RefineSettings& settings);

}  // namespace iongate
