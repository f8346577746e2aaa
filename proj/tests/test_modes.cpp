#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "iongate/constants.hpp"
#include "iongate/equilibrium.hpp"
#include "iongate/modes.hpp"
#include "oracles.hpp"

using namespace iongate;

namespace {

TrapDrive drive_50mhz(Eigen::Vector3d a, Eigen::Vector3d q) {
    return TrapDrive::from_diagonal(2.0 * pi * 50e6, a, q);
}

EquilibriumTrajectory solved(const TrapDrive& drive, int n_ions, int order = 5) {
    IterationSettings st;
    const auto period = find_equilibrium_damped(drive, n_ions, st, 1, 8 * (2 * order + 1));
    return refine_fourier(fourier_from_samples(period, order), drive, st);
}

EquilibriumTrajectory single_ion_at_origin() {
    EquilibriumTrajectory traj;
    traj.n_ions = 1;
    traj.order = 0;
    traj.b.assign(1, Eigen::MatrixXd::Zero(1, 3));
    return traj;
}

// Floquet exponents of the full linearized system about the periodic
// orbit, from the 6N x 6N monodromy matrix integrated over one period.
std::vector<double> monodromy_exponents(const EquilibriumTrajectory& traj,
                                        const TrapDrive& drive) {
    const int dof = 3 * traj.n_ions;
    using Mat = Eigen::MatrixXd;
    Mat y = Mat::Identity(2 * dof, 2 * dof);
    auto rhs = [&](double t, const Mat& m) {
        Mat k = 4.0 * coulomb_hessian(traj.positions(t));
        const Eigen::Matrix3d trap =
            drive.a_matrix - 2.0 * std::cos(2.0 * t) * drive.q_matrix;
        for (int i = 0; i < traj.n_ions; ++i) k.block<3, 3>(3 * i, 3 * i) += trap;
        Mat d(2 * dof, 2 * dof);
        d.topRows(dof) = m.bottomRows(dof);
        d.bottomRows(dof) = -k * m.topRows(dof);
        return d;
    };
    y = oracle::rk4(y, 0.0, pi, 6000, rhs);
    Eigen::EigenSolver<Mat> es(y);
    std::vector<double> beta;
    for (int i = 0; i < 2 * dof; ++i) {
        const auto lam = es.eigenvalues()[i];
        if (std::arg(lam) >= 0.0) beta.push_back(std::arg(lam) / pi);
    }
    std::sort(beta.begin(), beta.end());
    return beta;
}

}  // namespace

TEST_CASE("coulomb hessian") {
    SUBCASE("pair values for two ions on the x axis") {
        Eigen::MatrixXd r(2, 3);
        const double d = 2.5;
        r << 0, 0, 0, d, 0, 0;
        const Eigen::MatrixXd k = coulomb_hessian(r);
        CHECK(k(0, 3) == doctest::Approx(-2.0 / std::pow(d, 3)).epsilon(1e-12));  // x-x
        CHECK(k(1, 4) == doctest::Approx(1.0 / std::pow(d, 3)).epsilon(1e-12));   // y-y
        CHECK(k(2, 5) == doctest::Approx(1.0 / std::pow(d, 3)).epsilon(1e-12));   // z-z
    }
    SUBCASE("row sums vanish by translation invariance") {
        Eigen::MatrixXd r(3, 3);
        r << 0, 0, 0, 2.5, 0.4, -0.3, -0.8, 2.8, 0.9;
        const Eigen::MatrixXd k = coulomb_hessian(r);
        for (int row = 0; row < 9; ++row) {
            for (int s = 0; s < 3; ++s) {
                double sum = 0.0;
                for (int j = 0; j < 3; ++j) sum += k(row, 3 * j + s);
                CHECK(std::abs(sum) < 1e-13);
            }
        }
    }
    SUBCASE("matches finite differences of the acceleration") {
        Eigen::MatrixXd r(3, 3);
        r << 0, 0, 0, 2.5, 0.4, -0.3, -0.8, 2.8, 0.9;
        const Eigen::MatrixXd k = coulomb_hessian(r);
        const double h = 1e-6;
        for (int j = 0; j < 3; ++j) {
            for (int t = 0; t < 3; ++t) {
                Eigen::MatrixXd rp = r, rm = r;
                rp(j, t) += h;
                rm(j, t) -= h;
                const Eigen::MatrixXd da =
                    (coulomb_acceleration(rp) - coulomb_acceleration(rm)) / (2.0 * h);
                for (int i = 0; i < 3; ++i)
                    for (int s = 0; s < 3; ++s)
                        CHECK(-4.0 * k(3 * i + s, 3 * j + t) ==
                              doctest::Approx(da(i, s)).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("hessian series") {
    const TrapDrive drive = drive_50mhz({0.005, 0.05, 0.08}, {0.3, -0.3, 0.0});
    const auto traj = solved(drive, 2);
    const HessianSeries h = build_hessian_series(traj, drive, 5);

    SUBCASE("series reconstructs the sampled curvature to spectral accuracy") {
        auto reconstruction_defect = [&](const HessianSeries& hs) {
            double defect = 0.0;
            for (double t : {0.1, 0.7, 1.9}) {
                Eigen::MatrixXd k = hs.a_eff;
                Eigen::MatrixXd direct = 4.0 * coulomb_hessian(traj.positions(t));
                for (int i = 0; i < 2; ++i) {
                    direct.block<3, 3>(3 * i, 3 * i) +=
                        drive.a_matrix - 2.0 * std::cos(2.0 * t) * drive.q_matrix;
                }
                k -= 2.0 * std::cos(2.0 * t) * hs.q_eff;
                for (std::size_t n = 0; n < hs.q_high.size(); ++n)
                    k -= 2.0 * std::cos(2.0 * (n + 2) * t) * hs.q_high[n];
                defect = std::max(defect, (k - direct).cwiseAbs().maxCoeff());
            }
            return defect;
        };
        const double d5 = reconstruction_defect(h);
        const double d8 = reconstruction_defect(build_hessian_series(traj, drive, 8));
        CHECK(d5 < 1e-6);
        CHECK(d8 < 1e-9);
        CHECK(d8 < d5);
    }
    SUBCASE("static crystal has no oscillating harmonics") {
        const TrapDrive zdrive = drive_50mhz({-0.015, -0.015, 0.03}, {0.4, -0.4, 0.0});
        const auto ztraj = solved(zdrive, 2);
        const HessianSeries zh = build_hessian_series(ztraj, zdrive, 5);
        for (const auto& q : zh.q_high) CHECK(q.cwiseAbs().maxCoeff() < 1e-12);
        Eigen::MatrixXd bare = Eigen::MatrixXd::Zero(6, 6);
        for (int i = 0; i < 2; ++i) bare.block<3, 3>(3 * i, 3 * i) = zdrive.q_matrix;
        CHECK((zh.q_eff - bare).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("seed pencil") {
    SUBCASE("single-ion Mathieu seed value") {
        const TrapDrive drive = drive_50mhz({0.0, 0.04, 0.09}, {0.3, 0.0, 0.0});
        const HessianSeries h = build_hessian_series(single_ion_at_origin(), drive, 2);
        const ModeSeeds seeds = seed_modes(h);  // ascending in beta^2
        // y and z axes are static: beta = sqrt(a); x axis: a = 0, q = 0.3
        CHECK(std::sqrt(seeds.beta2[0]) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(std::sqrt(seeds.beta2[1]) == doctest::Approx(0.21596).epsilon(1e-4));
        CHECK(std::sqrt(seeds.beta2[2]) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("q = 0 reduces to the eigenproblem of A") {
        const TrapDrive drive = drive_50mhz({0.01, 0.02, 0.03}, {0.0, 0.0, 0.0});
        const HessianSeries h = build_hessian_series(single_ion_at_origin(), drive, 2);
        const ModeSeeds seeds = seed_modes(h);
        CHECK(seeds.beta2[0] == doctest::Approx(0.01).epsilon(1e-13));
        CHECK(seeds.beta2[2] == doctest::Approx(0.03).epsilon(1e-13));
        const NormalMode m =
            seed_mode_vector(h, std::sqrt(seeds.beta2[0]), seeds.c0.col(0), 2);
        CHECK(m.sideband(1).cwiseAbs().maxCoeff() == 0.0);
        CHECK(m.sideband(-1).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("indefinite right-hand side aborts") {
        const TrapDrive drive = drive_50mhz({0.0, 0.0, 0.01}, {2.0, -2.0, 0.0});
        const HessianSeries h = build_hessian_series(single_ion_at_origin(), drive, 2);
        CHECK_THROWS_AS(seed_modes(h), InstabilityError);
    }
}

TEST_CASE("mode refinement against the Mathieu oracle") {
    const TrapDrive drive = drive_50mhz({0.0, 0.04, 0.09}, {0.3, 0.0, 0.0});
    const HessianSeries h = build_hessian_series(single_ion_at_origin(), drive, 2);
    RefineSettings settings;
    const ModeSet set = solve_modes(h, 5, settings);
    REQUIRE(set.modes.size() == 3);
    const double beta_oracle = oracle::mathieu_exponent(0.0, 0.3);
    CHECK(set.modes[1].beta == doctest::Approx(beta_oracle).epsilon(1e-10));
    CHECK(std::abs(set.modes[1].beta - 0.21596) < 1e-3);  // seed vs refined

    SUBCASE("converged mode is a fixed point of the update") {
        const NormalMode& m = set.modes[1];
        const Eigen::MatrixXd t = assemble_block_matrix(h, m.beta, m.ncut);
        Eigen::VectorXd stacked(t.rows());
        for (int n = -m.ncut; n <= m.ncut; ++n)
            stacked.segment((n + m.ncut) * 3, 3) = m.sideband(n);
        stacked.normalize();
        CHECK((t * stacked).norm() < 1e-9);
        const NormalMode again = refine_mode(h, m, settings);
        CHECK(again.beta == doctest::Approx(m.beta).epsilon(1e-12));
    }
}

TEST_CASE("two-ion axial crystal modes") {
    const TrapDrive drive = drive_50mhz({-0.015, -0.015, 0.03}, {0.4, -0.4, 0.0});
    const auto traj = solved(drive, 2);
    const HessianSeries h = build_hessian_series(traj, drive, 5);
    RefineSettings settings;
    const ModeSet set = solve_modes(h, 5, settings);
    REQUIRE(set.modes.size() == 6);
    CHECK(set.stable);

    std::vector<double> betas;
    for (const auto& m : set.modes) betas.push_back(m.beta);

    SUBCASE("static axial modes have closed-form exponents") {
        // centre of mass along z at sqrt(a_z); stretch at sqrt(3 a_z)
        const double b1 = std::sqrt(0.03);
        const double b2 = std::sqrt(0.09);
        CHECK(std::count_if(betas.begin(), betas.end(), [&](double b) {
                  return std::abs(b - b1) < 1e-9;
              }) == 1);
        CHECK(std::count_if(betas.begin(), betas.end(), [&](double b) {
                  return std::abs(b - b2) < 1e-9;
              }) == 1);
    }
    SUBCASE("symmetry-forced degeneracy of the transverse pairs") {
        // a_x = a_y and q_x = -q_y make x and y modes exactly degenerate
        std::vector<double> sorted = betas;
        std::sort(sorted.begin(), sorted.end());
        int pairs = 0;
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (std::abs(sorted[i] - sorted[i - 1]) < 1e-10) ++pairs;
        CHECK(pairs >= 2);
    }
    SUBCASE("full spectrum matches the dense Floquet monodromy") {
        const auto oracle_betas = monodromy_exponents(traj, drive);
        REQUIRE(oracle_betas.size() == 6);
        std::vector<double> sorted = betas;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < 6; ++k)
            CHECK(sorted[k] == doctest::Approx(oracle_betas[k]).epsilon(5e-9));
    }
    SUBCASE("quantization form is diagonal") {
        CHECK(set.bilinear_defect < 1e-8);
        for (const auto& m : set.modes) {
            CHECK(m.normalized);
            CHECK(m.weighted_sum_c().dot(m.sum_c()) ==
                  doctest::Approx(m.beta).epsilon(1e-10));
        }
    }
    SUBCASE("renormalizing is the identity") {
        ModeSet again = normalize_modeset(set.modes);
        for (std::size_t k = 0; k < set.modes.size(); ++k)
            for (int n = -5; n <= 5; ++n)
                CHECK((again.modes[k].sideband(n) - set.modes[k].sideband(n))
                          .cwiseAbs()
                          .maxCoeff() < 1e-12);
    }
}

TEST_CASE("micromotion crystal modes match the monodromy oracle") {
    const TrapDrive drive = drive_50mhz({0.005, 0.05, 0.08}, {0.3, -0.3, 0.0});
    const auto traj = solved(drive, 2, 7);
    const HessianSeries h = build_hessian_series(traj, drive, 5);
    RefineSettings settings;
    const ModeSet set = solve_modes(h, 5, settings);
    REQUIRE(set.modes.size() == 6);
    REQUIRE(set.stable);
    const auto oracle_betas = monodromy_exponents(traj, drive);
    std::vector<double> betas;
    for (const auto& m : set.modes) betas.push_back(m.beta);
    std::sort(betas.begin(), betas.end());
    for (int k = 0; k < 6; ++k)
        CHECK(betas[k] == doctest::Approx(oracle_betas[k]).epsilon(1e-7));

    SUBCASE("Q = 0 limit of the normalization is a unit carrier") {
        const TrapDrive zq = drive_50mhz({0.01, 0.02, 0.03}, {0.0, 0.0, 0.0});
        const HessianSeries hz = build_hessian_series(single_ion_at_origin(), zq, 2);
        const ModeSet zset = solve_modes(hz, 3, settings);
        for (const auto& m : zset.modes) {
            CHECK(m.sideband(0).norm() == doctest::Approx(1.0).epsilon(1e-10));
            for (int n = 1; n <= 3; ++n) {
                CHECK(m.sideband(n).norm() < 1e-12);
                CHECK(m.sideband(-n).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("unstable exponent flags the whole set") {
    // a < 0 with a weak drive: x axis is Mathieu-unstable
    const TrapDrive drive = drive_50mhz({-0.01, 0.05, 0.05}, {0.1, 0.0, 0.0});
    const HessianSeries h = build_hessian_series(single_ion_at_origin(), drive, 2);
    const ModeSet set = solve_modes(h, 3, RefineSettings{});
    CHECK_FALSE(set.stable);
    int flagged = 0;
    for (const auto& m : set.modes) flagged += m.imaginary ? 1 : 0;
    CHECK(flagged == 1);
}
