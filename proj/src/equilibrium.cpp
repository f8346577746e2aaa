#include "iongate/equilibrium.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "iongate/constants.hpp"

namespace iongate {

Eigen::MatrixXd EquilibriumTrajectory::positions(double t) const {
    Eigen::MatrixXd r = b[0];
    for (int n = 1; n <= order; ++n) r += 2.0 * std::cos(2.0 * n * t) * b[n];
    return r;
}

Eigen::MatrixXd EquilibriumTrajectory::velocities(double t) const {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n_ions, 3);
    for (int n = 1; n <= order; ++n)
        v -= 4.0 * n * std::sin(2.0 * n * t) * b[n];
    return v;
}

Eigen::MatrixXd EquilibriumTrajectory::accelerations(double t) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_ions, 3);
    for (int n = 1; n <= order; ++n)
        a -= 8.0 * n * n * std::cos(2.0 * n * t) * b[n];
    return a;
}

Eigen::MatrixXd coulomb_acceleration(const Eigen::MatrixXd& positions) {
    const int n = static_cast<int>(positions.rows());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Eigen::RowVector3d d = positions.row(i) - positions.row(j);
            const double r2 = d.squaredNorm();
            if (r2 < 1e-24)
                throw SingularityError("coincident ions " + std::to_string(i + 1) + " and " +
                                           std::to_string(j + 1),
                                       i, j);
            Eigen::RowVector3d f = 4.0 * d / (r2 * std::sqrt(r2));
            acc.row(i) += f;
            acc.row(j) -= f;
        }
    }
    return acc;
}

namespace {

struct Phase {
    Eigen::MatrixXd r;
    Eigen::MatrixXd v;
};

// RK4 sweep of the damped EOM over [t0, t0+dt].  The drive is pi-periodic,
// so callers pass t0 reduced mod pi.
void rk4_step(Phase& s, double t0, double dt, const TrapDrive& drive, double gamma) {
    auto acc = [&](double t, const Eigen::MatrixXd& r, const Eigen::MatrixXd& v) {
        Eigen::Matrix3d k = drive.a_matrix - 2.0 * std::cos(2.0 * t) * drive.q_matrix;
        Eigen::MatrixXd a = coulomb_acceleration(r) - r * k.transpose();
        if (gamma != 0.0) a -= gamma * v;
        return a;
    };
    const Eigen::MatrixXd a1 = acc(t0, s.r, s.v);
    const Eigen::MatrixXd r2 = s.r + 0.5 * dt * s.v;
    const Eigen::MatrixXd v2 = s.v + 0.5 * dt * a1;
    const Eigen::MatrixXd a2 = acc(t0 + 0.5 * dt, r2, v2);
    const Eigen::MatrixXd r3 = s.r + 0.5 * dt * v2;
    const Eigen::MatrixXd v3 = s.v + 0.5 * dt * a2;
    const Eigen::MatrixXd a3 = acc(t0 + 0.5 * dt, r3, v3);
    const Eigen::MatrixXd r4 = s.r + dt * v3;
    const Eigen::MatrixXd v4 = s.v + dt * a3;
    const Eigen::MatrixXd a4 = acc(t0 + dt, r4, v4);
    s.r += (dt / 6.0) * (s.v + 2.0 * v2 + 2.0 * v3 + v4);
    s.v += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

// Advance one full period, optionally recording positions at the given
// grid of intra-period times (grid must be sorted, within [0, pi)).
void integrate_period(Phase& s, const TrapDrive& drive, double gamma, int steps,
                      const std::vector<double>* grid = nullptr,
                      std::vector<Eigen::MatrixXd>* record = nullptr) {
    const double h_target = pi / steps;
    double t = 0.0;
    std::size_t gi = 0;
    while (t < pi - 1e-15) {
        double t_next = std::min(t + h_target, pi);
        if (grid && gi < grid->size() && (*grid)[gi] > t && (*grid)[gi] <= t_next + 1e-15) {
            t_next = (*grid)[gi];
        }
        if (grid && gi < grid->size() && std::abs(t - (*grid)[gi]) < 1e-15) {
            record->push_back(s.r);
            ++gi;
            continue;
        }
        rk4_step(s, t, t_next - t, drive, gamma);
        t = t_next;
    }
    if (grid && gi < grid->size() && std::abs((*grid)[gi] - pi) < 1e-15) {
        record->push_back(s.r);
        ++gi;
    }
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

void check_escape(const Eigen::MatrixXd& r, double radius) {
    if (!r.allFinite() || r.cwiseAbs().maxCoeff() > radius)
        throw InstabilityError("ions escaped the trap region during the damped search");
}

}  // namespace

SampledPeriod find_equilibrium_damped(const TrapDrive& drive, int n_ions,
                                      const IterationSettings& settings,
                                      std::uint64_t seed, int sample_count) {
    settings.validate();
    if (n_ions < 1) throw ConfigError("need at least one ion");
    if (sample_count < 4) throw ConfigError("sample_count too small");

    const double radius = settings.escape_radius > 0.0
                              ? settings.escape_radius
                              : 100.0 * std::cbrt(static_cast<double>(n_ions));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double r0 = 2.0 * std::cbrt(static_cast<double>(n_ions));
    Phase s;
    s.r = Eigen::MatrixXd(n_ions, 3);
    s.v = Eigen::MatrixXd::Zero(n_ions, 3);
    for (int i = 0; i < n_ions; ++i) {
        // rejection-sample the unit ball
        Eigen::Vector3d p;
        do {
            p = Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
        } while (p.squaredNorm() > 1.0);
        s.r.row(i) = r0 * p.transpose();
    }
    if (n_ions == 1) s.r.setZero();  // origin is the exact solution

    double gamma = settings.damping_initial;
    double mismatch = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < settings.max_outer; ++outer) {
        // stage 1: stroboscopic fixed point under damping; settle well below
        // the recurrence tolerance so the free stage starts close to the orbit
        for (int round = 0; round < settings.max_damping_rounds; ++round) {
            Eigen::MatrixXd before = s.r;
            for (int p = 0; p < settings.stage1_periods; ++p)
                integrate_period(s, drive, gamma, settings.steps_per_period);
            check_escape(s.r, radius);
            if (max_abs_diff(before, s.r) < settings.eps_pos * settings.strobe_factor) break;
        }
        // stage 2: free evolution must recur period to period
        Phase probe = s;
        std::vector<double> grid(sample_count);
        for (int k = 0; k < sample_count; ++k) grid[k] = k * pi / sample_count;
        std::vector<Eigen::MatrixXd> prev, last;
        for (int p = 0; p < settings.stage2_periods; ++p) {
            const bool tail = p >= settings.stage2_periods - 2;
            std::vector<Eigen::MatrixXd> rec;
            integrate_period(probe, drive, 0.0, settings.steps_per_period,
                             tail ? &grid : nullptr, tail ? &rec : nullptr);
            if (tail) {
                prev = std::move(last);
                last = std::move(rec);
            }
        }
        check_escape(probe.r, radius);
        mismatch = 0.0;
        for (int k = 0; k < sample_count; ++k)
            mismatch = std::max(mismatch, max_abs_diff(prev[k], last[k]));
        if (mismatch < settings.eps_pos) {
            SampledPeriod out;
            out.times = grid;
            out.positions = std::move(last);
            out.mismatch = mismatch;
            out.final_damping = gamma;
            out.seed = seed;
            return out;
        }
        gamma *= settings.damping_factor;
        if (gamma < settings.damping_floor)
            throw ConvergenceError("damped search stalled at recurrence mismatch " +
                                   std::to_string(mismatch));
        s = probe;  // keep the relaxed state for the next round
    }
    throw ConvergenceError("damped search did not converge (last mismatch " +
                           std::to_string(mismatch) + ")");
}

namespace {

// Cosine-series coefficients of the Coulomb terms on a uniform grid; the
// grid must sample an even pi-periodic function.
CoulombSeries series_from_grid(const std::vector<double>& times,
                               const std::vector<Eigen::MatrixXd>& positions,
                               int n_ions, int order2, double imag_tol) {
    const int k = static_cast<int>(times.size());
    std::vector<Eigen::MatrixXd> dsamp(k), gsamp(k);
    for (int s = 0; s < k; ++s) {
        const auto& r = positions[s];
        dsamp[s] = coulomb_acceleration(r);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_ions, n_ions);
        for (int i = 0; i < n_ions; ++i) {
            for (int j = i + 1; j < n_ions; ++j) {
                const double inv3 = 1.0 / std::pow((r.row(i) - r.row(j)).norm(), 3);
                g(i, j) = -inv3;
                g(j, i) = -inv3;
                g(i, i) += inv3;
                g(j, j) += inv3;
            }
        }
        gsamp[s] = g;
    }
    CoulombSeries out;
    out.d.resize(order2 + 1);
    out.g.resize(order2 + 1);
    double residue = 0.0;
    for (int n = 0; n <= order2; ++n) {
        Eigen::MatrixXd dre = Eigen::MatrixXd::Zero(n_ions, 3);
        Eigen::MatrixXd dim = Eigen::MatrixXd::Zero(n_ions, 3);
        Eigen::MatrixXd gre = Eigen::MatrixXd::Zero(n_ions, n_ions);
        Eigen::MatrixXd gim = Eigen::MatrixXd::Zero(n_ions, n_ions);
        for (int s = 0; s < k; ++s) {
            const double c = std::cos(2.0 * n * times[s]);
            const double si = std::sin(2.0 * n * times[s]);
            dre += c * dsamp[s];
            dim += si * dsamp[s];
            gre += c * gsamp[s];
            gim += si * gsamp[s];
        }
        out.d[n] = dre / k;
        out.g[n] = gre / k;
        residue = std::max(residue, dim.cwiseAbs().maxCoeff() / k);
        residue = std::max(residue, gim.cwiseAbs().maxCoeff() / k);
    }
    out.imag_residue = residue;
    if (residue >= imag_tol)
        throw ConvergenceError("Coulomb series violates time-reversal symmetry (residue " +
                               std::to_string(residue) + ")");
    return out;
}

std::vector<double> uniform_grid(int count) {
    std::vector<double> g(count);
    for (int s = 0; s < count; ++s) g[s] = s * pi / count;
    return g;
}

}  // namespace

CoulombSeries coulomb_series(const EquilibriumTrajectory& traj, double imag_tol) {
    const int order2 = 2 * traj.order;
    const int count = 8 * (order2 + 1);
    auto grid = uniform_grid(count);
    std::vector<Eigen::MatrixXd> pos(count);
    for (int s = 0; s < count; ++s) pos[s] = traj.positions(grid[s]);
    return series_from_grid(grid, pos, traj.n_ions, order2, imag_tol);
}

CoulombSeries coulomb_series(const SampledPeriod& period, int order, double imag_tol) {
    const int n_ions = static_cast<int>(period.positions.front().rows());
    return series_from_grid(period.times, period.positions, n_ions, 2 * order, imag_tol);
}

EquilibriumTrajectory fourier_from_samples(const SampledPeriod& period, int order) {
    const int k = static_cast<int>(period.times.size());
    const int n_ions = static_cast<int>(period.positions.front().rows());
    EquilibriumTrajectory traj;
    traj.n_ions = n_ions;
    traj.order = order;
    traj.b.assign(order + 1, Eigen::MatrixXd::Zero(n_ions, 3));
    for (int n = 0; n <= order; ++n) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_ions, 3);
        for (int s = 0; s < k; ++s)
            c += std::cos(2.0 * n * period.times[s]) * period.positions[s];
        traj.b[n] = c / k;
    }
    return traj;
}

EquilibriumTrajectory refine_fourier(const EquilibriumTrajectory& initial,
                                     const TrapDrive& drive,
                                     const IterationSettings& settings) {
    settings.validate();
    const int n_ions = initial.n_ions;
    const int order = initial.order;
    const int dof = 3 * n_ions;
    const int dim = dof * (order + 1);
    const double alpha = settings.alpha;

    EquilibriumTrajectory traj = initial;
    const auto grid = uniform_grid(8 * (2 * order + 1));

    auto evaluate_grid = [&](const EquilibriumTrajectory& t) {
        std::vector<Eigen::MatrixXd> pos(grid.size());
        for (std::size_t s = 0; s < grid.size(); ++s) pos[s] = t.positions(grid[s]);
        return pos;
    };

    double prev_change = std::numeric_limits<double>::infinity();
    int grow_count = 0;
    for (int sweep = 0; sweep < settings.max_sweeps; ++sweep) {
        const CoulombSeries cs = coulomb_series(traj);

        Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
        for (int n = 0; n <= order; ++n) {
            const int row0 = n * dof;
            for (int i = 0; i < n_ions; ++i)
                rhs.segment<3>(row0 + 3 * i) = (1.0 + alpha) * cs.d[n].row(i).transpose();
            // trap block, diagonal in the harmonic index
            for (int i = 0; i < n_ions; ++i)
                sys.block<3, 3>(row0 + 3 * i, row0 + 3 * i) +=
                    drive.a_matrix - 4.0 * n * n * Eigen::Matrix3d::Identity();
            // RF coupling to neighbouring harmonics
            auto add_q = [&](int col_harm, double scale) {
                if (col_harm < 0 || col_harm > order) return;
                for (int i = 0; i < n_ions; ++i)
                    sys.block<3, 3>(row0 + 3 * i, col_harm * dof + 3 * i) -=
                        scale * drive.q_matrix;
            };
            if (n == 0) {
                add_q(1, 2.0);
            } else {
                add_q(n - 1, 1.0);
                add_q(n + 1, 1.0);
            }
            // Coulomb convolution across all harmonics
            for (int m = 0; m <= order; ++m) {
                Eigen::MatrixXd gsum = m == 0 ? cs.g[n]
                                              : Eigen::MatrixXd(cs.g[std::abs(n - m)] + cs.g[n + m]);
                gsum *= 4.0 * alpha;
                for (int i = 0; i < n_ions; ++i)
                    for (int j = 0; j < n_ions; ++j)
                        if (gsum(i, j) != 0.0)
                            for (int sdim = 0; sdim < 3; ++sdim)
                                sys(row0 + 3 * i + sdim, m * dof + 3 * j + sdim) += gsum(i, j);
            }
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
        Eigen::VectorXd sol = lu.solve(rhs);
        if (!sol.allFinite())
            throw ConvergenceError("singular linear system in the Fourier iteration");

        EquilibriumTrajectory next = traj;
        for (int n = 0; n <= order; ++n)
            for (int i = 0; i < n_ions; ++i)
                next.b[n].row(i) = sol.segment<3>(n * dof + 3 * i).transpose();

        const auto old_pos = evaluate_grid(traj);
        const auto new_pos = evaluate_grid(next);
        double change = 0.0;
        for (std::size_t s = 0; s < grid.size(); ++s)
            change = std::max(change, (old_pos[s] - new_pos[s]).cwiseAbs().maxCoeff());
        traj = std::move(next);

        if (change < settings.eps_change) break;
        if (change > prev_change) {
            if (++grow_count >= 3)
                throw ConvergenceError(
                    "Fourier iteration diverging; try a larger mixing alpha or a better seed");
        } else {
            grow_count = 0;
        }
        prev_change = change;
    }

    traj.residual = eom_residual(traj, drive);
    traj.converged = traj.residual < settings.eps_residual;
    return traj;
}

double eom_residual(const EquilibriumTrajectory& traj, const TrapDrive& drive,
                    int grid_points) {
    double defect = 0.0;
    for (int s = 0; s < grid_points; ++s) {
        const double t = s * pi / grid_points;
        const Eigen::MatrixXd r = traj.positions(t);
        const Eigen::Matrix3d k = drive.a_matrix - 2.0 * std::cos(2.0 * t) * drive.q_matrix;
        const Eigen::MatrixXd lhs =
            traj.accelerations(t) + r * k.transpose() - coulomb_acceleration(r);
        defect = std::max(defect, lhs.cwiseAbs().maxCoeff());
    }
    return defect;
}

}  // namespace iongate
