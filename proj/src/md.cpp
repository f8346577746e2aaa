#include "iongate/md.hpp"

#include <cmath>
#include <cstdio>

#include "iongate/constants.hpp"

namespace iongate {

namespace {

// Trap plus Coulomb acceleration with the collision guard.
Eigen::MatrixXd md_acceleration(const Eigen::MatrixXd& r, double t,
                                const TrapDrive& drive) {
    const int n = static_cast<int>(r.rows());
    const Eigen::Matrix3d k = drive.a_matrix - 2.0 * std::cos(2.0 * t) * drive.q_matrix;
    Eigen::MatrixXd acc = -r * k.transpose();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Eigen::RowVector3d d = r.row(i) - r.row(j);
            const double dist2 = d.squaredNorm();
            if (dist2 < 1e-12)
                throw SingularityError(
                    "ion collision at t = " + std::to_string(t) + " between ions " +
                        std::to_string(i + 1) + " and " + std::to_string(j + 1),
                    i, j);
            Eigen::RowVector3d f = 4.0 * d / (dist2 * std::sqrt(dist2));
            acc.row(i) += f;
            acc.row(j) -= f;
        }
    }
    return acc;
}

}  // namespace

MdState integrate(const MdState& initial, const TrapDrive& drive, double t_start,
                  double t_end, int steps, MdTrace* trace, int record_stride) {
    if (steps < 1) throw ConfigError("need at least one step");
    // Suzuki-Yoshida composition weights of the second-order kernel.
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    const double w0 = -cbrt2 / (2.0 - cbrt2);
    const double sub[3] = {w1, w0, w1};

    MdState s = initial;
    const double h = (t_end - t_start) / steps;
    double t = t_start;
    Eigen::MatrixXd acc = md_acceleration(s.r, t, drive);
    if (trace) {
        trace->times.push_back(t);
        trace->positions.push_back(s.r);
    }
    for (int step = 0; step < steps; ++step) {
        for (double w : sub) {
            const double hs = w * h;
            s.v += 0.5 * hs * acc;
            s.r += hs * s.v;
            t += hs;
            acc = md_acceleration(s.r, t, drive);
            s.v += 0.5 * hs * acc;
        }
        // keep the clock exact at step boundaries
        t = t_start + (step + 1) * h;
        if (trace && ((step + 1) % record_stride == 0 || step + 1 == steps)) {
            trace->times.push_back(t);
            trace->positions.push_back(s.r);
        }
    }
    return s;
}

Eigen::MatrixXd mode_displacement(const NormalMode& mode, double amplitude, double t,
                                  int n_ions) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * n_ions);
    for (int n = -mode.ncut; n <= mode.ncut; ++n)
        x += 2.0 * amplitude * std::cos((2.0 * n + mode.beta) * t) * mode.sideband(n);
    return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        x.data(), n_ions, 3);
}

Eigen::MatrixXd mode_velocity(const NormalMode& mode, double amplitude, double t,
                              int n_ions) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * n_ions);
    for (int n = -mode.ncut; n <= mode.ncut; ++n) {
        const double w = 2.0 * n + mode.beta;
        x += -2.0 * amplitude * w * std::sin(w * t) * mode.sideband(n);
    }
    return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        x.data(), n_ions, 3);
}

ModeVerification verify_mode(const EquilibriumTrajectory& traj, const ModeSet& modes,
                             const ExcitationSpec& exc, const TrapDrive& drive,
                             const IntegratorSettings& settings) {
    settings.validate();
    if (!modes.stable)
        throw InstabilityError("mode set carries an instability flag; refusing verification");
    if (exc.mode_index < 0 || exc.mode_index >= static_cast<int>(modes.modes.size()))
        throw ConfigError("mode index out of range");
    const NormalMode& mode = modes.modes[exc.mode_index];
    if (!mode.normalized)
        throw ConfigError("mode must be normalized before verification");
    if (std::abs(exc.amplitude) > 0.1)
        std::fprintf(stderr,
                     "iongate: excitation amplitude %.3g may leave the linear regime\n",
                     exc.amplitude);

    const int n_ions = traj.n_ions;
    int flat = 0;
    mode.sideband(0).cwiseAbs().maxCoeff(&flat);
    const int probe_ion = flat / 3;
    const int probe_axis = flat % 3;

    MdState s;
    s.r = traj.positions(0.0) + mode_displacement(mode, exc.amplitude, 0.0, n_ions);
    s.v = traj.velocities(0.0) + mode_velocity(mode, exc.amplitude, 0.0, n_ions);

    ModeVerification out;
    out.probe_ion = probe_ion;
    out.probe_axis = probe_axis;
    const int stride = settings.record_stride > 0 ? settings.record_stride : 1;

    const int total_steps = settings.steps_per_period * settings.periods;
    const double h = pi / settings.steps_per_period;

    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    const double w0 = -cbrt2 / (2.0 - cbrt2);
    const double sub[3] = {w1, w0, w1};

    double t = 0.0;
    Eigen::MatrixXd acc = md_acceleration(s.r, t, drive);
    double max_dev = 0.0;
    auto probe = [&](double time) {
        const double md = s.r(probe_ion, probe_axis);
        const double pred = traj.positions(time)(probe_ion, probe_axis) +
                            mode_displacement(mode, exc.amplitude, time, n_ions)(probe_ion,
                                                                                 probe_axis);
        max_dev = std::max(max_dev, std::abs(md - pred));
        return std::pair{md, pred};
    };
    {
        auto [md, pred] = probe(0.0);
        out.times.push_back(0.0);
        out.md_coord.push_back(md);
        out.mode_coord.push_back(pred);
    }
    for (int step = 0; step < total_steps; ++step) {
        for (double w : sub) {
            const double hs = w * h;
            s.v += 0.5 * hs * acc;
            s.r += hs * s.v;
            t += hs;
            acc = md_acceleration(s.r, t, drive);
            s.v += 0.5 * hs * acc;
        }
        t = (step + 1) * h;
        auto [md, pred] = probe(t);
        if ((step + 1) % stride == 0 || step + 1 == total_steps) {
            out.times.push_back(t / pi);  // RF periods
            out.md_coord.push_back(md);
            out.mode_coord.push_back(pred);
        }
    }
    out.max_deviation = max_dev;
    return out;
}

}  // namespace iongate
