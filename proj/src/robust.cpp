#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "iongate/constants.hpp"
#include "iongate/gate.hpp"

namespace iongate {

Eigen::MatrixXd robust_m_matrix(const GateContext& ctx, const CouplingMatrix& coupling) {
    const int ns = ctx.n_seg;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ns, ns);
    Eigen::VectorXd weights(ns);
    for (int n = 0; n < ns; ++n) weights[n] = static_cast<double>(ns - n);
    for (int k = 0; k < ctx.n_modes; ++k) {
        const double w = 2.0 * ctx.nbar[k] + 1.0;
        for (int s = 0; s < 2; ++s) {
            const Eigen::VectorXcd row =
                coupling.rows[k][s].cwiseProduct(weights.cast<Complex>());
            m += w * (row.conjugate() * row.transpose());
        }
    }
    Eigen::MatrixXd mr = m.real();
    return 0.5 * (mr + mr.transpose()).eval();
}

Eigen::MatrixXd robust_gamma_matrix(const GateContext& ctx, const GammaMatrices& gammas) {
    const int ns = ctx.n_seg;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ns, ns);
    for (int p = 0; p < ns; ++p)
        for (int q = 0; q <= p; ++q)
            g(p, q) = static_cast<double>(ns - p) * gammas.gamma_pre(p, q).real();
    return g;
}

namespace {

struct KktProblem {
    Eigen::MatrixXd m;  // weighted quadratic part
    Eigen::MatrixXd h;  // weighted two-qubit integral form (symmetric)
    Eigen::MatrixXd g;  // two-qubit constraint form (symmetric)
    double target = 0.0;

    double cost(const Eigen::VectorXd& x) const {
        const double hh = x.dot(h * x);
        return x.dot(m * x) + hh * hh;
    }
    Eigen::VectorXd kkt(const Eigen::VectorXd& x, double lambda) const {
        const double hh = x.dot(h * x);
        Eigen::VectorXd f(x.size() + 1);
        f.head(x.size()) = 2.0 * (m * x) + 4.0 * hh * (h * x) - 2.0 * lambda * (g * x);
        f[x.size()] = -(x.dot(g * x) - target);
        return f;
    }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const {
        const int n = static_cast<int>(x.size());
        const double hh = x.dot(h * x);
        const Eigen::VectorXd hx = h * x;
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
        j.topLeftCorner(n, n) =
            2.0 * m + 4.0 * hh * h + 8.0 * hx * hx.transpose() - 2.0 * lambda * g;
        j.topRightCorner(n, 1) = -2.0 * (g * x);
        j.bottomLeftCorner(1, n) = -2.0 * (g * x).transpose();
        return j;
    }
};

bool newton_solve(const KktProblem& prob, Eigen::VectorXd& x, int max_iter, double tol) {
    const int n = static_cast<int>(x.size());
    double lambda = (x.dot(prob.m * x) + 2.0 * std::pow(x.dot(prob.h * x), 2)) / prob.target;
    Eigen::VectorXd f = prob.kkt(x, lambda);
    const double scale = 1.0 + prob.m.cwiseAbs().maxCoeff();
    for (int it = 0; it < max_iter; ++it) {
        if (f.norm() < tol * scale) return true;
        Eigen::MatrixXd j = prob.jacobian(x, lambda);
        Eigen::VectorXd step = j.fullPivLu().solve(-f);
        if (!step.allFinite()) return false;
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
            const Eigen::VectorXd xn = x + t * step.head(n);
            const double ln = lambda + t * step[n];
            const Eigen::VectorXd fn = prob.kkt(xn, ln);
            if (fn.norm() < (1.0 - 1e-4 * t) * f.norm()) {
                x = xn;
                lambda = ln;
                f = fn;
                break;
            }
            t *= 0.5;
            if (ls == 39) return false;
        }
    }
    return prob.kkt(x, lambda).norm() < tol * scale;
}

}  // namespace

RobustDesign design_robust(const GateContext& ctx, const RobustSettings& settings) {
    if (ctx.n_seg < 2)
        throw ConfigError("robust design needs at least two segments");
    const CouplingMatrix coupling = build_coupling(ctx);
    const GammaMatrices gammas = build_gamma(ctx);
    const Eigen::MatrixXd m_tilde = robust_m_matrix(ctx, coupling);
    const Eigen::MatrixXd g_tilde_raw = robust_gamma_matrix(ctx, gammas);
    const Eigen::MatrixXd g_tilde = 0.5 * (g_tilde_raw + g_tilde_raw.transpose());

    const int ns = ctx.n_seg;
    const int nh = (ns + 1) / 2;
    Eigen::MatrixXd fold = Eigen::MatrixXd::Zero(ns, nh);
    for (int i = 0; i < ns; ++i) fold(i, std::min(i, ns - 1 - i)) = 1.0;

    KktProblem prob;
    prob.m = fold.transpose() * m_tilde * fold;
    prob.h = fold.transpose() * g_tilde * fold;
    prob.g = fold.transpose() * gammas.gamma * fold;

    // seed pool: the plain optimum folded to symmetric form, the weighted
    // eigenproblem, and fixed random directions
    std::vector<Eigen::VectorXd> seeds;
    try {
        auto [plain, rep] = optimize_pulse(ctx, coupling, gammas);
        Eigen::VectorXd x(nh);
        for (int j = 0; j < nh; ++j) {
            const int mirror = ns - 1 - j;
            x[j] = mirror == j ? plain.omega[j] : 0.5 * (plain.omega[j] + plain.omega[mirror]);
        }
        seeds.push_back(x);
    } catch (const std::exception&) {
        // plain optimization may fail; the other seeds still apply
    }
    {
        Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> es;
        es.compute(prob.m, prob.g, true);
        if (es.info() == Eigen::Success) {
            double best = std::numeric_limits<double>::infinity();
            Eigen::VectorXd vec;
            for (int i = 0; i < nh; ++i) {
                if (std::abs(es.betas()[i]) < 1e-14) continue;
                const Complex lam = es.alphas()[i] / es.betas()[i];
                if (std::abs(lam.imag()) > 1e-8 * (1.0 + std::abs(lam))) continue;
                if (std::abs(lam.real()) < best) {
                    Eigen::VectorXcd vc = es.eigenvectors().col(i);
                    int imax = 0;
                    vc.cwiseAbs().maxCoeff(&imax);
                    vc *= std::abs(vc[imax]) / vc[imax];
                    best = std::abs(lam.real());
                    vec = vc.real();
                }
            }
            if (vec.size()) seeds.push_back(vec);
        }
    }
    std::mt19937 rng(settings.rng_seed);
    std::normal_distribution<double> gauss;
    while (static_cast<int>(seeds.size()) < settings.multistart) {
        Eigen::VectorXd x(nh);
        for (int j = 0; j < nh; ++j) x[j] = gauss(rng);
        seeds.push_back(x);
    }

    bool have_best = false;
    Eigen::VectorXd best_x;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_sign = 1;
    int converged = 0;
    for (int sign : {1, -1}) {
        prob.target = sign * pi / 4.0;
        for (const auto& seed : seeds) {
            const double c = seed.dot(prob.g * seed);
            if (c == 0.0 || (c > 0) != (sign > 0)) continue;
            Eigen::VectorXd x = seed * std::sqrt(std::abs(prob.target) / std::abs(c));
            if (!newton_solve(prob, x, settings.max_newton, settings.tol)) continue;
            ++converged;
            const double cost = prob.cost(x);
            if (cost < best_cost) {
                best_cost = cost;
                best_x = x;
                best_sign = sign;
                have_best = true;
            }
        }
    }
    if (!have_best)
        throw ConvergenceError("robust design found no feasible pulse (constraint unreachable)");

    RobustDesign out;
    out.pulse.omega = fold * best_x;
    out.pulse.theta_sign = best_sign;
    out.pulse.symmetric = true;
    if (ctx.omega_max > 0.0 && out.pulse.omega.cwiseAbs().maxCoeff() > ctx.omega_max)
        out.pulse.bound_exceeded = true;
    out.report = evaluate_with(ctx, coupling, gammas, out.pulse, ctx.t0);
    out.diagnostics.cost = best_cost;
    out.diagnostics.alpha_integral = std::sqrt(out.pulse.omega.dot(m_tilde * out.pulse.omega));
    out.diagnostics.theta_integral = out.pulse.omega.dot(g_tilde * out.pulse.omega);
    out.diagnostics.starts_converged = converged;
    return out;
}

}  // namespace iongate
