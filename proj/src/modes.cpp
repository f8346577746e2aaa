#include "iongate/modes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "iongate/constants.hpp"

namespace iongate {

Eigen::VectorXd NormalMode::sum_c() const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(c.front().size());
    for (const auto& v : c) s += v;
    return s;
}

Eigen::VectorXd NormalMode::weighted_sum_c() const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(c.front().size());
    for (int n = -ncut; n <= ncut; ++n) s += (2.0 * n + beta) * sideband(n);
    return s;
}

SeedPencil make_seed_pencil(const HessianSeries& h) {
    const Eigen::MatrixXd& a = h.a_eff;
    const Eigen::MatrixXd& q = h.q_eff;
    const Eigen::MatrixXd q2 = q * q;
    SeedPencil p;
    p.lhs = a + 0.5 * q2 + 0.125 * q * a * q + (1.0 / 128.0) * q2 * q2;
    p.rhs = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - 0.375 * q2;
    p.lhs = 0.5 * (p.lhs + p.lhs.transpose()).eval();
    return p;
}

ModeSeeds seed_modes(const HessianSeries& h) {
    const SeedPencil p = make_seed_pencil(h);
    Eigen::LLT<Eigen::MatrixXd> llt(p.rhs);
    if (llt.info() != Eigen::Success)
        throw InstabilityError("seed pencil right-hand side is not positive definite; "
                               "drive outside the validity region");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(p.lhs, p.rhs);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("seed pencil eigensolve failed");
    ModeSeeds seeds;
    seeds.beta2 = es.eigenvalues();
    seeds.c0 = es.eigenvectors();
    return seeds;
}

NormalMode seed_mode_vector(const HessianSeries& h, double beta,
                            const Eigen::VectorXd& c0, int ncut) {
    NormalMode m;
    m.beta = beta;
    m.ncut = ncut;
    m.c.assign(2 * ncut + 1, Eigen::VectorXd::Zero(c0.size()));
    m.sideband(0) = c0;
    const Eigen::VectorXd qc = h.q_eff * c0;
    if (ncut >= 1) {  // harmonics exp(i(+-2 + beta) t)
        m.sideband(1) = -0.25 * (1.0 - beta) * qc;
        m.sideband(-1) = -0.25 * (1.0 + beta) * qc;
    }
    if (ncut >= 2) {  // harmonics exp(i(+-4 + beta) t)
        const Eigen::VectorXd q2c = h.q_eff * qc;
        m.sideband(2) = (1.0 / 64.0) * (1.0 - 1.5 * beta) * q2c;
        m.sideband(-2) = (1.0 / 64.0) * (1.0 + 1.5 * beta) * q2c;
    }
    return m;
}

Eigen::MatrixXd assemble_block_matrix(const HessianSeries& h, double beta, int order) {
    const int dof = h.dof();
    const int blocks = 2 * order + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dof * blocks, dof * blocks);
    for (int bi = 0; bi < blocks; ++bi) {
        const int n = bi - order;
        const double w = 2.0 * n + beta;
        t.block(bi * dof, bi * dof, dof, dof) = h.a_eff;
        t.block(bi * dof, bi * dof, dof, dof).diagonal().array() -= w * w;
        for (int bj = 0; bj < blocks; ++bj) {
            const int d = std::abs(bi - bj);
            if (d == 1)
                t.block(bi * dof, bj * dof, dof, dof) = -h.q_eff;
            else if (d >= 2 && d - 2 < static_cast<int>(h.q_high.size()))
                t.block(bi * dof, bj * dof, dof, dof) = -h.q_high[d - 2];
        }
    }
    return t;
}

namespace {

Eigen::VectorXd stack_mode(const NormalMode& m, int order) {
    const int dof = static_cast<int>(m.c.front().size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dof * (2 * order + 1));
    for (int n = -order; n <= order; ++n)
        if (std::abs(n) <= m.ncut) x.segment(dof * (n + order), dof) = m.sideband(n);
    return x;
}

NormalMode unstack_mode(const Eigen::VectorXd& x, double beta, int order, int dof) {
    NormalMode m;
    m.beta = beta;
    m.ncut = order;
    m.c.assign(2 * order + 1, Eigen::VectorXd::Zero(dof));
    for (int n = -order; n <= order; ++n)
        m.sideband(n) = x.segment(dof * (n + order), dof);
    return m;
}

struct RitzPair {
    double delta;
    Eigen::VectorXd vec;
};

// The n_want eigenpairs of t nearest zero, dense path.
std::vector<RitzPair> nearest_zero_dense(const Eigen::MatrixXd& t, int n_want) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("block-matrix eigensolve failed");
    const auto& ev = es.eigenvalues();
    std::vector<int> idx(ev.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + n_want, idx.end(),
                      [&](int a, int b) { return std::abs(ev[a]) < std::abs(ev[b]); });
    std::vector<RitzPair> out;
    for (int i = 0; i < n_want; ++i)
        out.push_back({ev[idx[i]], es.eigenvectors().col(idx[i])});
    return out;
}

// Shift-invert subspace iteration about zero, seeded by the current mode
// vectors; returns n_want Ritz pairs.
std::vector<RitzPair> nearest_zero_sparse(const Eigen::MatrixXd& t,
                                          const Eigen::MatrixXd& seeds, int n_want) {
    const int dim = static_cast<int>(t.rows());
    Eigen::SparseMatrix<double> ts = t.sparseView(1e-300, 1.0);
    ts.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(ts);
    if (lu.info() != Eigen::Success)
        throw ConvergenceError("block matrix is singular at the current exponent");

    const int cols = std::max(n_want, static_cast<int>(seeds.cols()));
    Eigen::MatrixXd v = seeds;
    if (v.cols() < cols) {
        v.conservativeResize(dim, cols);
        for (int c = static_cast<int>(seeds.cols()); c < cols; ++c)
            v.col(c) = Eigen::VectorXd::Unit(dim, c % dim);
    }
    for (int it = 0; it < 8; ++it) {
        Eigen::MatrixXd w(dim, cols);
        for (int c = 0; c < cols; ++c) w.col(c) = lu.solve(v.col(c));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
        v = qr.householderQ() * Eigen::MatrixXd::Identity(dim, cols);
    }
    // Rayleigh-Ritz in the converged subspace.
    Eigen::MatrixXd small = v.transpose() * t * v;
    small = 0.5 * (small + small.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
    std::vector<int> idx(cols);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()[a]) < std::abs(es.eigenvalues()[b]);
    });
    std::vector<RitzPair> out;
    for (int i = 0; i < n_want; ++i)
        out.push_back({es.eigenvalues()[idx[i]], v * es.eigenvectors().col(idx[i])});
    return out;
}

std::vector<RitzPair> nearest_zero(const Eigen::MatrixXd& t, const Eigen::MatrixXd& seeds,
                                   int n_want, const RefineSettings& settings) {
    if (t.rows() <= settings.dense_threshold) return nearest_zero_dense(t, n_want);
    return nearest_zero_sparse(t, seeds, n_want);
}

}  // namespace

std::vector<NormalMode> resolve_degeneracy(const HessianSeries& h,
                                           const std::vector<NormalMode>& seeds,
                                           const RefineSettings& settings) {
    const int dof = h.dof();
    const int order = settings.block_order;
    const int n = static_cast<int>(seeds.size());

    std::vector<double> beta(n);
    Eigen::MatrixXd vecs(dof * (2 * order + 1), n);
    for (int i = 0; i < n; ++i) {
        beta[i] = seeds[i].beta;
        Eigen::VectorXd x = stack_mode(seeds[i], order);
        vecs.col(i) = x / x.norm();
    }

    std::vector<bool> done(n, false);
    std::vector<double> residual(n, 0.0);
    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        bool all_done = true;
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            all_done = false;
            const Eigen::MatrixXd t = assemble_block_matrix(h, beta[i], order);
            auto pairs = nearest_zero(t, vecs, n, settings);
            // order the candidates by value; the i-th branch keeps the i-th
            std::sort(pairs.begin(), pairs.end(),
                      [](const RitzPair& a, const RitzPair& b) { return a.delta < b.delta; });
            int pick = std::min(i, static_cast<int>(pairs.size()) - 1);
            double overlap = std::abs(pairs[pick].vec.dot(vecs.col(i)));
            if (overlap < 0.5) {
                // branch crossing: re-anchor on maximal overlap
                for (int p = 0; p < static_cast<int>(pairs.size()); ++p) {
                    const double o = std::abs(pairs[p].vec.dot(vecs.col(i)));
                    if (o > overlap) {
                        overlap = o;
                        pick = p;
                    }
                }
                std::fprintf(stderr,
                             "iongate: mode branch re-anchored by eigenvector overlap (%.3f)\n",
                             overlap);
            }
            const double delta = pairs[pick].delta;
            const double beta2 = beta[i] * beta[i] + delta;
            if (beta2 < 0.0)
                throw InstabilityError("mode refinement reached an imaginary exponent");
            const double beta_new = std::sqrt(beta2);
            Eigen::VectorXd vec = pairs[pick].vec;
            if (vec.dot(vecs.col(i)) < 0.0) vec = -vec;
            vecs.col(i) = vec;
            if (std::abs(beta_new - beta[i]) < settings.eps) {
                done[i] = true;
                residual[i] = (t * vecs.col(i)).norm();
            }
            beta[i] = beta_new;
        }
        if (all_done) break;
    }
    for (int i = 0; i < n; ++i)
        if (!done[i])
            throw ConvergenceError("mode refinement stagnated at beta " + std::to_string(beta[i]));

    std::vector<NormalMode> out;
    for (int i = 0; i < n; ++i) {
        NormalMode m = unstack_mode(vecs.col(i), beta[i], order, dof);
        m.residual = residual[i];
        out.push_back(std::move(m));
    }
    return out;
}

NormalMode refine_mode(const HessianSeries& h, const NormalMode& seed,
                       const RefineSettings& settings) {
    return resolve_degeneracy(h, {seed}, settings).front();
}

ModeSet normalize_modeset(std::vector<NormalMode> modes) {
    ModeSet set;
    set.stable = true;
    for (auto& m : modes)
        if (m.imaginary) set.stable = false;

    if (set.stable) {
        // group near-coincident exponents; mix inside each group so the
        // quantization form is diagonal there
        std::sort(modes.begin(), modes.end(),
                  [](const NormalMode& a, const NormalMode& b) { return a.beta < b.beta; });
        std::size_t g0 = 0;
        while (g0 < modes.size()) {
            std::size_t g1 = g0 + 1;
            while (g1 < modes.size() && modes[g1].beta - modes[g1 - 1].beta < 1e-9) ++g1;
            const int n = static_cast<int>(g1 - g0);
            double offdiag = 0.0;
            Eigen::MatrixXd f(n, n);
            if (n > 1) {
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        f(a, b) = modes[g0 + a].weighted_sum_c().dot(modes[g0 + b].sum_c());
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        if (a != b) offdiag = std::max(offdiag, std::abs(f(a, b)));
            }
            if (n > 1 && offdiag > 1e-12 * f.cwiseAbs().maxCoeff()) {
                f = 0.5 * (f + f.transpose()).eval();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f);
                std::vector<NormalMode> mixed(n, modes[g0]);
                for (int j = 0; j < n; ++j) {
                    for (auto& v : mixed[j].c) v.setZero();
                    for (int a = 0; a < n; ++a)
                        for (int k = 0; k < static_cast<int>(mixed[j].c.size()); ++k)
                            mixed[j].c[k] += es.eigenvectors()(a, j) * modes[g0 + a].c[k];
                }
                for (int j = 0; j < n; ++j) modes[g0 + j] = std::move(mixed[j]);
            }
            g0 = g1;
        }

        for (auto& m : modes) {
            const double nu = m.weighted_sum_c().dot(m.sum_c());
            if (!(nu > 0.0)) {
                m.normalized = false;
                set.stable = false;  // unusable for quantization
                continue;
            }
            const double scale = std::sqrt(nu / m.beta);
            for (auto& v : m.c) v /= scale;
            // sign convention: largest-magnitude carrier entry positive
            int imax = 0;
            m.sideband(0).cwiseAbs().maxCoeff(&imax);
            if (m.sideband(0)[imax] < 0.0)
                for (auto& v : m.c) v = -v;
            m.normalized = true;
        }

        double defect = 0.0;
        for (std::size_t a = 0; a < modes.size(); ++a) {
            const Eigen::VectorXd wa = modes[a].weighted_sum_c();
            for (std::size_t b = 0; b < modes.size(); ++b) {
                const double f = wa.dot(modes[b].sum_c());
                const double target = a == b ? modes[a].beta : 0.0;
                defect = std::max(defect, std::abs(f - target));
            }
        }
        set.bilinear_defect = defect;
    }

    std::sort(modes.begin(), modes.end(), [](const NormalMode& a, const NormalMode& b) {
        if (a.beta != b.beta) return a.beta < b.beta;
        // deterministic tie-break on the carrier vector
        const auto& ca = a.c[a.ncut];
        const auto& cb = b.c[b.ncut];
        for (int i = 0; i < ca.size(); ++i)
            if (ca[i] != cb[i]) return ca[i] < cb[i];
        return false;
    });
    set.modes = std::move(modes);
    return set;
}

ModeSet solve_modes(const HessianSeries& h, int ncut, const RefineSettings& settings) {
    ModeSeeds seeds = seed_modes(h);
    const int total = static_cast<int>(seeds.beta2.size());

    std::vector<NormalMode> modes(total);
    std::atomic<bool> any_imag{false};
    // cluster consecutive seeds closer than the threshold
    std::vector<std::pair<int, int>> clusters;
    {
        int c0 = 0;
        for (int i = 1; i <= total; ++i) {
            const bool split =
                i == total ||
                std::abs(std::sqrt(std::abs(seeds.beta2[i])) -
                         std::sqrt(std::abs(seeds.beta2[i - 1]))) > settings.cluster_threshold;
            if (split) {
                clusters.emplace_back(c0, i);
                c0 = i;
            }
        }
    }

    auto refine_cluster = [&](int begin, int end) {
        std::vector<NormalMode> cluster_seeds;
        for (int i = begin; i < end; ++i) {
            if (seeds.beta2[i] < 0.0) {
                NormalMode m;
                m.beta = std::sqrt(-seeds.beta2[i]);
                m.imaginary = true;
                m.ncut = settings.block_order;
                m.c.assign(2 * settings.block_order + 1,
                           Eigen::VectorXd::Zero(h.dof()));
                m.sideband(0) = seeds.c0.col(i);
                modes[i] = std::move(m);
                any_imag = true;
            } else {
                cluster_seeds.push_back(seed_mode_vector(h, std::sqrt(seeds.beta2[i]),
                                                         seeds.c0.col(i), settings.block_order));
            }
        }
        if (cluster_seeds.empty()) return;
        auto refined = resolve_degeneracy(h, cluster_seeds, settings);
        int r = 0;
        for (int i = begin; i < end; ++i)
            if (seeds.beta2[i] >= 0.0) modes[i] = std::move(refined[r++]);
    };

    if (settings.n_threads > 1 && clusters.size() > 1) {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(settings.n_threads);
        for (int w = 0; w < settings.n_threads; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    for (std::size_t c = next++; c < clusters.size(); c = next++)
                        refine_cluster(clusters[c].first, clusters[c].second);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        for (auto& [b, e] : clusters) refine_cluster(b, e);
    }

    if (static_cast<int>(modes.size()) != total)
        throw ConvergenceError("mode bookkeeping lost a cluster member");

    // trim or pad sidebands to the requested ncut
    for (auto& m : modes) {
        if (m.ncut == ncut) continue;
        std::vector<Eigen::VectorXd> c(2 * ncut + 1, Eigen::VectorXd::Zero(h.dof()));
        for (int n = -std::min(ncut, m.ncut); n <= std::min(ncut, m.ncut); ++n)
            c[n + ncut] = m.sideband(n);
        m.c = std::move(c);
        m.ncut = ncut;
    }
    auto set = normalize_modeset(std::move(modes));
    if (any_imag) set.stable = false;
    return set;
}

}  // namespace iongate
