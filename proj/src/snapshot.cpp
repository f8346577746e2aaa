#include "iongate/snapshot.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iongate {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct TokenReader {
    std::istringstream in;
    std::string context;

    explicit TokenReader(std::string text, std::string ctx)
        : in(std::move(text)), context(std::move(ctx)) {}

    std::string word() {
        std::string w;
        if (!(in >> w)) throw IoError(context + ": unexpected end of file");
        return w;
    }
    void expect(const std::string& key) {
        const std::string w = word();
        if (w != key) throw IoError(context + ": expected '" + key + "', found '" + w + "'");
    }
    double number() {
        const std::string w = word();
        try {
            std::size_t pos = 0;
            const double v = std::stod(w, &pos);
            if (pos != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            throw IoError(context + ": bad number '" + w + "'");
        }
    }
    long integer() {
        const double v = number();
        return static_cast<long>(v);
    }
};

}  // namespace

std::string trajectory_hash(const EquilibriumTrajectory& traj) {
    std::string bytes;
    for (const auto& b : traj.b)
        for (int i = 0; i < b.rows(); ++i)
            for (int s = 0; s < 3; ++s) bytes += fmt(b(i, s)) + " ";
    return content_hash(bytes);
}

void write_snapshot(const std::string& path, const CrystalSnapshot& snap) {
    std::ostringstream out;
    const auto& t = snap.trajectory;
    out << "iongate-snapshot v" << snap.format_version << "\n";
    out << "config_hash " << (snap.config_hash.empty() ? "-" : snap.config_hash) << "\n";
    out << "seed " << snap.seed << "\n";
    out << "n_ions " << t.n_ions << "\n";
    out << "fourier_order " << t.order << "\n";
    out << "rf_rad_s " << fmt(snap.drive.rf_rad_s) << "\n";
    out << "mass_kg " << fmt(snap.species.mass_kg) << "\n";
    out << "charge " << snap.species.charge << "\n";
    out << "label " << (snap.species.label.empty() ? "-" : snap.species.label) << "\n";
    out << "length_unit_m " << fmt(snap.units().length_m) << "\n";
    out << "time_unit_s " << fmt(snap.units().time_s) << "\n";
    out << "A";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out << " " << fmt(snap.drive.a_matrix(r, c));
    out << "\nQ";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out << " " << fmt(snap.drive.q_matrix(r, c));
    out << "\n";
    out << "truncation " << snap.truncation.fourier_order << " " << snap.truncation.phase_order
        << " " << snap.truncation.sideband_order << " " << fmt(snap.truncation.precision)
        << " " << snap.truncation.bessel_cutoff << "\n";
    out << "residual " << fmt(t.residual) << "\n";
    out << "converged " << (t.converged ? 1 : 0) << "\n";
    out << "coefficients " << (t.order + 1) * t.n_ions * 3 << "\n";
    for (int n = 0; n <= t.order; ++n) {
        for (int i = 0; i < t.n_ions; ++i) {
            out << fmt(t.b[n](i, 0)) << " " << fmt(t.b[n](i, 1)) << " " << fmt(t.b[n](i, 2))
                << "\n";
        }
    }
    if (snap.modes) {
        const ModeSet& ms = *snap.modes;
        const int ncut = ms.modes.empty() ? 0 : ms.modes.front().ncut;
        out << "modes " << ms.modes.size() << " ncut " << ncut << "\n";
        out << "stable " << (ms.stable ? 1 : 0) << "\n";
        out << "crystal_hash " << (ms.crystal_hash.empty() ? "-" : ms.crystal_hash) << "\n";
        out << "bilinear_defect " << fmt(ms.bilinear_defect) << "\n";
        for (const auto& m : ms.modes) {
            out << "mode " << fmt(m.beta) << " " << (m.imaginary ? 1 : 0) << " "
                << fmt(m.residual) << " " << (m.normalized ? 1 : 0) << "\n";
            for (int n = -m.ncut; n <= m.ncut; ++n) {
                const auto& c = m.sideband(n);
                for (int i = 0; i < c.size(); ++i)
                    out << fmt(c[i]) << ((i + 1) % 6 == 0 || i + 1 == c.size() ? "\n" : " ");
            }
        }
    }
    out << "end\n";

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp);
        f << out.str();
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot move snapshot into place: " + path);
}

CrystalSnapshot read_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open snapshot: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    TokenReader r(ss.str(), path);

    CrystalSnapshot snap;
    r.expect("iongate-snapshot");
    const std::string version = r.word();
    if (version != "v1") throw IoError(path + ": unsupported format version " + version);
    r.expect("config_hash");
    snap.config_hash = r.word();
    if (snap.config_hash == "-") snap.config_hash.clear();
    r.expect("seed");
    snap.seed = static_cast<std::uint64_t>(r.number());
    r.expect("n_ions");
    const int n_ions = static_cast<int>(r.integer());
    r.expect("fourier_order");
    const int order = static_cast<int>(r.integer());
    r.expect("rf_rad_s");
    const double rf = r.number();
    r.expect("mass_kg");
    snap.species.mass_kg = r.number();
    r.expect("charge");
    snap.species.charge = static_cast<int>(r.integer());
    r.expect("label");
    snap.species.label = r.word();
    if (snap.species.label == "-") snap.species.label.clear();
    r.expect("length_unit_m");
    r.number();
    r.expect("time_unit_s");
    r.number();
    Eigen::Matrix3d a, q;
    r.expect("A");
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = r.number();
    r.expect("Q");
    for (int i = 0; i < 9; ++i) q(i / 3, i % 3) = r.number();
    snap.drive = TrapDrive::from_matrices(rf, a, q);
    r.expect("truncation");
    snap.truncation.fourier_order = static_cast<int>(r.integer());
    snap.truncation.phase_order = static_cast<int>(r.integer());
    snap.truncation.sideband_order = static_cast<int>(r.integer());
    snap.truncation.precision = r.number();
    snap.truncation.bessel_cutoff = static_cast<int>(r.integer());
    r.expect("residual");
    snap.trajectory.residual = r.number();
    r.expect("converged");
    snap.trajectory.converged = r.integer() != 0;
    r.expect("coefficients");
    const long count = r.integer();
    if (count != static_cast<long>(order + 1) * n_ions * 3)
        throw IoError(path + ": coefficient count mismatch");
    snap.trajectory.n_ions = n_ions;
    snap.trajectory.order = order;
    snap.trajectory.b.assign(order + 1, Eigen::MatrixXd::Zero(n_ions, 3));
    for (int n = 0; n <= order; ++n)
        for (int i = 0; i < n_ions; ++i)
            for (int s = 0; s < 3; ++s) snap.trajectory.b[n](i, s) = r.number();

    std::string next = r.word();
    if (next == "modes") {
        const int n_modes = static_cast<int>(r.number());
        r.expect("ncut");
        const int ncut = static_cast<int>(r.number());
        ModeSet ms;
        r.expect("stable");
        ms.stable = r.integer() != 0;
        r.expect("crystal_hash");
        ms.crystal_hash = r.word();
        if (ms.crystal_hash == "-") ms.crystal_hash.clear();
        r.expect("bilinear_defect");
        ms.bilinear_defect = r.number();
        for (int k = 0; k < n_modes; ++k) {
            r.expect("mode");
            NormalMode m;
            m.beta = r.number();
            m.imaginary = r.integer() != 0;
            m.residual = r.number();
            m.normalized = r.integer() != 0;
            m.ncut = ncut;
            m.c.assign(2 * ncut + 1, Eigen::VectorXd::Zero(3 * n_ions));
            for (int n = -ncut; n <= ncut; ++n)
                for (int i = 0; i < 3 * n_ions; ++i) m.sideband(n)[i] = r.number();
            ms.modes.push_back(std::move(m));
        }
        snap.modes = std::move(ms);
        next = r.word();
    }
    if (next != "end") throw IoError(path + ": missing end marker");
    return snap;
}

}  // namespace iongate
