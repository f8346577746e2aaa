// Python bindings for the main pipeline operations: crystal solve, mode
// solve, gate design and the series-expansion integrals.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iongate/md.hpp"
#include "iongate/pipeline.hpp"

namespace py = pybind11;
using namespace iongate;

namespace {

py::dict report_dict(const GateContext& ctx, const GateReport& rep) {
    py::dict d;
    d["theta"] = rep.theta;
    d["delta_f"] = rep.delta_f;
    d["max_alpha_abs"] = rep.max_alpha_abs;
    d["t0_s"] = rep.t0 * ctx.units.time_s;
    d["lambda"] = rep.lambda;
    std::vector<std::array<Complex, 2>> alphas = rep.alpha;
    py::list rows;
    for (const auto& a : alphas) {
        py::list pair;
        pair.append(a[0]);
        pair.append(a[1]);
        rows.append(pair);
    }
    d["alpha"] = rows;
    d["mode_infidelity"] = rep.mode_infidelity;
    return d;
}

}  // namespace

PYBIND11_MODULE(_iongate, m) {
    m.doc() = "Paul-trap ion crystal dynamics and entangling-gate design";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<InstabilityError>(m, "InstabilityError");
    py::register_exception<ConvergenceError>(m, "ConvergenceError");

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def_property_readonly("n_ions", [](const SimulationConfig& c) { return c.n_ions; })
        .def_property_readonly("config_hash",
                               [](const SimulationConfig& c) { return c.config_hash; });

    py::class_<EquilibriumTrajectory>(m, "EquilibriumTrajectory")
        .def_property_readonly("n_ions", [](const EquilibriumTrajectory& t) { return t.n_ions; })
        .def_property_readonly("order", [](const EquilibriumTrajectory& t) { return t.order; })
        .def_property_readonly("residual",
                               [](const EquilibriumTrajectory& t) { return t.residual; })
        .def_property_readonly("converged",
                               [](const EquilibriumTrajectory& t) { return t.converged; })
        .def("positions", &EquilibriumTrajectory::positions, py::arg("t"))
        .def("coefficient", [](const EquilibriumTrajectory& t, int n) { return t.b.at(n); },
             py::arg("n"));

    py::class_<CrystalSnapshot>(m, "CrystalSnapshot")
        .def_property_readonly("trajectory",
                               [](const CrystalSnapshot& s) { return s.trajectory; })
        .def_property_readonly("seed", [](const CrystalSnapshot& s) { return s.seed; })
        .def_property_readonly("stable_modes",
                               [](const CrystalSnapshot& s) {
                                   return s.modes && s.modes->stable;
                               })
        .def_property_readonly("mode_frequencies", [](const CrystalSnapshot& s) {
            std::vector<double> betas;
            if (s.modes)
                for (const auto& mode : s.modes->modes) betas.push_back(mode.beta);
            return betas;
        });

    py::class_<GateContext>(m, "GateContext")
        .def_property_readonly("n_modes", [](const GateContext& c) { return c.n_modes; })
        .def_property_readonly("eta", [](const GateContext& c) { return c.eta; })
        .def_property_readonly("nbar", [](const GateContext& c) { return c.nbar; })
        .def("with_detuning", &GateContext::with_detuning, py::arg("mu_rad_s"));

    py::class_<PulseSequence>(m, "PulseSequence")
        .def_property_readonly("omega", [](const PulseSequence& p) { return p.omega; })
        .def_property_readonly("theta_sign", [](const PulseSequence& p) { return p.theta_sign; })
        .def_property_readonly("bound_exceeded",
                               [](const PulseSequence& p) { return p.bound_exceeded; });

    m.def("parse_config", &parse_config_file, py::arg("path"),
          "Parse a config file into a SimulationConfig");
    m.def("parse_config_text", &parse_config_text, py::arg("text"));

    m.def("solve_crystal", &solve_crystal, py::arg("config"), py::arg("seed") = 1,
          "Damped search plus Fourier refinement; returns a CrystalSnapshot");
    m.def("solve_modes",
          [](CrystalSnapshot& snap, int threads) { attach_modes(snap, threads); },
          py::arg("snapshot"), py::arg("threads") = 1,
          "Solve all Floquet modes and attach them to the snapshot");
    m.def("read_snapshot", &read_snapshot, py::arg("path"));
    m.def("write_snapshot", &write_snapshot, py::arg("path"), py::arg("snapshot"));

    m.def("make_gate_context", &make_gate_context, py::arg("config"), py::arg("snapshot"));
    m.def("design_gate",
          [](const GateContext& ctx) {
              const CouplingMatrix coupling = build_coupling(ctx);
              const GammaMatrices gammas = build_gamma(ctx);
              auto [pulse, rep] = optimize_pulse(ctx, coupling, gammas);
              py::dict d = report_dict(ctx, rep);
              d["omega_rad_s"] = pulse.omega_rad_s(ctx.units);
              return py::make_tuple(pulse, d);
          },
          py::arg("context"), "Optimize the segmented pulse; returns (pulse, report dict)");
    m.def("evaluate_sequence",
          [](const GateContext& ctx, const PulseSequence& pulse, double t0_s) {
              return report_dict(ctx, evaluate_sequence(ctx, pulse, t0_s));
          },
          py::arg("context"), py::arg("pulse"), py::arg("t0_s") = 0.0);
    m.def("scan_detuning",
          [](const GateContext& ctx, const std::vector<double>& grid, int threads) {
              py::list rows;
              for (const auto& p : scan_detuning(ctx, grid, threads)) {
                  py::dict d;
                  d["mu_rad_s"] = p.mu_rad_s;
                  d["delta_f"] = p.delta_f;
                  d["theta"] = p.theta;
                  d["max_alpha_abs"] = p.max_alpha_abs;
                  d["status"] = p.status;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("context"), py::arg("mu_rad_s"), py::arg("threads") = 1);
    m.def("design_robust",
          [](const GateContext& ctx) {
              RobustSettings settings;
              const RobustDesign rd = design_robust(ctx, settings);
              py::dict d = report_dict(ctx, rd.report);
              d["omega_rad_s"] = rd.pulse.omega_rad_s(ctx.units);
              d["cost"] = rd.diagnostics.cost;
              return py::make_tuple(rd.pulse, d);
          },
          py::arg("context"));

    m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("x"));
    m.def("single_integral",
          [](double t1, double t2, double mu, double omega, double omega_rf, double phi0,
             const std::vector<double>& harmonics, double eps) {
              PhaseSpec p;
              p.phi0 = phi0;
              p.harmonics = harmonics;
              SeriesBudget b;
              b.eps = eps;
              return single_integral(t1, t2, mu, omega, omega_rf, p, b).value;
          },
          py::arg("t1"), py::arg("t2"), py::arg("mu"), py::arg("omega"), py::arg("omega_rf"),
          py::arg("phi0") = 0.0, py::arg("harmonics") = std::vector<double>{},
          py::arg("eps") = 1e-10);

    m.def("delta_k_counterprop", &delta_k_counterprop, py::arg("wavelength_m"));
    m.def("verify_mode",
          [](const CrystalSnapshot& snap, int mode_index, double amplitude, int periods) {
              if (!snap.modes) throw ConfigError("snapshot has no modes");
              IntegratorSettings s;
              s.periods = periods;
              s.record_stride = 100;
              ExcitationSpec exc{mode_index, amplitude};
              const auto v = verify_mode(snap.trajectory, *snap.modes, exc, snap.drive, s);
              py::dict d;
              d["max_deviation"] = v.max_deviation;
              d["probe_ion"] = v.probe_ion;
              d["probe_axis"] = v.probe_axis;
              return d;
          },
          py::arg("snapshot"), py::arg("mode_index") = 0, py::arg("amplitude") = 0.01,
          py::arg("periods") = 100);
}
