#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "besim/checkpoint.hpp"
#include "besim/config.hpp"
#include "besim/diagnostics.hpp"
#include "besim/error.hpp"
#include "besim/experiments.hpp"
#include "besim/integrator.hpp"
#include "besim/runner.hpp"

namespace py = pybind11;
using namespace besim;

namespace {

struct Grid {
  GridPtr ptr;
};

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <std::size_t N>
Array to_array(const GridPtr& g, const std::array<std::vector<double>, N>& comps) {
  const auto& d = g->dims();
  Array out({static_cast<py::ssize_t>(N), py::ssize_t(d[0]), py::ssize_t(d[1]), py::ssize_t(d[2])});
  double* p = out.mutable_data();
  for (const auto& c : comps) p = std::copy(c.begin(), c.end(), p);
  return out;
}

template <std::size_t N>
void from_array(const GridPtr& g, const Array& a, std::array<std::vector<double>, N>& comps, const char* name) {
  const auto& d = g->dims();
  if (a.ndim() != 4 || a.shape(0) != py::ssize_t(N) || a.shape(1) != d[0] || a.shape(2) != d[1] || a.shape(3) != d[2])
    throw Error(ErrorKind::dimension, std::string(name) + " must have shape (" + std::to_string(N) + ", " +
                                          std::to_string(d[0]) + ", " + std::to_string(d[1]) + ", " +
                                          std::to_string(d[2]) + ")");
  const double* p = a.data();
  for (auto& c : comps) {
    c.assign(p, p + g->points());
    p += g->points();
  }
}

py::dict breakdown_dict(const EnergyBreakdown& e) {
  py::dict d;
  d["kinetic"] = e.kinetic;
  d["q_l2"] = e.q_l2;
  d["q_grad"] = e.q_grad;
  d["diss_visc"] = e.diss_visc;
  d["diss_q0"] = e.diss_q0;
  d["diss_q1"] = e.diss_q1;
  d["diss_q2"] = e.diss_q2;
  d["rhs_xi_terms"] = e.rhs_xi_terms;
  d["rhs_bulk_terms"] = e.rhs_bulk_terms;
  d["energy"] = e.energy();
  d["dissipation"] = e.dissipation();
  d["source"] = e.source();
  return d;
}

}  // namespace

PYBIND11_MODULE(_besim, m) {
  m.doc() = "Periodic pseudo-spectral Beris-Edwards Q-tensor / Navier-Stokes simulator";

  static py::handle besim_error = py::exception<Error>(m, "BesimError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(besim_error)(std::string(to_string(e.kind())) + ": " + e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(besim_error.ptr(), err.ptr());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init([](std::array<int, 3> dims, std::optional<std::array<double, 3>> box) {
             return Grid{box ? make_grid(dims, *box) : make_grid(dims)};
           }),
           py::arg("dims"), py::arg("box") = py::none())
      .def_property_readonly("dims", [](const Grid& g) { return g.ptr->dims(); })
      .def_property_readonly("box", [](const Grid& g) { return g.ptr->box(); })
      .def_property_readonly("points", [](const Grid& g) { return g.ptr->points(); })
      .def_property_readonly("volume", [](const Grid& g) { return g.ptr->volume(); })
      .def("cutoff", [](const Grid& g, int axis) { return g.ptr->cutoff(axis); })
      .def("__repr__", [](const Grid& g) {
        const auto& d = g.ptr->dims();
        return "Grid(" + std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]) + ")";
      });

  py::class_<ModelParams>(m, "Params")
      .def(py::init([](double a, double b, double c, double L, double Gamma, double mu, double xi) {
             ModelParams p;
             p.a = a;
             p.b = b;
             p.c = c;
             p.L = L;
             p.Gamma = Gamma;
             p.mu = mu;
             p.xi = xi;
             p.validated();
             return p;
           }),
           py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("c") = 0.0, py::arg("L") = 1.0, py::arg("Gamma") = 1.0,
           py::arg("mu") = 1.0, py::arg("xi") = 0.0)
      .def_readwrite("a", &ModelParams::a)
      .def_readwrite("b", &ModelParams::b)
      .def_readwrite("c", &ModelParams::c)
      .def_readwrite("L", &ModelParams::L)
      .def_readwrite("Gamma", &ModelParams::Gamma)
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("xi", &ModelParams::xi);

  py::class_<StepConfig>(m, "StepConfig")
      .def(py::init([](double dt, const std::string& scheme, double picard_tol, int picard_max_iter,
                       double cfl_limit) {
             StepConfig c;
             c.dt = dt;
             c.scheme = parse_scheme(scheme);
             c.picard_tol = picard_tol;
             c.picard_max_iter = picard_max_iter;
             c.cfl_limit = cfl_limit;
             c.validated();
             return c;
           }),
           py::arg("dt") = 1e-3, py::arg("scheme") = "rk4", py::arg("picard_tol") = 1e-10,
           py::arg("picard_max_iter") = 50, py::arg("cfl_limit") = 0.5)
      .def_readwrite("dt", &StepConfig::dt)
      .def_property(
          "scheme", [](const StepConfig& c) { return std::string(to_string(c.scheme)); },
          [](StepConfig& c, const std::string& s) { c.scheme = parse_scheme(s); })
      .def_readwrite("picard_tol", &StepConfig::picard_tol)
      .def_readwrite("picard_max_iter", &StepConfig::picard_max_iter)
      .def_readwrite("cfl_limit", &StepConfig::cfl_limit);

  py::class_<StateSnapshot>(m, "State")
      .def_static("zeros", [](const Grid& g, const ModelParams& p) { return StateSnapshot::zeros(g.ptr, p); })
      .def_static(
          "random",
          [](const Grid& g, const ModelParams& p, std::uint64_t seed, double q_amplitude, double u_amplitude,
             int kmax, double spectrum) {
            StateSnapshot s{0.0, random_traceless_q(g.ptr, spectrum, q_amplitude, seed, kmax),
                            random_solenoidal_velocity(g.ptr, spectrum, u_amplitude, seed + 1, kmax), p};
            return project_constraints(std::move(s));
          },
          py::arg("grid"), py::arg("params"), py::arg("seed") = 1, py::arg("q_amplitude") = 0.1,
          py::arg("u_amplitude") = 0.1, py::arg("kmax") = 4, py::arg("spectrum") = 1.0)
      .def_static(
          "from_arrays",
          [](const Grid& g, const ModelParams& p, const Array& Q, const Array& u, double time, bool project) {
            StateSnapshot s = StateSnapshot::zeros(g.ptr, p);
            from_array(g.ptr, Q, s.Q.comps, "Q");
            from_array(g.ptr, u, s.u.comps, "u");
            s.time = time;
            return project ? project_constraints(std::move(s)) : s;
          },
          py::arg("grid"), py::arg("params"), py::arg("Q"), py::arg("u"), py::arg("time") = 0.0,
          py::arg("project") = true,
          "Q holds the six entries Q00 Q01 Q02 Q11 Q12 Q22, u the three velocity components.")
      .def_readwrite("time", &StateSnapshot::time)
      .def_readwrite("params", &StateSnapshot::params)
      .def_property_readonly("grid", [](const StateSnapshot& s) { return Grid{s.grid()}; })
      .def_property_readonly("Q", [](const StateSnapshot& s) { return to_array(s.grid(), s.Q.comps); })
      .def_property_readonly("u", [](const StateSnapshot& s) { return to_array(s.grid(), s.u.comps); })
      .def("max_abs_trace", [](const StateSnapshot& s) { return s.Q.max_abs_trace(); });

  m.def("project_constraints", &project_constraints);
  m.def(
      "step",
      [](const StateSnapshot& s, const StepConfig& cfg) {
        PicardTrace trace;
        StateSnapshot out = step(s, cfg, &trace);
        return py::make_tuple(out, trace.residuals);
      },
      "One step; returns (state, picard_residuals).");
  m.def(
      "integrate",
      [](const StateSnapshot& s, const StepConfig& cfg, double t_end,
         std::optional<std::function<void(const StateSnapshot&, long)>> callback) {
        std::vector<Observer> obs;
        if (callback) obs.push_back([&](const StateSnapshot& st, const StepInfo& info) { (*callback)(st, info.index); });
        return integrate(s, cfg, t_end, obs);
      },
      py::arg("state"), py::arg("config"), py::arg("t_end"), py::arg("callback") = py::none());
  m.def("cfl_dt", [](const StateSnapshot& s, double limit) { return cfl_dt(s.u, limit); }, py::arg("state"),
        py::arg("cfl_limit") = 0.5);

  m.def("energy_breakdown", [](const StateSnapshot& s) { return breakdown_dict(energy_breakdown(s)); });
  m.def("sobolev_energies", [](const StateSnapshot& s, double sob) {
    const auto e = sobolev_energies(s, sob);
    return py::make_tuple(e.E, e.D);
  });
  m.def("cancellation_probe", [](const StateSnapshot& s, std::uint64_t seed) { return cancellation_probe(s, seed).residual; },
        py::arg("state"), py::arg("seed") = 7);
  m.def("free_energy", [](const StateSnapshot& s) { return free_energy(s.Q, s.params); });
  m.def(
      "variational_consistency",
      [](const StateSnapshot& s, double eps, int directions, std::uint64_t seed) {
        return variational_consistency(s.Q, s.params, eps, directions, seed);
      },
      py::arg("state"), py::arg("eps") = 1e-4, py::arg("directions") = 20, py::arg("seed") = 11);
  m.def("serrin_exponents", [](double p) {
    const auto s = SerrinSpec::make(p);
    return py::make_tuple(s.p, s.q);
  });
  m.def(
      "serrin_norm",
      [](const std::vector<double>& samples, double dt, double p) {
        SerrinAccumulator acc;
        acc.spec = SerrinSpec::make(p);
        for (std::size_t i = 0; i < samples.size(); ++i) acc = serrin_norm(std::move(acc), samples[i], i ? dt : 0.0);
        return acc.norm();
      },
      "Serrin norm of a sample stream taken every dt, first sample at t = 0.");
  m.def("difference_functional", &difference_functional);
  m.def(
      "twin_run",
      [](const StateSnapshot& a, const StateSnapshot& b, const StepConfig& ca, const StepConfig& cb, double T,
         double p) {
        const auto r = twin_run(a, b, ca, cb, T, p);
        py::dict d;
        d["times"] = r.times;
        d["q_functional"] = r.q_functional;
        d["gronwall_integrand"] = r.gronwall_integrand;
        d["serrin_lap_q"] = r.serrin_lap_q.norm();
        d["serrin_grad_u"] = r.serrin_grad_u.norm();
        return d;
      },
      py::arg("state_a"), py::arg("state_b"), py::arg("config_a"), py::arg("config_b"), py::arg("t_end"),
      py::arg("p") = 4.0);

  m.def("write_checkpoint", [](const StateSnapshot& s, const std::filesystem::path& p) { write_checkpoint(s, p); });
  m.def("read_checkpoint", &read_checkpoint);
  m.def(
      "check_config", [](const std::string& text) { return std::string(to_string(parse_config(text).experiment)); },
      "Parses and validates config text; returns the experiment type.");
  m.def(
      "run",
      [](const std::filesystem::path& config, std::optional<std::string> out_dir, std::optional<std::uint64_t> seed) {
        RunOptions opt;
        opt.out_dir = std::move(out_dir);
        opt.seed = seed;
        py::gil_scoped_release release;
        return run(load_config(config), opt);
      },
      py::arg("config"), py::arg("out_dir") = py::none(), py::arg("seed") = py::none());
  m.def("summarize", [](const std::filesystem::path& dir) { return summarize(dir); });
}
