#include "besim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "besim/checkpoint.hpp"
#include "besim/diagnostics.hpp"
#include "besim/experiments.hpp"
#include "besim/spectral.hpp"
#include "csv.hpp"

namespace besim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using detail::Column;
using detail::CsvWriter;

int workers_from_env() {
  const char* v = std::getenv("BESIM_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1)
    throw Error(ErrorKind::configuration, std::string("BESIM_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<int>(std::min<long>(n, 64));
}

StateSnapshot initial_state(const RunConfig& cfg, const GridPtr& grid) {
  const int kmax = std::min({cfg.ic.kmax, grid->cutoff(0), grid->cutoff(1), grid->cutoff(2)});
  StateSnapshot s = StateSnapshot::zeros(grid, cfg.params);
  switch (cfg.ic.kind) {
    case InitialKind::random:
      s.Q = random_traceless_q(grid, cfg.ic.spectrum, cfg.ic.q_amplitude, cfg.seed, kmax);
      s.u = random_solenoidal_velocity(grid, cfg.ic.spectrum, cfg.ic.u_amplitude, cfg.seed + 1, kmax);
      break;
    case InitialKind::uniaxial: {
      VelocityField n = VelocityField::zeros(grid);
      for (std::size_t p = 0; p < grid->points(); ++p) {
        const auto x = grid->coordinate(p);
        const double phi = cfg.ic.twist * std::sin(2.0 * std::numbers::pi * x[2] / grid->box()[2]);
        n.comps[0][p] = std::cos(phi);
        n.comps[1][p] = std::sin(phi);
      }
      s.Q = uniaxial_q(grid, cfg.ic.order, n);
      s.u = random_solenoidal_velocity(grid, cfg.ic.spectrum, cfg.ic.u_amplitude, cfg.seed + 1, kmax);
      break;
    }
    case InitialKind::checkpoint: {
      StateSnapshot ck = read_checkpoint(cfg.ic.path);
      if (!ck.grid()->same_shape(*grid))
        throw Error(ErrorKind::configuration, "checkpoint " + cfg.ic.path + " does not match the configured grid");
      s.Q = std::move(ck.Q);
      s.u = std::move(ck.u);
      s.time = ck.time;
      for (auto* c : {&s.Q.grid, &s.u.grid}) *c = grid;
      break;
    }
  }
  return project_constraints(std::move(s));
}

namespace {

std::string p_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%g", p);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

StepConfig resolved_step(const RunConfig& cfg, const StateSnapshot& ic) {
  StepConfig step = cfg.step;
  if (cfg.dt_from_cfl) step.dt = estimate_dt(cfg, ic);
  return step.validated();
}

// ----- single run -------------------------------------------------------

std::vector<Column> timeseries_columns(const RunConfig& cfg) {
  std::vector<Column> cols = {
      {"t", "simulation time"},
      {"kinetic", "||u||^2"},
      {"q_l2", "||Q||^2"},
      {"q_grad", "L ||grad Q||^2"},
      {"diss_visc", "2 mu ||grad u||^2"},
      {"diss_q0", "2 a Gamma ||Q||^2"},
      {"diss_q1", "2 (a+1) Gamma L ||grad Q||^2"},
      {"diss_q2", "2 Gamma L^2 ||Lap Q||^2"},
      {"rhs_xi_terms", "xi-dependent source integrand of the energy balance"},
      {"rhs_bulk_terms", "2 Gamma (M[Q] : Q - L Lap Q) source integrand"},
      {"total_energy", "kinetic + q_l2 + q_grad"},
      {"energy_residual", "energy-equality residual r(t), trapezoid rule over every step"},
      {"trace_max", "max |Tr Q| over the grid"},
      {"divergence_rel", "max |k.u_k| / max |u_k|"},
      {"sobolev_E", "H^s energy ||u||^2 + a||Q||^2 + L||grad Q||^2 (s from config)"},
      {"sobolev_D", "H^s dissipation"},
  };
  for (double p : cfg.serrin_p) {
    cols.push_back({"serrin_lapQ_" + p_label(p), "running L^q(0,t; L^p) norm of Lap Q"});
    cols.push_back({"serrin_gradu_" + p_label(p), "running L^q(0,t; L^p) norm of grad u"});
  }
  return cols;
}

struct SingleRunState {
  long step = 0;
  EnergyLedger ledger;
  std::vector<SerrinAccumulator> lap, grad;

  explicit SingleRunState(const std::vector<double>& ps) {
    for (double p : ps) {
      SerrinAccumulator a;
      a.spec = SerrinSpec::make(p);
      lap.push_back(a);
      grad.push_back(a);
    }
  }

  CheckpointAux to_aux() const {
    CheckpointAux aux;
    aux.set("step", static_cast<double>(step));
    const auto& s = ledger.snapshot();
    aux.set("ledger.count", static_cast<double>(s.count));
    aux.set("ledger.t_prev", s.t_prev);
    aux.set("ledger.e0", s.e0);
    aux.set("ledger.dissipated", s.dissipated);
    aux.set("ledger.supplied", s.supplied);
    const EnergyBreakdown& e = s.prev;
    const double prev[] = {e.kinetic, e.q_l2, e.q_grad, e.diss_visc, e.diss_q0,
                           e.diss_q1, e.diss_q2, e.rhs_xi_terms, e.rhs_bulk_terms};
    for (int i = 0; i < 9; ++i) aux.set("ledger.prev." + std::to_string(i), prev[i]);
    for (std::size_t i = 0; i < lap.size(); ++i) {
      for (const auto& [tag, acc] : {std::pair{"lapQ", &lap[i]}, std::pair{"gradu", &grad[i]}}) {
        const std::string key = std::string("serrin.") + tag + "." + p_label(acc->spec.p);
        aux.set(key + ".time", acc->time);
        aux.set(key + ".integral", acc->running_integral);
        aux.set(key + ".max", acc->running_max);
      }
    }
    return aux;
  }

  void restore(const CheckpointAux& aux) {
    auto need = [&](const std::string& k) {
      const auto v = aux.get(k);
      if (!v) throw Error(ErrorKind::format, "checkpoint lacks run state entry '" + k + "'; cannot resume");
      return *v;
    };
    step = static_cast<long>(need("step"));
    EnergyLedger::Snapshot s;
    s.count = static_cast<long>(need("ledger.count"));
    s.t_prev = need("ledger.t_prev");
    s.e0 = need("ledger.e0");
    s.dissipated = need("ledger.dissipated");
    s.supplied = need("ledger.supplied");
    EnergyBreakdown& e = s.prev;
    double* prev[] = {&e.kinetic, &e.q_l2, &e.q_grad, &e.diss_visc, &e.diss_q0,
                      &e.diss_q1, &e.diss_q2, &e.rhs_xi_terms, &e.rhs_bulk_terms};
    for (int i = 0; i < 9; ++i) *prev[i] = need("ledger.prev." + std::to_string(i));
    ledger = EnergyLedger::restore(s);
    for (std::size_t i = 0; i < lap.size(); ++i) {
      for (auto& [tag, acc] : {std::pair{"lapQ", &lap[i]}, std::pair{"gradu", &grad[i]}}) {
        const std::string key = std::string("serrin.") + tag + "." + p_label(acc->spec.p);
        acc->time = need(key + ".time");
        acc->running_integral = need(key + ".integral");
        acc->running_max = need(key + ".max");
      }
    }
  }
};

std::string checkpoint_name(long step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "checkpoint_%08ld.besim", step);
  return buf;
}

void run_single(const RunConfig& cfg, const fs::path& out, const RunOptions& opt, const GridPtr& grid) {
  SingleRunState run_state(cfg.serrin_p);
  StateSnapshot state;
  bool resumed = false;
  if (opt.resume) {
    Checkpoint ck = read_checkpoint_full(*opt.resume);
    if (!ck.state.grid()->same_shape(*grid))
      throw Error(ErrorKind::configuration, "resume checkpoint grid differs from the configured grid");
    const ModelParams& a = ck.state.params;
    const ModelParams& b = cfg.params;
    if (a.a != b.a || a.b != b.b || a.c != b.c || a.L != b.L || a.Gamma != b.Gamma || a.mu != b.mu ||
        a.xi != b.xi)
      throw Error(ErrorKind::configuration, "resume checkpoint parameters differ from the config");
    run_state.restore(ck.aux);
    state = std::move(ck.state);
    resumed = true;
  } else {
    state = initial_state(cfg, grid);
  }
  if (!(cfg.t_end >= state.time))
    throw Error(ErrorKind::configuration, "experiment.t_end precedes the initial state time");
  const StepConfig step = resolved_step(cfg, state);

  CsvWriter csv(out / "timeseries.csv", timeseries_columns(cfg));
  auto write_row = [&](const StateSnapshot& s, const EnergyBreakdown& e, double trace, double div) {
    const SobolevEnergies sob = sobolev_energies(s, cfg.sobolev_s);
    std::vector<double> row = {s.time,
                               e.kinetic,
                               e.q_l2,
                               e.q_grad,
                               e.diss_visc,
                               e.diss_q0,
                               e.diss_q1,
                               e.diss_q2,
                               e.rhs_xi_terms,
                               e.rhs_bulk_terms,
                               e.energy(),
                               run_state.ledger.residual(),
                               trace,
                               div,
                               sob.E,
                               sob.D};
    for (std::size_t i = 0; i < cfg.serrin_p.size(); ++i) {
      row.push_back(run_state.lap[i].norm());
      row.push_back(run_state.grad[i].norm());
    }
    csv.row(row);
  };

  const long offset = run_state.step;
  auto observer = [&](const StateSnapshot& s, const StepInfo& info) {
    if (resumed && info.index == 0) return;  // already recorded by the first run
    run_state.step = offset + info.index;
    const EnergyBreakdown e = energy_breakdown(s);
    run_state.ledger.add(s.time, e);
    const auto samples = serrin_samples(s, cfg.serrin_p);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      run_state.lap[i] = serrin_norm(std::move(run_state.lap[i]), samples[i].lap_q, info.dt);
      run_state.grad[i] = serrin_norm(std::move(run_state.grad[i]), samples[i].grad_u, info.dt);
    }
    const bool last = s.time == cfg.t_end;
    if (run_state.step % cfg.stride == 0 || last)
      write_row(s, e, s.Q.max_abs_trace(), relative_divergence(forward(s.u)));
    if (cfg.checkpoint_every > 0 && info.index > 0 && run_state.step % cfg.checkpoint_every == 0)
      write_checkpoint(s, out / checkpoint_name(run_state.step), run_state.to_aux());
  };
  StateSnapshot final_state = integrate(std::move(state), step, cfg.t_end, {observer});
  csv.flush();
  write_checkpoint(final_state, out / "final.besim", run_state.to_aux());
}

// ----- twin run ---------------------------------------------------------

void write_twin_csv(const fs::path& path, const TwinRunReport& rep) {
  const std::string p = p_label(rep.serrin_lap_q.spec.p);
  std::vector<Column> cols = {{"t", "sample time"},
                              {"q_functional", "||w||^2 + ||G||^2 + L ||grad G||^2 with G = R - Q, w = v - u"}};
  const bool with_a = !rep.gronwall_integrand.empty();
  if (with_a) cols.push_back({"gronwall_A", "Gronwall integrand A(t), unit constants"});
  cols.push_back({"serrin_lapQ_" + p, "running Serrin norm of Lap Q, run A"});
  cols.push_back({"serrin_gradu_" + p, "running Serrin norm of grad u, run A"});
  CsvWriter csv(path, cols);
  SerrinAccumulator lap, grad;
  lap.spec = grad.spec = rep.serrin_lap_q.spec;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    const double dt = i == 0 ? 0.0 : rep.times[i] - rep.times[i - 1];
    lap = serrin_norm(std::move(lap), rep.serrin_lap_q.samples[i].second, dt);
    grad = serrin_norm(std::move(grad), rep.serrin_grad_u.samples[i].second, dt);
    std::vector<double> row = {rep.times[i], rep.q_functional[i]};
    if (with_a) row.push_back(rep.gronwall_integrand[i]);
    row.push_back(lap.norm());
    row.push_back(grad.norm());
    csv.row(row);
  }
}

StateSnapshot perturbed(const StateSnapshot& base, double delta, std::uint64_t seed, int kmax) {
  const GridPtr& g = base.grid();
  const QTensorField dq = random_traceless_q(g, 1.0, 1.0, seed, kmax);
  const VelocityField du = random_solenoidal_velocity(g, 1.0, 1.0, seed + 1, kmax);
  StateSnapshot s = base;
  for (int c = 0; c < 6; ++c)
    for (std::size_t p = 0; p < g->points(); ++p) s.Q.comps[c][p] += delta * dq.comps[c][p];
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < g->points(); ++p) s.u.comps[c][p] += delta * du.comps[c][p];
  return project_constraints(std::move(s));
}

void run_twin(const RunConfig& cfg, const fs::path& out, const RunOptions& opt, const GridPtr& grid) {
  const StateSnapshot ic = initial_state(cfg, grid);
  const StepConfig a = resolved_step(cfg, ic);
  StepConfig b = a;
  b.scheme = cfg.twin_scheme_b;
  if (cfg.twin_dt_b) b.dt = *cfg.twin_dt_b;
  double p = cfg.serrin_p.front();
  for (double x : cfg.serrin_p)
    if (x > 2.0 && x < 6.0) {
      p = x;
      break;
    }
  const int kmax = std::min({cfg.ic.kmax, grid->cutoff(0), grid->cutoff(1), grid->cutoff(2)});
  if (cfg.twin_perturbation > 0.0) {
    const StateSnapshot ib = perturbed(ic, cfg.twin_perturbation, cfg.seed + 101, kmax);
    const StateSnapshot ih = perturbed(ic, 0.5 * cfg.twin_perturbation, cfg.seed + 101, kmax);
    write_twin_csv(out / "twin.csv", twin_run(ic, ib, a, b, cfg.t_end, p, opt.workers));
    write_twin_csv(out / "twin_half.csv", twin_run(ic, ih, a, b, cfg.t_end, p, opt.workers));
  } else {
    write_twin_csv(out / "twin.csv", twin_run(ic, ic, a, b, cfg.t_end, p, opt.workers));
  }
}

// ----- decay sweep ------------------------------------------------------

void run_decay(const RunConfig& cfg, const fs::path& out, const GridPtr& grid) {
  const StateSnapshot base = initial_state(cfg, grid);
  StepConfig step = cfg.step;
  if (cfg.dt_from_cfl) {
    // Amplitudes are small; size dt on the diffusive limit alone.
    StateSnapshot still = base;
    still.u = VelocityField::zeros(grid);
    step.dt = estimate_dt(cfg, still);
  }
  const DecaySweep sweep = small_data_decay(base, cfg.decay_amplitudes, cfg.params, cfg.sobolev_s, cfg.t_end, step);
  CsvWriter csv(out / "decay.csv", {{"amplitude", "initial amplitude alpha, E(0) = alpha^2"},
                                    {"t", "sample time"},
                                    {"sobolev_E", "H^s energy E(t)"},
                                    {"sobolev_D", "H^s dissipation D(t)"},
                                    {"failed", "1 if this amplitude's run stopped with an error"}});
  for (const DecayReport& r : sweep.reports)
    for (std::size_t i = 0; i < r.times.size(); ++i)
      csv.row({r.amplitude, r.times[i], r.E[i], r.D[i], r.failed ? 1.0 : 0.0});
}

// ----- equality study ---------------------------------------------------

void run_study(const RunConfig& cfg, const fs::path& out, const GridPtr& grid) {
  std::vector<std::array<int, 3>> dims = cfg.study_dims;
  if (dims.empty()) dims.push_back(cfg.dims);
  std::vector<double> dts = cfg.study_dts;
  if (dts.empty()) dts.push_back(resolved_step(cfg, initial_state(cfg, grid)).dt);
  RunConfig local = cfg;
  const auto rows = equality_convergence_study(
      [&](const GridPtr& g) { return initial_state(local, g); }, cfg.step, dts, dims, cfg.t_end, cfg.box);
  CsvWriter csv(out / "equality_study.csv", {{"dt", "time step"},
                                             {"n1", "grid size, axis 1"},
                                             {"n2", "grid size, axis 2"},
                                             {"n3", "grid size, axis 3"},
                                             {"residual", "energy-equality residual r(T)"},
                                             {"order", "observed order vs the previous dt on this grid"},
                                             {"grid_change", "relative change vs the previous grid at this dt"}});
  for (const auto& r : rows)
    csv.row({r.dt, double(r.dims[0]), double(r.dims[1]), double(r.dims[2]), r.residual, r.order, r.grid_change});
}

// ----- summary ----------------------------------------------------------

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TwinRunReport report_from_csv(const detail::CsvTable& t) {
  TwinRunReport r;
  r.times = t.column("t");
  r.q_functional = t.column("q_functional");
  if (t.has("gronwall_A")) r.gronwall_integrand = t.column("gronwall_A");
  return r;
}

json summarize_twin(const fs::path& dir) {
  const auto t = detail::read_csv(dir / "twin.csv");
  const auto q = t.column("q_functional");
  json j;
  j["samples"] = q.size();
  j["q_functional_initial"] = q.empty() ? 0.0 : q.front();
  j["q_functional_final"] = q.empty() ? 0.0 : q.back();
  j["q_functional_max"] = max_abs(q);
  const bool identical = !q.empty() && q.front() == 0.0;
  j["identical_initial_data"] = identical;
  if (identical) j["pass_identical_twins"] = max_abs(q) <= 1e-14;
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c].rfind("serrin_", 0) == 0 && !t.rows.empty()) j["final"][t.header[c]] = t.rows.back()[c];
  if (!identical && fs::exists(dir / "twin_half.csv")) {
    const GronwallCheck g =
        gronwall_envelope_check(report_from_csv(t), report_from_csv(detail::read_csv(dir / "twin_half.csv")));
    j["gronwall_degenerate"] = g.degenerate;
    if (!g.degenerate) {
      j["gronwall_C"] = g.fit.C;
      j["gronwall_C_half"] = g.fit_half.C;
      j["gronwall_relative_change"] = g.relative_change;
      j["pass_gronwall_stable"] = g.stable;
    }
  }
  return j;
}

json summarize_single(const fs::path& dir) {
  const auto t = detail::read_csv(dir / "timeseries.csv");
  json j;
  j["samples"] = t.rows.size();
  if (t.rows.empty()) return j;
  for (std::size_t c = 0; c < t.header.size(); ++c) j["final"][t.header[c]] = t.rows.back()[c];
  const double tr = max_abs(t.column("trace_max"));
  const double dv = max_abs(t.column("divergence_rel"));
  j["max_trace"] = tr;
  j["max_divergence_rel"] = dv;
  j["max_abs_energy_residual"] = max_abs(t.column("energy_residual"));
  j["pass_constraints"] = tr <= 1e-12 && dv <= 1e-12;
  return j;
}

json summarize_decay(const fs::path& dir) {
  const auto t = detail::read_csv(dir / "decay.csv");
  const auto amp = t.column("amplitude");
  const auto E = t.column("sobolev_E");
  const auto failed = t.column("failed");
  json runs = json::array();
  std::optional<double> clean;
  std::size_t i = 0;
  while (i < amp.size()) {
    std::size_t j = i;
    int violations = 0;
    while (j + 1 < amp.size() && amp[j + 1] == amp[i]) {
      if (E[j + 1] - E[j] > 1e-10 * E[j]) ++violations;
      ++j;
    }
    const bool fail = failed[i] != 0.0;
    runs.push_back({{"amplitude", amp[i]},
                    {"E_initial", E[i]},
                    {"E_final", E[j]},
                    {"samples", j - i + 1},
                    {"monotone_violations", violations},
                    {"failed", fail}});
    if (!fail && violations == 0 && (!clean || amp[i] > *clean)) clean = amp[i];
    i = j + 1;
  }
  json out;
  out["runs"] = runs;
  out["largest_clean_amplitude"] = clean ? json(*clean) : json(nullptr);
  return out;
}

json summarize_study(const fs::path& dir) {
  const auto t = detail::read_csv(dir / "equality_study.csv");
  json rows = json::array();
  double min_order = std::numeric_limits<double>::infinity();
  double max_change = 0.0;
  for (const auto& r : t.rows) {
    rows.push_back({{"dt", r[t.col("dt")]},
                    {"dims", {int(r[t.col("n1")]), int(r[t.col("n2")]), int(r[t.col("n3")])}},
                    {"residual", r[t.col("residual")]},
                    {"order", r[t.col("order")]},
                    {"grid_change", r[t.col("grid_change")]}});
    if (r[t.col("order")] != 0.0) min_order = std::min(min_order, r[t.col("order")]);
    max_change = std::max(max_change, r[t.col("grid_change")]);
  }
  json j;
  j["rows"] = rows;
  j["min_dt_order"] = std::isfinite(min_order) ? json(min_order) : json(nullptr);
  j["max_grid_change"] = max_change;
  return j;
}

}  // namespace

std::string summarize(const fs::path& out_dir) {
  if (!fs::is_directory(out_dir)) throw Error(ErrorKind::io, "not an output directory: " + out_dir.string());
  json j;
  bool any = false;
  if (fs::exists(out_dir / "timeseries.csv")) {
    j["timeseries"] = summarize_single(out_dir);
    any = true;
  }
  if (fs::exists(out_dir / "twin.csv")) {
    j["twin"] = summarize_twin(out_dir);
    any = true;
  }
  if (fs::exists(out_dir / "decay.csv")) {
    j["decay"] = summarize_decay(out_dir);
    any = true;
  }
  if (fs::exists(out_dir / "equality_study.csv")) {
    j["equality_study"] = summarize_study(out_dir);
    any = true;
  }
  if (!any) throw Error(ErrorKind::input, "no besim CSV output found in " + out_dir.string());
  const std::string text = j.dump(2) + "\n";
  write_text(out_dir / "summary.json", text);
  return text;
}

fs::path run(const RunConfig& cfg_in, const RunOptions& opt) {
  RunConfig cfg = cfg_in;
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  if (opt.seed) cfg.seed = *opt.seed;
  validate(cfg);
  if (opt.resume && cfg.experiment != ExperimentKind::single)
    throw Error(ErrorKind::configuration, "--resume is only supported for single runs");
  const fs::path out = cfg.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + out.string() + ": " + ec.message());
  const GridPtr grid = make_grid(cfg.dims, cfg.box);
  switch (cfg.experiment) {
    case ExperimentKind::single: run_single(cfg, out, opt, grid); break;
    case ExperimentKind::twin: run_twin(cfg, out, opt, grid); break;
    case ExperimentKind::decay_sweep: run_decay(cfg, out, grid); break;
    case ExperimentKind::equality_study: run_study(cfg, out, grid); break;
  }
  summarize(out);
  return out;
}

std::string error_json(const std::exception& e) {
  json j;
  json err;
  if (const auto* be = dynamic_cast<const Error*>(&e)) {
    err["kind"] = std::string(to_string(be->kind()));
  } else {
    err["kind"] = "internal";
  }
  err["message"] = e.what();
  if (const auto* sr = dynamic_cast<const StepRejected*>(&e)) err["suggested_dt"] = sr->suggested_dt();
  if (const auto* di = dynamic_cast<const DivergedIteration*>(&e)) err["picard_residuals"] = di->trace().residuals;
  j["error"] = err;
  return j.dump();
}

}  // namespace besim
