#include "besim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "besim/diagnostics.hpp"

namespace besim {

namespace pt = boost::property_tree;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::single: return "single";
    case ExperimentKind::twin: return "twin";
    case ExperimentKind::decay_sweep: return "decay-sweep";
    case ExperimentKind::equality_study: return "equality-study";
  }
  return "unknown";
}

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::random: return "random";
    case InitialKind::uniaxial: return "uniaxial";
    case InitialKind::checkpoint: return "checkpoint";
  }
  return "unknown";
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"dims", "box"}},
      {"params", {"a", "b", "c", "L", "Gamma", "mu", "xi"}},
      {"step", {"dt", "scheme", "picard_tol", "picard_max_iter", "cfl_limit"}},
      {"diagnostics", {"stride", "serrin_p", "sobolev_s"}},
      {"experiment",
       {"type", "t_end", "ic", "ic_u_amplitude", "ic_q_amplitude", "ic_spectrum", "ic_kmax", "ic_order",
        "ic_twist", "ic_path", "twin_scheme_b", "twin_dt_b", "twin_perturbation", "decay_amplitudes",
        "study_dts", "study_dims"}},
      {"io", {"out_dir", "seed", "checkpoint_every"}},
  };
  return keys;
}

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = {"grid.dims", "params.a", "params.b", "params.c",
                                                "params.L", "params.Gamma", "params.mu", "params.xi",
                                                "experiment.t_end"};
  return keys;
}

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::configuration, msg); }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double v;
  std::string rest;
  if (!(in >> v) || (in >> rest)) fail(key + ": expected a number, got '" + text + "'");
  return v;
}

long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e15) fail(key + ": expected an integer, got '" + text + "'");
  return static_cast<long>(v);
}

std::vector<std::string> split(const std::string& text, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ", \t")) out.push_back(to_double(key, item));
  if (out.empty()) fail(key + ": expected a list of numbers");
  return out;
}

// "32" means 32^3; otherwise exactly three entries.
std::array<int, 3> to_dims(const std::string& key, const std::string& text) {
  std::vector<int> v;
  for (const auto& item : split(text, ", \txX")) v.push_back(static_cast<int>(to_integer(key, item)));
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) fail(key + ": expected one or three grid sizes, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::vector<std::string> unknown;
  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (body.empty()) {
      // Either an empty section or a key written before any section header.
      if (!body.data().empty())
        unknown.push_back(section + " (outside any section)");
      else if (it == known_keys().end())
        unknown.push_back("[" + section + "]");
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (it == known_keys().end() || !it->second.count(key))
        unknown.push_back(full);
      else
        values[full] = value.get_value<std::string>();
    }
  }
  if (!unknown.empty()) fail("unknown config keys: " + join(unknown));
  std::vector<std::string> missing;
  for (const auto& k : required_keys())
    if (!values.count(k)) missing.push_back(k);
  if (!missing.empty()) fail("missing required config keys: " + join(missing));

  auto has = [&](const std::string& k) { return values.count(k) > 0; };
  auto num = [&](const std::string& k) { return to_double(k, values.at(k)); };
  auto integer = [&](const std::string& k) { return to_integer(k, values.at(k)); };

  RunConfig cfg;
  cfg.dims = to_dims("grid.dims", values.at("grid.dims"));
  if (has("grid.box")) {
    const auto b = to_list("grid.box", values.at("grid.box"));
    if (b.size() == 1)
      cfg.box = {b[0], b[0], b[0]};
    else if (b.size() == 3)
      cfg.box = {b[0], b[1], b[2]};
    else
      fail("grid.box: expected one or three lengths");
  }

  cfg.params.a = num("params.a");
  cfg.params.b = num("params.b");
  cfg.params.c = num("params.c");
  cfg.params.L = num("params.L");
  cfg.params.Gamma = num("params.Gamma");
  cfg.params.mu = num("params.mu");
  cfg.params.xi = num("params.xi");

  if (has("step.dt")) {
    cfg.step.dt = num("step.dt");
  } else {
    cfg.dt_from_cfl = true;
  }
  if (has("step.scheme")) cfg.step.scheme = parse_scheme(values.at("step.scheme"));
  if (has("step.picard_tol")) cfg.step.picard_tol = num("step.picard_tol");
  if (has("step.picard_max_iter")) cfg.step.picard_max_iter = static_cast<int>(integer("step.picard_max_iter"));
  if (has("step.cfl_limit")) cfg.step.cfl_limit = num("step.cfl_limit");

  if (has("diagnostics.stride")) cfg.stride = static_cast<int>(integer("diagnostics.stride"));
  if (has("diagnostics.serrin_p")) cfg.serrin_p = to_list("diagnostics.serrin_p", values.at("diagnostics.serrin_p"));
  if (has("diagnostics.sobolev_s")) cfg.sobolev_s = num("diagnostics.sobolev_s");

  cfg.t_end = num("experiment.t_end");
  if (has("experiment.type")) {
    const std::string& t = values.at("experiment.type");
    if (t == "single") cfg.experiment = ExperimentKind::single;
    else if (t == "twin") cfg.experiment = ExperimentKind::twin;
    else if (t == "decay-sweep") cfg.experiment = ExperimentKind::decay_sweep;
    else if (t == "equality-study") cfg.experiment = ExperimentKind::equality_study;
    else fail("experiment.type: unknown experiment '" + t + "' (single, twin, decay-sweep, equality-study)");
  }
  if (has("experiment.ic")) {
    const std::string& t = values.at("experiment.ic");
    if (t == "random") cfg.ic.kind = InitialKind::random;
    else if (t == "uniaxial") cfg.ic.kind = InitialKind::uniaxial;
    else if (t == "checkpoint") cfg.ic.kind = InitialKind::checkpoint;
    else fail("experiment.ic: unknown initial condition '" + t + "' (random, uniaxial, checkpoint)");
  }
  if (has("experiment.ic_u_amplitude")) cfg.ic.u_amplitude = num("experiment.ic_u_amplitude");
  if (has("experiment.ic_q_amplitude")) cfg.ic.q_amplitude = num("experiment.ic_q_amplitude");
  if (has("experiment.ic_spectrum")) cfg.ic.spectrum = num("experiment.ic_spectrum");
  if (has("experiment.ic_kmax")) cfg.ic.kmax = static_cast<int>(integer("experiment.ic_kmax"));
  if (has("experiment.ic_order")) cfg.ic.order = num("experiment.ic_order");
  if (has("experiment.ic_twist")) cfg.ic.twist = num("experiment.ic_twist");
  if (has("experiment.ic_path")) cfg.ic.path = values.at("experiment.ic_path");
  if (has("experiment.twin_scheme_b")) cfg.twin_scheme_b = parse_scheme(values.at("experiment.twin_scheme_b"));
  if (has("experiment.twin_dt_b")) cfg.twin_dt_b = num("experiment.twin_dt_b");
  if (has("experiment.twin_perturbation")) cfg.twin_perturbation = num("experiment.twin_perturbation");
  if (has("experiment.decay_amplitudes"))
    cfg.decay_amplitudes = to_list("experiment.decay_amplitudes", values.at("experiment.decay_amplitudes"));
  if (has("experiment.study_dts")) cfg.study_dts = to_list("experiment.study_dts", values.at("experiment.study_dts"));
  if (has("experiment.study_dims"))
    for (const auto& item : split(values.at("experiment.study_dims"), ";"))
      cfg.study_dims.push_back(to_dims("experiment.study_dims", item));

  if (has("io.out_dir")) cfg.out_dir = values.at("io.out_dir");
  if (has("io.seed")) {
    const long s = integer("io.seed");
    if (s < 0) fail("io.seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (has("io.checkpoint_every")) cfg.checkpoint_every = static_cast<int>(integer("io.checkpoint_every"));

  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  make_grid(cfg.dims, cfg.box);
  cfg.params.validated();
  if (!cfg.dt_from_cfl) cfg.step.validated();
  else {
    StepConfig probe = cfg.step;
    probe.dt = 1.0;
    probe.validated();
  }
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) fail("experiment.t_end must be finite and >= 0");
  if (cfg.stride < 1) fail("diagnostics.stride must be at least 1");
  for (double p : cfg.serrin_p)
    if (!(p >= 2.0 && p <= 6.0)) {
      std::ostringstream msg;
      msg << "diagnostics.serrin_p: p = " << p
          << " outside [2,6]; the Serrin-type uniqueness criterion only covers 2 <= p <= 6";
      fail(msg.str());
    }
  if (cfg.serrin_p.empty()) fail("diagnostics.serrin_p must list at least one exponent");
  if (!(cfg.sobolev_s >= 0.0)) fail("diagnostics.sobolev_s must be >= 0");
  if (!(cfg.ic.u_amplitude >= 0.0) || !(cfg.ic.q_amplitude >= 0.0))
    fail("experiment.ic_*_amplitude must be >= 0");
  if (cfg.ic.kmax < 1) fail("experiment.ic_kmax must be at least 1");
  if (cfg.ic.kind == InitialKind::checkpoint && cfg.ic.path.empty())
    fail("experiment.ic = checkpoint needs experiment.ic_path");
  if (cfg.checkpoint_every < 0) fail("io.checkpoint_every must be >= 0");
  if (cfg.out_dir.empty()) fail("io.out_dir must not be empty");

  switch (cfg.experiment) {
    case ExperimentKind::single: break;
    case ExperimentKind::twin:
      if (cfg.twin_dt_b && !(*cfg.twin_dt_b > 0.0)) fail("experiment.twin_dt_b must be positive");
      if (!(cfg.twin_perturbation >= 0.0)) fail("experiment.twin_perturbation must be >= 0");
      break;
    case ExperimentKind::decay_sweep:
      if (!(cfg.params.a > 0.0)) {
        std::ostringstream msg;
        msg << "params.a = " << cfg.params.a
            << ": the decay-sweep experiment requires a > 0 (hypothesis of the small-data global "
               "existence theorem)";
        fail(msg.str());
      }
      for (double amp : cfg.decay_amplitudes)
        if (!(amp >= 0.0)) fail("experiment.decay_amplitudes must be >= 0");
      break;
    case ExperimentKind::equality_study: {
      const std::size_t ndt = cfg.study_dts.empty() ? 1 : cfg.study_dts.size();
      const std::size_t ngrid = cfg.study_dims.empty() ? 1 : cfg.study_dims.size();
      if (ndt < 3 && ngrid < 3)
        fail("equality-study needs experiment.study_dts or experiment.study_dims with at least 3 entries");
      for (double dt : cfg.study_dts)
        if (!(dt > 0.0)) fail("experiment.study_dts must be positive");
      for (const auto& d : cfg.study_dims) make_grid(d, cfg.box);
      break;
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

double estimate_dt(const RunConfig& cfg, const StateSnapshot& initial) {
  const GridPtr& g = initial.grid();
  const double h = g->min_spacing();
  const double umax = lp_norm(initial.u, kInfinity);
  const double diff = std::max(cfg.params.Gamma * cfg.params.L, cfg.params.mu);
  double dt = h * h / diff;
  if (umax > 0.0) dt = std::min(dt, h / umax);
  return cfg.step.cfl_limit * dt;
}

}  // namespace besim
