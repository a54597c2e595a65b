#include "nsslip/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace nsslip {

namespace {

void write_json(std::ostringstream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' '), end(static_cast<size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        os << pad << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      os << end << "}";
      return;
    }
    case json::value_t::array: {
      bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      if (j.empty()) {
        os << "[]";
        return;
      }
      if (flat) {
        os << "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json(os, j[i], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        os << pad;
        write_json(os, j[i], indent, depth + 1);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      os << end << "]";
      return;
    }
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      std::string s = fmt17(v);
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

// Reads one JSON object, rejecting keys that are not consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
  }

  bool has(const std::string& k) {
    used_.insert(k);
    return j_.contains(k);
  }
  const json& raw(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }
  std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  void get(const std::string& k, double& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_number()) throw ConfigError(where(k) + " must be a number");
    v = x.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where(k) + " must be finite");
  }
  void get(const std::string& k, int& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_number_integer()) throw ConfigError(where(k) + " must be an integer");
    v = x.get<int>();
  }
  void get(const std::string& k, std::uint64_t& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<std::int64_t>() >= 0))
      throw ConfigError(where(k) + " must be a nonnegative integer");
    v = x.get<std::uint64_t>();
  }
  void get(const std::string& k, bool& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_boolean()) throw ConfigError(where(k) + " must be a boolean");
    v = x.get<bool>();
  }
  void get(const std::string& k, std::string& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_string()) throw ConfigError(where(k) + " must be a string");
    v = x.get<std::string>();
  }
  void get(const std::string& k, std::vector<double>& v) {
    if (!has(k)) return;
    const json& x = j_.at(k);
    if (!x.is_array()) throw ConfigError(where(k) + " must be an array of numbers");
    v.clear();
    for (const auto& e : x) {
      if (!e.is_number()) throw ConfigError(where(k) + " must be an array of numbers");
      v.push_back(e.get<double>());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

ControlShape read_shape(Section& parent, const std::string& key, ControlShape s) {
  if (!parent.has(key)) return s;
  Section c(parent.raw(key), parent.where(key));
  c.get("kind", s.kind);
  c.get("a_amplitude", s.a_amplitude);
  c.get("b_amplitude", s.b_amplitude);
  c.get("a_mode", s.a_mode);
  c.get("b_mode", s.b_mode);
  c.get("growth", s.growth);
  c.get("path", s.path);
  require(s.kind == "zero" || s.kind == "shape" || s.kind == "file",
          c.where("kind") + " must be one of zero, shape, file");
  require(s.kind != "file" || !s.path.empty(), c.where("path") + " is required for kind 'file'");
  return s;
}

json shape_json(const ControlShape& s) {
  return json{{"kind", s.kind},       {"a_amplitude", s.a_amplitude}, {"b_amplitude", s.b_amplitude},
              {"a_mode", s.a_mode},   {"b_mode", s.b_mode},           {"growth", s.growth},
              {"path", s.path}};
}

std::string file_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string dump17(const json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  os << "\n";
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  ModelSpec& m = cfg.model;
  {
    Section top(root, "");
    if (top.has("domain")) {
      Section s(top.raw("domain"), "domain");
      s.get("nx", m.domain.nx);
      s.get("ny", m.domain.ny);
      s.get("lx", m.domain.lx);
      s.get("ly", m.domain.ly);
    }
    if (top.has("physics")) {
      Section s(top.raw("physics"), "physics");
      s.get("nu", m.nu);
      s.get("alpha", m.alpha);
      s.get("horizon", m.horizon);
      s.get("steps", m.steps);
      s.get("convection", m.convection);
      s.get("ceiling", m.ceiling);
    }
    if (top.has("basis")) {
      Section s(top.raw("basis"), "basis");
      s.get("n", m.n);
    }
    if (top.has("initial_state")) {
      Section s(top.raw("initial_state"), "initial_state");
      s.get("coefficients", cfg.initial_state);
    }
    if (top.has("noise")) {
      Section s(top.raw("noise"), "noise");
      std::string family = to_string(m.noise.family);
      s.get("family", family);
      m.noise.family = noise_family_from_string(family);
      s.get("channels", m.noise.channels);
      s.get("bound_l", m.noise.bound_l);
      s.get("fill", m.noise.fill);
      s.get("multiplicative_share", m.noise.multiplicative_share);
      s.get("seed", m.noise.seed);
    }
    if (top.has("control")) {
      Section s(top.raw("control"), "control");
      s.get("lambda_a", cfg.cost.lambda_a);
      s.get("lambda_b", cfg.cost.lambda_b);
      s.get("b_inf", cfg.set.b_inf);
      s.get("b_h", cfg.set.b_h);
      cfg.initial_controls = read_shape(s, "initial", cfg.initial_controls);
    }
    if (top.has("target")) {
      Section s(top.raw("target"), "target");
      TargetSpec& t = cfg.target;
      s.get("kind", t.kind);
      t.control = read_shape(s, "control", t.control);
      s.get("path", t.path);
      s.get("amplitude", t.amplitude);
      s.get("wavenumber", t.wavenumber);
      s.get("growth", t.growth);
    }
    if (top.has("monte_carlo")) {
      Section s(top.raw("monte_carlo"), "monte_carlo");
      s.get("samples", cfg.samples);
      s.get("seed", cfg.seed);
    }
    if (top.has("adjoint")) {
      Section s(top.raw("adjoint"), "adjoint");
      std::string solver = to_string(cfg.solver), features = to_string(cfg.regression.features);
      s.get("solver", solver);
      s.get("features", features);
      cfg.solver = adjoint_solver_from_string(solver);
      cfg.regression.features = feature_map_from_string(features);
      s.get("ridge", cfg.regression.ridge);
      s.get("quadratic_cap", cfg.regression.quadratic_cap);
    }
    if (top.has("optimizer")) {
      Section s(top.raw("optimizer"), "optimizer");
      s.get("max_iters", cfg.optimizer.max_iters);
      s.get("tol_g", cfg.optimizer.tol_g);
      s.get("armijo_c1", cfg.optimizer.armijo_c1);
      s.get("max_backtracks", cfg.optimizer.max_backtracks);
      s.get("initial_step", cfg.optimizer.initial_step);
    }
    if (top.has("verify")) {
      Section s(top.raw("verify"), "verify");
      VerifySpec& v = cfg.verify;
      s.get("gateaux_samples", v.gateaux_samples);
      s.get("gateaux_eps", v.gateaux_eps);
      s.get("direction_scale", v.direction_scale);
      s.get("duality_samples", v.duality_samples);
      s.get("fd_directions", v.fd_directions);
      s.get("fd_step", v.fd_step);
      s.get("noise_samples", v.noise_samples);
      s.get("lifting_trials", v.lifting_trials);
      s.get("fault", v.fault);
    }
    if (top.has("output")) {
      Section s(top.raw("output"), "output");
      s.get("dir", cfg.output_dir);
    }
    top.get("threads", cfg.threads);
  }

  require(m.domain.nx >= 8 && m.domain.ny >= 8, "domain.nx and domain.ny must be >= 8");
  require(m.domain.lx > 0 && m.domain.ly > 0, "domain.lx and domain.ly must be > 0");
  require(m.nu > 0, "physics.nu must be > 0");
  require(m.alpha >= 0, "physics.alpha must be >= 0");
  require(m.horizon > 0, "physics.horizon must be > 0");
  require(m.steps >= 16, "physics.steps must be >= 16");
  require(m.ceiling > 0, "physics.ceiling must be > 0");
  require(m.n >= 1, "basis.n must be >= 1");
  require(static_cast<int>(cfg.initial_state.size()) <= m.n, "initial_state.coefficients has more entries than basis.n");
  if (m.noise.family != NoiseFamily::Zero) {
    require(m.noise.channels >= 1, "noise.channels must be >= 1 for a nonzero family");
    require(m.noise.bound_l > 0, "noise.bound_l must be > 0 for a nonzero family");
  }
  require(m.noise.fill > 0 && m.noise.fill <= 1, "noise.fill must lie in (0, 1]");
  require(m.noise.multiplicative_share >= 0 && m.noise.multiplicative_share <= 1,
          "noise.multiplicative_share must lie in [0, 1]");
  require(cfg.cost.lambda_a > 0 && cfg.cost.lambda_b > 0, "control.lambda_a and control.lambda_b must be > 0");
  require(cfg.set.b_inf > 0, "control.b_inf must be > 0");
  require(cfg.set.b_h >= 0, "control.b_h must be >= 0");
  const std::string& tk = cfg.target.kind;
  require(tk == "zero" || tk == "uncontrolled" || tk == "known_control" || tk == "recorded" || tk == "vortex",
          "target.kind must be one of zero, uncontrolled, known_control, recorded, vortex");
  require(tk != "recorded" || !cfg.target.path.empty(), "target.path is required for kind 'recorded'");
  if (tk == "recorded" && !std::ifstream(cfg.target.path))
    throw ConfigError("target.path '" + cfg.target.path + "' does not exist");
  if (cfg.initial_controls.kind == "file" && !std::ifstream(cfg.initial_controls.path))
    throw ConfigError("control.initial.path '" + cfg.initial_controls.path + "' does not exist");
  require(cfg.samples >= 1, "monte_carlo.samples must be >= 1");
  require(cfg.regression.ridge >= 0, "adjoint.ridge must be >= 0");
  require(cfg.regression.quadratic_cap >= 0, "adjoint.quadratic_cap must be >= 0");
  require(cfg.optimizer.max_iters >= 0, "optimizer.max_iters must be >= 0");
  require(cfg.optimizer.tol_g >= 0, "optimizer.tol_g must be >= 0");
  require(cfg.optimizer.armijo_c1 > 0 && cfg.optimizer.armijo_c1 < 1, "optimizer.armijo_c1 must lie in (0, 1)");
  require(cfg.optimizer.max_backtracks >= 0, "optimizer.max_backtracks must be >= 0");
  require(cfg.optimizer.initial_step > 0, "optimizer.initial_step must be > 0");
  require(cfg.verify.gateaux_eps.size() >= 2, "verify.gateaux_eps needs at least two entries");
  for (size_t i = 1; i < cfg.verify.gateaux_eps.size(); ++i)
    require(cfg.verify.gateaux_eps[i] < cfg.verify.gateaux_eps[i - 1] && cfg.verify.gateaux_eps[i] > 0,
            "verify.gateaux_eps must be positive and strictly decreasing");
  require(cfg.verify.fault == "none" || cfg.verify.fault == "adjoint_sign", "verify.fault must be none or adjoint_sign");
  require(cfg.verify.gateaux_samples >= 1 && cfg.verify.duality_samples >= 1, "verify sample counts must be >= 1");
  require(cfg.verify.noise_samples >= 100, "verify.noise_samples must be >= 100");
  require(cfg.threads >= 1, "threads must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(file_text(path)); }

std::string serialize_config(const ExperimentConfig& c) {
  const ModelSpec& m = c.model;
  json j;
  j["domain"] = {{"nx", m.domain.nx}, {"ny", m.domain.ny}, {"lx", m.domain.lx}, {"ly", m.domain.ly}};
  j["physics"] = {{"nu", m.nu},           {"alpha", m.alpha},           {"horizon", m.horizon},
                  {"steps", m.steps},     {"convection", m.convection}, {"ceiling", m.ceiling}};
  j["basis"] = {{"n", m.n}};
  j["initial_state"] = {{"coefficients", c.initial_state}};
  j["noise"] = {{"family", to_string(m.noise.family)}, {"channels", m.noise.channels},
                {"bound_l", m.noise.bound_l},           {"fill", m.noise.fill},
                {"multiplicative_share", m.noise.multiplicative_share}, {"seed", m.noise.seed}};
  j["control"] = {{"lambda_a", c.cost.lambda_a}, {"lambda_b", c.cost.lambda_b}, {"b_inf", c.set.b_inf},
                  {"b_h", c.set.b_h},           {"initial", shape_json(c.initial_controls)}};
  j["target"] = {{"kind", c.target.kind},           {"control", shape_json(c.target.control)},
                 {"path", c.target.path},           {"amplitude", c.target.amplitude},
                 {"wavenumber", c.target.wavenumber}, {"growth", c.target.growth}};
  j["monte_carlo"] = {{"samples", c.samples}, {"seed", c.seed}};
  j["adjoint"] = {{"solver", to_string(c.solver)},
                  {"features", to_string(c.regression.features)},
                  {"ridge", c.regression.ridge},
                  {"quadratic_cap", c.regression.quadratic_cap}};
  j["optimizer"] = {{"max_iters", c.optimizer.max_iters},   {"tol_g", c.optimizer.tol_g},
                    {"armijo_c1", c.optimizer.armijo_c1},   {"max_backtracks", c.optimizer.max_backtracks},
                    {"initial_step", c.optimizer.initial_step}};
  const VerifySpec& v = c.verify;
  j["verify"] = {{"gateaux_samples", v.gateaux_samples}, {"gateaux_eps", v.gateaux_eps},
                 {"direction_scale", v.direction_scale}, {"duality_samples", v.duality_samples},
                 {"fd_directions", v.fd_directions},     {"fd_step", v.fd_step},
                 {"noise_samples", v.noise_samples},     {"lifting_trials", v.lifting_trials},
                 {"fault", v.fault}};
  j["output"] = {{"dir", c.output_dir}};
  j["threads"] = c.threads;
  return dump17(j);
}

Vec initial_state(const ExperimentConfig& cfg) {
  Vec y = Vec::Zero(cfg.model.n);
  for (size_t i = 0; i < cfg.initial_state.size(); ++i) y[static_cast<Eigen::Index>(i)] = cfg.initial_state[i];
  return y;
}

ControlPair make_controls(const ControlShape& s, const Model& model) {
  const int p = model.nodes(), nt = model.time.steps + 1;
  if (s.kind == "file") return load_controls(s.path, model);
  ControlPair c = ControlPair::zeros(p, nt);
  if (s.kind == "zero") return c;
  const auto& mesh = model.ops->mesh;
  for (int k = 0; k < nt; ++k) {
    double f = 1.0 + s.growth * model.time.time(k);
    for (int q = 0; q < p; ++q) {
      double arg = 2.0 * M_PI * mesh.arclength[q] / mesh.perimeter;
      c.a(q, k) = s.a_amplitude * std::cos(s.a_mode * arg) * f;
      c.b(q, k) = s.b_amplitude * std::sin(s.b_mode * arg) * f;
    }
  }
  return c;
}

ControlPair load_controls(const std::string& path, const Model& model) {
  json j;
  try {
    j = json::parse(file_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("controls file '" + path + "' is not valid JSON: " + e.what());
  }
  const int p = model.nodes(), nt = model.time.steps + 1;
  if (!j.contains("a") || !j.contains("b")) throw ConfigError("controls file '" + path + "' lacks a or b");
  ControlPair c = ControlPair::zeros(p, nt);
  auto fill = [&](const json& arr, Mat& m, const char* name) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != nt)
      throw ConfigError(std::string("controls file: ") + name + " must have one row per time node");
    for (int k = 0; k < nt; ++k) {
      if (!arr[k].is_array() || static_cast<int>(arr[k].size()) != p)
        throw ConfigError(std::string("controls file: ") + name + " rows must have one entry per boundary node");
      for (int q = 0; q < p; ++q) m(q, k) = arr[k][q].get<double>();
    }
  };
  fill(j["a"], c.a, "a");
  fill(j["b"], c.b, "b");
  return c;
}

std::string controls_json(const ControlPair& c, const std::string& status, double cost) {
  json j;
  j["nodes"] = c.nodes();
  j["time_nodes"] = c.time_nodes();
  j["status"] = status;
  j["cost"] = cost;
  auto rows = [](const Mat& m) {
    json out = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      std::vector<double> r(m.rows());
      for (Eigen::Index q = 0; q < m.rows(); ++q) r[q] = m(q, k);
      out.push_back(r);
    }
    return out;
  };
  j["a"] = rows(c.a);
  j["b"] = rows(c.b);
  return dump17(j);
}

Mat vortex_field(const Model& model, const TargetSpec& t) {
  const DiscreteOperators& ops = *model.ops;
  const Grid& g = ops.grid;
  const int nt = model.time.steps + 1;
  const double k = t.wavenumber * M_PI;
  auto vel = [&](double x, double y) {
    return Point{std::sin(k * x / g.lx) * std::cos(k * y / g.ly), -std::cos(k * x / g.lx) * std::sin(k * y / g.ly)};
  };
  Vec base = Vec::Zero(ops.n_full);
  for (int d = 0; d < g.num_xfaces(); ++d) base[d] = vel(g.xface_centers[d][0], g.xface_centers[d][1])[0];
  for (int d = 0; d < g.num_yfaces(); ++d)
    base[g.num_xfaces() + d] = vel(g.yface_centers[d][0], g.yface_centers[d][1])[1];
  for (int q = 0; q < ops.n_nodes; ++q) {
    if (ops.mesh.corner[q]) continue;
    Point v = vel(ops.mesh.position[q][0], ops.mesh.position[q][1]);
    base[ops.slot(q)] = v[0] * ops.mesh.tangent[q][0] + v[1] * ops.mesh.tangent[q][1];
  }
  Mat f(ops.n_full, nt);
  for (int kk = 0; kk < nt; ++kk) f.col(kk) = t.amplitude * (1.0 + t.growth * model.time.time(kk)) * base;
  return f;
}

Target make_target(const ExperimentConfig& cfg, const Model& model) {
  const TargetSpec& t = cfg.target;
  if (t.kind == "zero") return zero_target(model);
  if (t.kind == "vortex") return field_target(model, vortex_field(model, t));
  ControlPair u = ControlPair::zeros(model.nodes(), model.time.steps + 1);
  if (t.kind == "known_control") u = make_controls(t.control, model);
  if (t.kind == "recorded") u = load_controls(t.path, model);
  u = project_admissible(u, cfg.set, model.ops->mesh);
  Ensemble e = forward_ensemble(model, initial_state(cfg), lift_controls(model, u), cfg.seed, cfg.samples, cfg.threads);
  return ensemble_target(model, e);
}

Problem make_problem(const ExperimentConfig& cfg, std::shared_ptr<const Model> model) {
  Problem pb;
  pb.model = model;
  pb.y0 = initial_state(cfg);
  pb.target = make_target(cfg, *model);
  pb.cost = cfg.cost;
  pb.set = cfg.set;
  pb.samples = cfg.samples;
  pb.seed = cfg.seed;
  pb.solver = cfg.solver;
  pb.regression = cfg.regression;
  pb.threads = cfg.threads;
  return pb;
}

}  // namespace nsslip
