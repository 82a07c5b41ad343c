#include "swpass/config.hpp"

#include "swpass/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace swpass {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string kind_of(const json& j) {
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

[[noreturn]] void bad_type(const std::string& path, const std::string& want, const json& got) {
  throw ValidationError("config key '" + path + "': expected " + want + ", got " + kind_of(got));
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) bad_type(path, "number", j);
  return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) bad_type(path, "non-negative integer", j);
  return j.get<std::uint64_t>();
}

std::size_t as_size(const json& j, const std::string& path) { return static_cast<std::size_t>(as_u64(j, path)); }

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad_type(path, "string", j);
  return j.get<std::string>();
}

std::vector<double> as_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) bad_type(path, "array of numbers", j);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> as_sizes(const json& j, const std::string& path) {
  if (!j.is_array()) bad_type(path, "array of integers", j);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_size(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vec as_vec(const json& j, const std::string& path) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  const auto v = as_doubles(j, path);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat as_mat(const json& j, const std::string& path) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) bad_type(path, "non-empty array of rows", j);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(as_doubles(j[i], path + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size() || rows.back().empty()) {
      throw ValidationError("config key '" + path + "': ragged or empty matrix rows");
    }
  }
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index jj = 0; jj < m.cols(); ++jj) {
      m(i, jj) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)];
    }
  }
  return m;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

/// Object view that records which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad_type(path_.empty() ? "<root>" : path_, "object", j_);
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  const json& req(const std::string& key) {
    if (!j_.contains(key)) throw ValidationError("missing required config key '" + join(path_, key) + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  const json* opt(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  [[nodiscard]] std::string at(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ValidationError("unknown config key '" + join(path_, item.key()) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read(Section& s, const std::string& key, double& out) {
  if (const json* v = s.opt(key)) out = as_double(*v, s.at(key));
}
void read(Section& s, const std::string& key, std::size_t& out) {
  if (const json* v = s.opt(key)) out = as_size(*v, s.at(key));
}
void read(Section& s, const std::string& key, std::string& out) {
  if (const json* v = s.opt(key)) out = as_string(*v, s.at(key));
}
void read(Section& s, const std::string& key, std::optional<double>& out) {
  if (const json* v = s.opt(key)) out = as_double(*v, s.at(key));
}

Box read_box(const json& j, const std::string& path) {
  Section s(j, path);
  Box b{as_vec(s.req("lo"), s.at("lo")), as_vec(s.req("hi"), s.at("hi"))};
  s.finish();
  return b;
}

json box_json(const Box& b) { return {{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}}; }

ModelSpec read_model(const json& j) {
  Section s(j, "model");
  ModelSpec m;
  m.name = as_string(s.req("name"), "model.name");
  const json empty = json::object();
  const json* pj = s.opt("params");
  Section p(pj ? *pj : empty, "model.params");
  if (m.name == "ou") {
    read(p, "theta", m.ou.theta);
    read(p, "sigma", m.ou.sigma);
  } else if (m.name == "linear") {
    m.linear.A = as_mat(p.req("A"), "model.params.A");
    m.linear.B = as_mat(p.req("B"), "model.params.B");
    m.linear.C = as_mat(p.req("C"), "model.params.C");
    m.linear.sigma = as_mat(p.req("sigma"), "model.params.sigma");
  } else if (m.name == "cstr" || m.name == "cstr_subS") {
    read(p, "k", m.cstr.k);
    read(p, "sigma", m.cstr.sigma);
    read(p, "c_in", m.cstr.c_in);
    read(p, "x1_dag", m.cstr.x1_dag);
    read(p, "q0", m.cstr.q0);
  } else {
    throw ValidationError("config key 'model.name': unknown model '" + m.name +
                          "' (expected ou, linear, cstr or cstr_subS)");
  }
  p.finish();
  if (const json* d = s.opt("domain")) {
    if (m.name != "ou" && m.name != "linear") {
      throw ValidationError("config key 'model.domain': only ou and linear models take a domain");
    }
    m.domain = read_box(*d, "model.domain");
  }
  s.finish();
  return m;
}

json model_json(const ModelSpec& m) {
  json params = json::object();
  if (m.name == "ou") {
    params = {{"theta", m.ou.theta}, {"sigma", m.ou.sigma}};
  } else if (m.name == "linear") {
    params = {{"A", mat_json(m.linear.A)},
              {"B", mat_json(m.linear.B)},
              {"C", mat_json(m.linear.C)},
              {"sigma", mat_json(m.linear.sigma)}};
  } else {
    params = {{"k", m.cstr.k},
              {"sigma", m.cstr.sigma},
              {"c_in", m.cstr.c_in},
              {"x1_dag", m.cstr.x1_dag},
              {"q0", m.cstr.q0}};
  }
  json out = {{"name", m.name}, {"params", params}};
  if (m.domain) out["domain"] = box_json(*m.domain);
  return out;
}

StorageSpec read_storage(const json& j) {
  Section s(j, "storage");
  StorageSpec st;
  st.type = as_string(s.req("type"), "storage.type");
  if (st.type == "quadratic") {
    st.D = as_mat(s.req("D"), "storage.D");
    st.center = as_vec(s.req("center"), "storage.center");
  } else if (st.type != "cstr") {
    throw ValidationError("config key 'storage.type': expected quadratic or cstr");
  }
  s.finish();
  return st;
}

json storage_json(const StorageSpec& st) {
  json out = {{"type", st.type}};
  if (st.type == "quadratic") {
    out["D"] = mat_json(st.D);
    out["center"] = vec_json(st.center);
  }
  return out;
}

ControllerSpec read_controller(const json& j) {
  Section s(j, "controller");
  ControllerSpec c;
  c.type = as_string(s.req("type"), "controller.type");
  if (c.type == "feedback") {
    c.K = as_mat(s.req("K"), "controller.K");
  } else if (c.type == "fixed") {
    c.u = as_vec(s.req("u"), "controller.u");
  } else if (c.type != "none") {
    throw ValidationError("config key 'controller.type': expected none, feedback or fixed");
  }
  s.finish();
  return c;
}

json controller_json(const ControllerSpec& c) {
  json out = {{"type", c.type}};
  if (c.type == "feedback") out["K"] = mat_json(c.K);
  if (c.type == "fixed") out["u"] = vec_json(c.u);
  return out;
}

SimConfig read_sim(const json& j) {
  Section s(j, "sim");
  SimConfig c;
  c.dt = as_double(s.req("dt"), "sim.dt");
  c.t_end = as_double(s.req("t_end"), "sim.t_end");
  read(s, "record_stride", c.record_stride);
  read(s, "divergence_bound", c.divergence_bound);
  s.finish();
  return c;
}

json sim_json(const SimConfig& c) {
  json out = {{"dt", c.dt}, {"t_end", c.t_end}, {"record_stride", c.record_stride}};
  if (c.divergence_bound) out["divergence_bound"] = *c.divergence_bound;
  return out;
}

PassivitySpec read_passivity(const json& j) {
  Section s(j, "passivity");
  PassivitySpec p;
  if (const json* v = s.opt("center")) p.center = as_vec(*v, "passivity.center");
  read(s, "inner_radius", p.inner_radius);
  read(s, "outer_radius", p.outer_radius);
  read(s, "epsilon", p.epsilon);
  read(s, "samples", p.samples);
  read(s, "condition", p.condition);
  read(s, "delta", p.delta);
  s.finish();
  if (p.condition != "weak") {
    if (p.condition.rfind("strict_", 0) != 0) {
      throw ValidationError("config key 'passivity.condition': expected weak or strict_<state|input|output>");
    }
    (void)strict_kind_from_string(p.condition.substr(7));
  }
  return p;
}

json passivity_json(const PassivitySpec& p) {
  json out = {{"samples", p.samples}, {"condition", p.condition}, {"delta", p.delta}};
  if (p.center) out["center"] = vec_json(*p.center);
  if (p.inner_radius) out["inner_radius"] = *p.inner_radius;
  if (p.outer_radius) out["outer_radius"] = *p.outer_radius;
  if (p.epsilon) out["epsilon"] = *p.epsilon;
  return out;
}

RecurrenceSpec read_recurrence(const json& j) {
  Section s(j, "recurrence");
  RecurrenceSpec r;
  r.k = as_double(s.req("k"), "recurrence.k");
  r.C = as_double(s.req("C"), "recurrence.C");
  r.target_center = as_vec(s.req("target_center"), "recurrence.target_center");
  r.target_radius = as_double(s.req("target_radius"), "recurrence.target_radius");
  read(s, "paths", r.paths);
  read(s, "V1", r.V1);
  read(s, "V2", r.V2);
  read(s, "episode_t_end", r.episode_t_end);
  s.finish();
  return r;
}

json recurrence_json(const RecurrenceSpec& r) {
  return {{"k", r.k},
          {"C", r.C},
          {"target_center", vec_json(r.target_center)},
          {"target_radius", r.target_radius},
          {"paths", r.paths},
          {"V1", r.V1},
          {"V2", r.V2},
          {"episode_t_end", r.episode_t_end}};
}

Theorem6Spec read_theorem6(const json& j) {
  Section s(j, "measure.theorem6");
  Theorem6Spec t;
  t.k = as_double(s.req("k"), "measure.theorem6.k");
  t.C = as_double(s.req("C"), "measure.theorem6.C");
  t.center = as_vec(s.req("center"), "measure.theorem6.center");
  t.set_radius = as_double(s.req("set_radius"), "measure.theorem6.set_radius");
  t.shell_radius = as_double(s.req("shell_radius"), "measure.theorem6.shell_radius");
  read(s, "samples", t.samples);
  s.finish();
  return t;
}

json theorem6_json(const Theorem6Spec& t) {
  return {{"k", t.k},
          {"C", t.C},
          {"center", vec_json(t.center)},
          {"set_radius", t.set_radius},
          {"shell_radius", t.shell_radius},
          {"samples", t.samples}};
}

MeasureSpec read_measure(const json& j) {
  Section s(j, "measure");
  MeasureSpec m;
  m.box = read_box(s.req("box"), "measure.box");
  m.bins = as_sizes(s.req("bins"), "measure.bins");
  m.times = as_doubles(s.req("times"), "measure.times");
  const json& x0s = s.req("initial_states");
  if (!x0s.is_array()) bad_type("measure.initial_states", "array of states", x0s);
  for (std::size_t i = 0; i < x0s.size(); ++i) {
    m.initial_states.push_back(as_vec(x0s[i], "measure.initial_states[" + std::to_string(i) + "]"));
  }
  read(s, "paths", m.paths);
  read(s, "burn_in", m.burn_in);
  read(s, "ergodic_t_end", m.ergodic_t_end);
  if (const json* t = s.opt("theorem6")) m.theorem6 = read_theorem6(*t);
  s.finish();
  return m;
}

json measure_json(const MeasureSpec& m) {
  json x0s = json::array();
  for (const Vec& x : m.initial_states) x0s.push_back(vec_json(x));
  json out = {{"box", box_json(m.box)},
              {"bins", m.bins},
              {"times", m.times},
              {"initial_states", x0s},
              {"paths", m.paths},
              {"burn_in", m.burn_in},
              {"ergodic_t_end", m.ergodic_t_end}};
  if (m.theorem6) out["theorem6"] = theorem6_json(*m.theorem6);
  return out;
}

CstrSpec read_cstr(const json& j) {
  Section s(j, "cstr");
  CstrSpec c;
  read(s, "gain", c.gain);
  read(s, "uncontrolled_flow", c.uncontrolled_flow);
  if (c.uncontrolled_flow != "equilibrium" && c.uncontrolled_flow != "listed_q0") {
    throw ValidationError("config key 'cstr.uncontrolled_flow': expected equilibrium or listed_q0");
  }
  read(s, "burn_in", c.burn_in);
  read(s, "ensemble_paths", c.ensemble_paths);
  if (const json* v = s.opt("snapshot_times")) c.snapshot_times = as_doubles(*v, "cstr.snapshot_times");
  read(s, "sample_path_t_end", c.sample_path_t_end);
  read(s, "sample_path_stride", c.sample_path_stride);
  read(s, "sub_lo", c.sub_lo);
  read(s, "sub_hi", c.sub_hi);
  read(s, "bins", c.bins);
  read(s, "coverage", c.coverage);
  read(s, "band_batches", c.band_batches);
  read(s, "scan_samples", c.scan_samples);
  read(s, "theorem6_set_radius", c.theorem6_set_radius);
  s.finish();
  return c;
}

json cstr_json(const CstrSpec& c) {
  json out = {{"uncontrolled_flow", c.uncontrolled_flow},
              {"burn_in", c.burn_in},
              {"ensemble_paths", c.ensemble_paths},
              {"snapshot_times", c.snapshot_times},
              {"sample_path_t_end", c.sample_path_t_end},
              {"sample_path_stride", c.sample_path_stride},
              {"sub_lo", c.sub_lo},
              {"sub_hi", c.sub_hi},
              {"bins", c.bins},
              {"coverage", c.coverage},
              {"band_batches", c.band_batches},
              {"scan_samples", c.scan_samples}};
  if (c.gain) out["gain"] = *c.gain;
  if (c.theorem6_set_radius) out["theorem6_set_radius"] = *c.theorem6_set_radius;
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  Section s(j, "");
  RunConfig c;
  c.model = read_model(s.req("model"));
  c.sim = read_sim(s.req("sim"));
  c.initial_state = as_vec(s.req("initial_state"), "initial_state");
  if (const json* v = s.opt("seed")) c.seed = as_u64(*v, "seed");
  c.sim.master_seed = c.seed;
  read(s, "output_dir", c.output_dir);
  if (const json* v = s.opt("storage")) c.storage = read_storage(*v);
  if (const json* v = s.opt("controller")) c.controller = read_controller(*v);
  if (const json* v = s.opt("simulate")) {
    Section sim(*v, "simulate");
    SimulateSpec spec;
    read(sim, "paths", spec.paths);
    sim.finish();
    c.simulate = spec;
  }
  if (const json* v = s.opt("passivity")) c.passivity = read_passivity(*v);
  if (const json* v = s.opt("recurrence")) c.recurrence = read_recurrence(*v);
  if (const json* v = s.opt("measure")) c.measure = read_measure(*v);
  if (const json* v = s.opt("cstr")) c.cstr = read_cstr(*v);
  s.finish();
  return c;
}

json RunConfig::to_json() const {
  json out = {{"model", model_json(model)},
              {"controller", controller_json(controller)},
              {"sim", sim_json(sim)},
              {"initial_state", vec_json(initial_state)},
              {"seed", seed},
              {"output_dir", output_dir}};
  if (storage) out["storage"] = storage_json(*storage);
  if (simulate) out["simulate"] = {{"paths", simulate->paths}};
  if (passivity) out["passivity"] = passivity_json(*passivity);
  if (recurrence) out["recurrence"] = recurrence_json(*recurrence);
  if (measure) out["measure"] = measure_json(*measure);
  if (cstr) out["cstr"] = cstr_json(*cstr);
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

ItoSystem build_model(const ModelSpec& spec) {
  if (spec.name == "ou") {
    LinearSystem sys{Mat::Constant(1, 1, -spec.ou.theta), Mat::Identity(1, 1), Mat::Identity(1, 1),
                     Mat::Constant(1, 1, spec.ou.sigma)};
    const Box domain = spec.domain.value_or(Box{Vec::Constant(1, -10.0), Vec::Constant(1, 10.0)});
    return to_ito_system(sys, domain);
  }
  if (spec.name == "linear") {
    const auto n = spec.linear.A.rows();
    const Box domain = spec.domain.value_or(Box{Vec::Constant(n, -10.0), Vec::Constant(n, 10.0)});
    return to_ito_system(spec.linear, domain);
  }
  if (spec.name == "cstr") return build_cstr_io(spec.cstr);
  if (spec.name == "cstr_subS") return build_cstr_subsystem(spec.cstr).subsystem;
  throw ValidationError("unknown model '" + spec.name + "'");
}

Plant build_plant(const RunConfig& cfg) {
  ItoSystem system = build_model(cfg.model);
  const auto m = static_cast<Eigen::Index>(system.m());
  if (cfg.controller.type == "feedback") {
    if (cfg.controller.K.rows() != m || cfg.controller.K.cols() != m) {
      throw DimensionMismatch("controller.K must be " + std::to_string(m) + "x" + std::to_string(m));
    }
    return Plant(close_loop(system, FeedbackLaw(cfg.controller.K)));
  }
  if (cfg.controller.type == "fixed") {
    if (cfg.controller.u.size() != m) throw DimensionMismatch("controller.u must have length " + std::to_string(m));
    return Plant(std::move(system), cfg.controller.u);
  }
  return Plant::open_loop(std::move(system));
}

StorageFunction build_storage(const RunConfig& cfg) {
  if (!cfg.storage) {
    if (cfg.model.name == "cstr_subS") return cstr_storage(cfg.model.cstr);
    throw ValidationError("missing required config key 'storage'");
  }
  if (cfg.storage->type == "cstr") {
    if (cfg.model.name != "cstr_subS") {
      throw ValidationError("config key 'storage.type': cstr storage needs model cstr_subS");
    }
    return cstr_storage(cfg.model.cstr);
  }
  return StorageFunction::quadratic(cfg.storage->D, cfg.storage->center);
}

CstrExperimentConfig build_cstr_config(const RunConfig& cfg) {
  if (cfg.model.name != "cstr") throw ValidationError("config key 'model.name': the cstr experiment needs model cstr");
  if (!cfg.cstr) throw ValidationError("missing required config key 'cstr'");
  const CstrSpec& s = *cfg.cstr;
  CstrExperimentConfig e;
  e.params = cfg.model.cstr;
  e.gain = s.gain;
  e.uncontrolled_flow =
      s.uncontrolled_flow == "listed_q0" ? UncontrolledFlow::listed_q0 : UncontrolledFlow::equilibrium;
  e.x0 = cfg.initial_state;
  e.sim = cfg.sim;
  e.burn_in = s.burn_in;
  e.ensemble_paths = s.ensemble_paths;
  e.snapshot_times = s.snapshot_times;
  e.sample_path_t_end = s.sample_path_t_end;
  e.sample_path_stride = s.sample_path_stride;
  e.sub_lo = s.sub_lo;
  e.sub_hi = s.sub_hi;
  e.bins = s.bins;
  e.coverage = s.coverage;
  e.band_batches = s.band_batches;
  e.scan_samples = s.scan_samples;
  e.theorem6_set_radius = s.theorem6_set_radius;
  return e;
}

}  // namespace swpass
