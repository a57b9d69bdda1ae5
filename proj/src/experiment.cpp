#include "sdeid/experiment.hpp"

#include <fmt/format.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sdeid/csv.hpp"
#include "sdeid/errors.hpp"
#include "sdeid/gallery.hpp"
#include "sdeid/simulate.hpp"

namespace sdeid {

namespace fs = std::filesystem;

namespace {

Json model_defaults() {
  return Json{{"name", "ou"},
              {"params", Json::object()},
              {"work_interval", nullptr},
              {"drift_file", ""},
              {"diffusion_file", ""},
              {"drift_bump", {{"height", 0.0}, {"center", 0.0}, {"width", 0.4}}},
              {"variance_bump", {{"height", 0.0}, {"center", 0.0}, {"width", 0.4}}}};
}

Json build_defaults() {
  Json d;
  d["pipeline"] = "identify";
  d["seed"] = 1;
  d["threads"] = 1;
  d["out"] = "sdeid_out";
  d["model"] = model_defaults();
  d["model_b"] = nullptr;
  d["grid"] = {{"nx", 401}, {"nt", 200}, {"t_max", 0.1}, {"x_min", nullptr}, {"x_max", nullptr}};
  d["fk"] = {{"monotone", true}, {"upwind", true}, {"boundary", "linear_extrapolation"}};
  d["observation"] = {{"epsilon", 0.1}, {"omega", {-0.5, 0.5}}, {"n_t", 20},         {"n_x", 20},
                      {"kind", "O_k"},  {"k", 1},               {"x0", 0.0},         {"f", "s"},
                      {"source", "pde"}, {"n_paths", 10000},    {"dt", 0.001},       {"derivative_step", 0.01}};
  d["simulate"] = {{"x0", 0.0},
                   {"t", {0.02, 0.04, 0.06, 0.08, 0.1}},
                   {"dt", 0.001},
                   {"n_paths", 10000},
                   {"f", {"s", "s^2"}},
                   {"write_paths", 0}};
  d["solve"] = {{"f", "s"}, {"t_stride", 10}, {"x_stride", 4}, {"binary", true}};
  d["identify"] = {{"method", "short_time"},
                   {"recon_interval", nullptr},
                   {"n_nodes", 11},
                   {"reg_weight", 0.0},
                   {"max_iters", 200}};
  d["distinguish"] = {{"f", {"s", "s^2"}}, {"tol", 10 * kPdeTolerance}};
  return d;
}

const char* type_name(const Json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Merge `patch` onto `base`; every key of `patch` must exist in `base`.
void merge_into(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path.empty() ? "config" : path));
  for (const auto& [key, value] : patch.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", where));
    Json& slot = base[key];
    if (key == "params" && value.is_object()) {
      for (const auto& [name, v] : value.items()) {
        if (!v.is_number()) throw ConfigError(fmt::format("'{}.{}' must be a number", where, name));
        slot[name] = v;
      }
    } else if (key == "model_b" && value.is_object()) {
      if (slot.is_null()) slot = model_defaults();
      merge_into(slot, value, where);
    } else if (slot.is_object() && value.is_object()) {
      merge_into(slot, value, where);
    } else if (slot.is_null() || value.is_null() || same_kind(slot, value)) {
      slot = value;
    } else {
      throw ConfigError(fmt::format("'{}' must be a {}, got {}", where, type_name(slot), type_name(value)));
    }
  }
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

Interval interval_of(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(fmt::format("'{}' must be [lo, hi]", what));
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Coefficient read_coefficient(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open coefficient file '{}'", path));
  return Coefficient::read_text(in);
}

// Fills the gallery parameters of a model spec in place and builds it.
SdeModel build_model(Json& spec) {
  const std::string name = get<std::string>(spec, "name");
  const GalleryEntry& entry = gallery_entry(name);
  ParamMap params;
  for (const auto& [k, v] : spec["params"].items()) params[k] = v.get<double>();
  for (const auto& p : entry.params) {
    if (!params.count(p.name)) {
      params[p.name] = p.default_value;
    }
  }
  Json ordered = Json::object();
  for (const auto& p : entry.params) ordered[p.name] = params[p.name];
  for (const auto& [k, v] : params) {
    if (!ordered.contains(k)) throw ConfigError(fmt::format("model '{}' has no parameter '{}'", name, k));
  }
  spec["params"] = ordered;

  SdeModel model = make_model(name, params);
  if (!spec["work_interval"].is_null()) model.work_interval = interval_of(spec["work_interval"], "work_interval");
  if (const auto f = get<std::string>(spec, "drift_file"); !f.empty()) model.drift = read_coefficient(f);
  if (const auto f = get<std::string>(spec, "diffusion_file"); !f.empty()) model.diffusion = read_coefficient(f);
  const Json& db = spec["drift_bump"];
  if (get<double>(db, "height") != 0.0) {
    model = with_drift_bump(model, get<double>(db, "height"), get<double>(db, "center"), get<double>(db, "width"));
  }
  const Json& vb = spec["variance_bump"];
  if (get<double>(vb, "height") != 0.0) {
    model = with_variance_bump(model, get<double>(vb, "height"), get<double>(vb, "center"), get<double>(vb, "width"));
  }
  model.check();
  return model;
}

BoundaryCondition parse_boundary(const std::string& text) {
  if (text == "linear_extrapolation") return BoundaryCondition::linear_extrapolation;
  if (text == "neumann") return BoundaryCondition::neumann;
  throw ConfigError(fmt::format("unknown boundary '{}' (expected linear_extrapolation or neumann)", text));
}

std::vector<Observable> observables(const Json& list) {
  if (!list.is_array() || list.empty()) throw ConfigError("observable list must be a non-empty array");
  std::vector<Observable> out;
  for (const auto& item : list) out.push_back(Observable::parse(item.get<std::string>()));
  return out;
}

}  // namespace

const Json& default_config() {
  static const Json d = build_defaults();
  return d;
}

ExperimentConfig::ExperimentConfig() : ExperimentConfig(Json::object()) {}

ExperimentConfig::ExperimentConfig(Json user) : user_(std::move(user)) { resolve(); }

void ExperimentConfig::resolve() {
  Json doc = default_config();
  merge_into(doc, user_, "");
  build_model(doc["model"]);
  if (!doc["model_b"].is_null()) build_model(doc["model_b"]);
  doc_ = std::move(doc);
  pipeline();
  observation();
  fk();
  parse_reconstruction_method(get<std::string>(doc_["identify"], "method"));
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  Json user;
  try {
    user = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  return ExperimentConfig(std::move(user));
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw UsageError("empty override key");
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  Json* node = &user_;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError(fmt::format("malformed override key '{}'", key));
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      break;
    }
    Json& child = (*node)[part];
    if (!child.is_object()) child = Json::object();
    node = &child;
    start = dot + 1;
  }
  resolve();
}

std::string ExperimentConfig::to_text() const { return doc_.dump(2) + "\n"; }

std::string ExperimentConfig::pipeline() const {
  const auto p = get<std::string>(doc_, "pipeline");
  for (const char* known : {"simulate", "solve", "observe", "identify", "distinguish"}) {
    if (p == known) return p;
  }
  throw ConfigError(fmt::format("unknown pipeline '{}'", p));
}

SdeModel ExperimentConfig::model() const {
  Json spec = doc_["model"];
  return build_model(spec);
}

SdeModel ExperimentConfig::model_b() const {
  if (doc_["model_b"].is_null()) throw ConfigError("the distinguish pipeline needs 'model_b'");
  Json spec = doc_["model_b"];
  return build_model(spec);
}

Grid1D ExperimentConfig::grid(const SdeModel& model) const {
  const Json& g = doc_["grid"];
  Grid1D grid{model.work_interval.lo, model.work_interval.hi, get<int>(g, "nx"), get<double>(g, "t_max"),
              get<int>(g, "nt")};
  if (!g["x_min"].is_null()) grid.x_min = get<double>(g, "x_min");
  if (!g["x_max"].is_null()) grid.x_max = get<double>(g, "x_max");
  grid.check();
  return grid;
}

FkOptions ExperimentConfig::fk() const {
  const Json& f = doc_["fk"];
  FkOptions o;
  o.monotone = get<bool>(f, "monotone");
  o.upwind = get<bool>(f, "upwind");
  o.boundary = parse_boundary(get<std::string>(f, "boundary"));
  return o;
}

ObservationConfig ExperimentConfig::observation() const {
  const Json& o = doc_["observation"];
  ObservationConfig c;
  c.epsilon = get<double>(o, "epsilon");
  c.omega = interval_of(o["omega"], "observation.omega");
  c.n_t = get<int>(o, "n_t");
  c.n_x = get<int>(o, "n_x");
  c.kind = parse_observation_kind(get<std::string>(o, "kind"));
  c.k = get<int>(o, "k");
  c.x0 = get<double>(o, "x0");
  c.check();
  return c;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const NumericalError*>(&error)) return 3;
  if (dynamic_cast<const UsageError*>(&error) || dynamic_cast<const ConfigError*>(&error) ||
      dynamic_cast<const DataError*>(&error)) {
    return 2;
  }
  return 1;
}

namespace {

class Outputs {
 public:
  Outputs(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

  template <typename Writer>
  void write(const std::string& name, Writer&& writer, std::ios::openmode mode = std::ios::out) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw DataError(fmt::format("cannot write '{}'", path.string()));
    writer(os);
    if (!os) throw DataError(fmt::format("failed writing '{}'", path.string()));
    files_.push_back(name);
    log_ << "wrote " << path.string() << '\n';
  }

  Json files() const { return files_; }

 private:
  fs::path dir_;
  std::ostream& log_;
  std::vector<std::string> files_;
};

std::string file_label(const std::string& f_label) {
  std::string out;
  for (char c : f_label) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

ObservationSource source_for(const ExperimentConfig& config, const SdeModel& model) {
  const Json& o = config.json()["observation"];
  const auto kind = get<std::string>(o, "source");
  if (kind == "pde") return PdeSource{model, config.grid(model), config.fk()};
  if (kind == "monte_carlo") {
    const McOptions options{get<double>(o, "dt"), config.json()["threads"].get<int>()};
    return McSource{model, get<int>(o, "n_paths"), config.json()["seed"].get<std::uint64_t>(), options,
                    get<double>(o, "derivative_step")};
  }
  throw ConfigError(fmt::format("unknown observation source '{}' (expected pde or monte_carlo)", kind));
}

Json run_simulate(const ExperimentConfig& config, const SdeModel& model, Outputs& out) {
  const Json& s = config.json()["simulate"];
  const auto seed = config.json()["seed"].get<std::uint64_t>();
  McOptions options;
  options.dt = get<double>(s, "dt");
  options.threads = config.json()["threads"].get<int>();
  const auto times = get<std::vector<double>>(s, "t");
  const auto x0 = get<double>(s, "x0");
  const auto n_paths = get<int>(s, "n_paths");
  std::vector<MomentEstimate> all;
  std::int64_t clamped = 0;
  for (const Observable& f : observables(s["f"])) {
    const auto est = mc_moment(model, x0, times, f, n_paths, seed, options);
    clamped = std::max(clamped, est.front().clamped_paths);
    all.insert(all.end(), est.begin(), est.end());
  }
  out.write("moments.csv", [&](std::ostream& os) { write_moments_csv(os, all); });

  if (const auto keep = get<int>(s, "write_paths"); keep > 0) {
    const int n_steps = static_cast<int>(std::llround(times.back() / options.dt));
    const PathBatch batch = simulate_paths(model, x0, options.dt, n_steps, keep, seed, options.threads);
    out.write("paths.csv", [&](std::ostream& os) {
      os << "path,step,t,x\n";
      for (Eigen::Index p = 0; p < batch.values.rows(); ++p) {
        for (Eigen::Index k = 0; k < batch.values.cols(); ++k) {
          os << p << ',' << k << ',' << csv_number(static_cast<double>(k) * batch.dt) << ','
             << csv_number(batch.values(p, k)) << '\n';
        }
      }
    });
  }
  return {{"estimates", all.size()}, {"clamped_paths", clamped}};
}

Json run_solve(const ExperimentConfig& config, const SdeModel& model, Outputs& out) {
  const Json& s = config.json()["solve"];
  const Observable f = Observable::parse(get<std::string>(s, "f"));
  const SolutionField field = solve_fk(model, f, config.grid(model), config.fk());
  out.write("field.csv",
            [&](std::ostream& os) { write_field_csv(os, field, get<int>(s, "t_stride"), get<int>(s, "x_stride")); });
  if (get<bool>(s, "binary")) {
    out.write("field.bin", [&](std::ostream& os) { write_field_binary(os, field); }, std::ios::binary);
  }
  const auto& d = field.diagnostics;
  return {{"upwinded_nodes", d.upwinded_nodes},
          {"max_cell_peclet", d.max_cell_peclet},
          {"m_matrix", d.m_matrix},
          {"positive_explicit_part", d.positive_explicit_part}};
}

Json run_observe(const ExperimentConfig& config, const SdeModel& model, Outputs& out) {
  const Observable f = Observable::parse(get<std::string>(config.json()["observation"], "f"));
  const ObservationSet set = extract(source_for(config, model), config.observation(), f);
  out.write("observations.csv", [&](std::ostream& os) { write_observations_csv(os, set); });
  return {{"samples", set.samples.size()}, {"f", set.f_label}};
}

Json run_identify(const ExperimentConfig& config, const SdeModel& model, Outputs& out) {
  const Json& id = config.json()["identify"];
  const ReconstructionMethod method = parse_reconstruction_method(get<std::string>(id, "method"));
  const ObservationSource source = source_for(config, model);
  ObservationConfig lattice = config.observation();
  lattice.kind = ObservationKind::moment;
  lattice.k = 1;
  const ObservationSet o1 = extract(source, lattice);
  std::vector<const ObservationSet*> used{&o1};
  ObservationSet o2, ov;
  ReconstructionResult r;
  if (method == ReconstructionMethod::variance_slope) {
    lattice.kind = ObservationKind::variance;
    ov = extract(source, lattice);
    used.push_back(&ov);
    r = recover_diffusion_variance_slope(ov, &o1);
  } else {
    lattice.k = 2;
    o2 = extract(source, lattice);
    used.push_back(&o2);
    if (method == ReconstructionMethod::short_time) {
      r = recover_diffusion_short_time(o1, o2);
    } else {
      const Grid1D grid = config.grid(model);
      JointOptions opts;
      opts.work_interval = {grid.x_min, grid.x_max};
      opts.nx = grid.nx;
      opts.nt = grid.nt;
      opts.t_max = grid.t_max;
      opts.fk = config.fk();
      opts.n_nodes = get<int>(id, "n_nodes");
      opts.max_iters = get<int>(id, "max_iters");
      opts.threads = config.json()["threads"].get<int>();
      const Interval recon =
          id["recon_interval"].is_null() ? lattice.omega : interval_of(id["recon_interval"], "recon_interval");
      r = recover_joint_global(o1, o2, recon, get<double>(id, "reg_weight"), opts);
    }
  }
  for (const ObservationSet* set : used) {
    out.write(fmt::format("observations_{}.csv", file_label(set->f_label)),
              [&](std::ostream& os) { write_observations_csv(os, *set); });
  }
  out.write("reconstruction.csv", [&](std::ostream& os) { write_reconstruction_csv(os, r); });

  double b_err = 0, s_err = 0;
  for (Eigen::Index i = 0; i < r.x_nodes.size(); ++i) {
    const double x = r.x_nodes(i);
    if (!lattice.omega.contains(x)) continue;
    if (std::isfinite(r.b_hat(i))) b_err = std::max(b_err, std::abs(r.b_hat(i) - model.b(x)));
    s_err = std::max(s_err, std::abs(r.sigma_hat(i) - model.sigma(x)));
  }
  const auto& d = r.diagnostics;
  return {{"method", to_string(r.method)},
          {"b_error_sup_on_omega", b_err},
          {"sigma_error_sup_on_omega", s_err},
          {"iterations", d.iterations},
          {"converged", d.converged},
          {"stop_reason", d.stop_reason},
          {"final_misfit", d.misfit_history.empty() ? 0.0 : d.misfit_history.back()},
          {"condition_estimate", d.condition_estimate},
          {"pde_solves", d.pde_solves}};
}

Json run_distinguish(const ExperimentConfig& config, const SdeModel& model, Outputs& out) {
  const SdeModel other = config.model_b();
  const Json& ds = config.json()["distinguish"];
  const Grid1D grid = config.grid(model);
  DistinguishOptions opts;
  opts.nx = grid.nx;
  opts.nt = grid.nt;
  opts.t_max = grid.t_max;
  opts.fk = config.fk();
  opts.tol = get<double>(ds, "tol");
  const DistinguishabilityReport report =
      distinguishability_test(model, other, config.observation(), observables(ds["f"]), opts);
  out.write("report.txt", [&](std::ostream& os) { write_report_text(os, report); });
  out.write("differences.csv", [&](std::ostream& os) { write_difference_csv(os, report); });
  return {{"verdict", to_string(report.verdict)},
          {"sup_abs_U", report.sup_abs_U},
          {"model_b_fingerprint", fmt::format("{:016x}", other.fingerprint())}};
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  Json& m = result.manifest;
  m["tool"] = "sdeid";
  m["version"] = kVersion;
  m["compiler"] = __VERSION__;
  m["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  m["started_utc"] = utc_now();
  const fs::path dir = config.json()["out"].get<std::string>();
  bool dir_ready = false;
  try {
    const std::string pipeline = config.pipeline();
    m["pipeline"] = pipeline;
    m["seed"] = config.json()["seed"];
    m["threads"] = config.json()["threads"];
    if (config.json()["threads"].get<int>() < 1) throw ConfigError("threads must be at least 1");
    const SdeModel model = config.model();
    m["model_fingerprint"] = fmt::format("{:016x}", model.fingerprint());

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    dir_ready = true;
    Outputs out(dir, log);
    out.write("config.json", [&](std::ostream& os) { os << config.to_text(); });

    if (pipeline == "simulate") {
      m["result"] = run_simulate(config, model, out);
    } else if (pipeline == "solve") {
      m["result"] = run_solve(config, model, out);
    } else if (pipeline == "observe") {
      m["result"] = run_observe(config, model, out);
    } else if (pipeline == "identify") {
      m["result"] = run_identify(config, model, out);
    } else {
      m["result"] = run_distinguish(config, model, out);
      m["verdict"] = m["result"]["verdict"];
    }
    m["outputs"] = out.files();
    result.exit_code = 0;
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.message = e.what();
    m["error"] = result.message;
  }
  m["exit_code"] = result.exit_code;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (dir_ready) {
    std::ofstream os(dir / "manifest.json", std::ios::trunc);
    os << m.dump(2) << '\n';
    if (!os && result.exit_code == 0) {
      result.exit_code = 2;
      result.message = "failed to write manifest.json";
    }
  }
  return result;
}

std::string models_listing() {
  std::string out;
  for (const auto& e : gallery()) {
    std::string params;
    for (const auto& p : e.params) params += fmt::format(" {}={}", p.name, p.default_value);
    out += fmt::format("{:<14} {:<28} {:<24}{}\n", e.name, e.drift_formula, e.diffusion_formula, params);
  }
  return out;
}

std::string model_details(const std::string& name) {
  const GalleryEntry& e = gallery_entry(name);
  const SdeModel m = make_model(name);
  std::string out = fmt::format("name: {}\ndrift: {}\ndiffusion: {}\nwork_interval: [{}, {}]\n", e.name,
                                e.drift_formula, e.diffusion_formula, m.work_interval.lo, m.work_interval.hi);
  if (!e.notes.empty()) out += fmt::format("notes: {}\n", e.notes);
  out += "parameters:\n";
  for (const auto& p : e.params) out += fmt::format("  {} = {}  ({})\n", p.name, p.default_value, p.meaning);
  return out;
}

}  // namespace sdeid
