#include "bilayer/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bilayer/version.hpp"

namespace bilayer {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// compact, filename-friendly number (1, 2.5, 0.25)
std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    default: return "z";
  }
}

Axis axis_from(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw ParameterError("bad axis: " + s);
}

json sequence_to_json(const ToggleSequence& seq) {
  json arr = json::array();
  for (const auto& s : seq.steps) {
    arr.push_back({{"axis_a", axis_name(s.axis_a)},
                   {"sign_a", s.sign_a},
                   {"axis_b", axis_name(s.axis_b)},
                   {"sign_b", s.sign_b},
                   {"duration", s.duration.str()}});
  }
  return arr;
}

ToggleSequence sequence_from_json(const json& arr) {
  std::vector<ToggleStep> steps;
  for (const auto& e : arr) {
    ToggleStep s;
    s.axis_a = axis_from(e.at("axis_a").get<std::string>());
    s.axis_b = axis_from(e.at("axis_b").get<std::string>());
    s.sign_a = e.at("sign_a").get<int>();
    s.sign_b = e.at("sign_b").get<int>();
    s.duration = Rational::parse(e.at("duration").get<std::string>());
    steps.push_back(s);
  }
  return ToggleSequence::from_steps(std::move(steps));
}

OracleKind oracle_from(const std::string& s) {
  if (s == "auto") return OracleKind::Auto;
  if (s == "collective") return OracleKind::Collective;
  if (s == "brute") return OracleKind::BruteForce;
  if (s == "tms") return OracleKind::Tms;
  throw ParameterError("unknown oracle kind: " + s);
}

const char* oracle_name(OracleKind k) {
  switch (k) {
    case OracleKind::Auto: return "auto";
    case OracleKind::Collective: return "collective";
    case OracleKind::BruteForce: return "brute";
    default: return "tms";
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  lattice.validate();
  grid.validate();
  if (trajectories < 2) throw ParameterError("need at least 2 trajectories");
  if (realizations < 1) throw ParameterError("realizations must be >= 1");
  if (kinds.empty()) throw ParameterError("at least one model kind");
  std::set<std::uint64_t> seeds{lattice.seed, dtwa_seed, disorder_seed};
  if (seeds.size() != 3)
    throw ParameterError("lattice, dtwa and disorder seeds must be distinct");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config parse error: ") + e.what());
  }
  try {
    ExperimentConfig c;
    if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion)
      throw ParameterError("unsupported config schema version");
    const json& lat = j.at("lattice");
    c.lattice.side = lat.at("L").get<int>();
    c.lattice.a_lat = lat.value("a_lat", 1.0);
    c.lattice.a_z = lat.at("a_Z").get<double>();
    c.lattice.alpha = lat.value("alpha", 0.0);
    c.lattice.filling = lat.value("filling", 1.0);
    c.lattice.seed = lat.value("seed", std::uint64_t{0});

    const json& mod = j.at("model");
    c.kinds.clear();
    if (mod.at("kind").is_array())
      for (const auto& k : mod.at("kind")) c.kinds.push_back(model_kind_from_string(k));
    else
      c.kinds.push_back(model_kind_from_string(mod.at("kind").get<std::string>()));
    c.model.v_perp = mod.value("v_perp", 1.0);
    c.model.v_z = mod.value("v_z", 1.0);
    c.model.rescale_prefactor = mod.value("rescale_prefactor", true);
    if (mod.contains("sequence")) c.model.sequence = sequence_from_json(mod.at("sequence"));

    const json& dt = j.at("dtwa");
    c.trajectories = dt.at("trajectories").get<std::size_t>();
    c.dtwa_seed = dt.value("seed", std::uint64_t{1});
    c.dt = dt.value("dt", 0.0);
    c.dt_safety = dt.value("dt_safety", 0.02);
    c.energy_tol = dt.value("energy_tol", 1e-8);
    c.sz_tol = dt.value("sz_tol", 1e-8);
    c.norm_tol = dt.value("norm_tol", 1e-10);
    c.threads = dt.value("threads", 0);
    if (dt.contains("times")) c.grid.times = dt.at("times").get<std::vector<double>>();
    if (dt.contains("tau_max")) {
      c.grid.tau_max = dt.at("tau_max").get<double>();
      c.grid.tau_points = dt.value("tau_points", 61);
    }

    if (j.contains("disorder")) {
      c.realizations = j.at("disorder").value("realizations", 1);
      c.disorder_seed = j.at("disorder").value("seed", std::uint64_t{2});
    }
    if (j.contains("sweep")) {
      const json& sw = j.at("sweep");
      if (sw.contains("L")) c.sweep_sides = sw.at("L").get<std::vector<int>>();
      if (sw.contains("alpha")) c.sweep_alpha = sw.at("alpha").get<std::vector<double>>();
      if (sw.contains("a_Z")) c.sweep_a_z = sw.at("a_Z").get<std::vector<double>>();
      if (sw.contains("filling")) c.sweep_filling = sw.at("filling").get<std::vector<double>>();
    }
    if (j.contains("oracle")) {
      c.oracle = oracle_from(j.at("oracle").value("kind", "auto"));
      c.tms_n = j.at("oracle").value("N", 0);
      c.tms_v_avg = j.at("oracle").value("V_avg", 1.0);
    }
    if (j.contains("output")) {
      c.out_dir = j.at("output").value("dir", "out");
      c.prefix = j.at("output").value("prefix", "series");
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["schema"] = kSchemaVersion;
  j["lattice"] = {{"L", c.lattice.side},   {"a_lat", c.lattice.a_lat},
                  {"a_Z", c.lattice.a_z},  {"alpha", c.lattice.alpha},
                  {"filling", c.lattice.filling}, {"seed", c.lattice.seed}};
  json kinds;
  if (c.kinds.size() == 1)
    kinds = to_string(c.kinds.front());
  else {
    kinds = json::array();
    for (auto k : c.kinds) kinds.push_back(to_string(k));
  }
  j["model"] = {{"kind", kinds},
                {"v_perp", c.model.v_perp},
                {"v_z", c.model.v_z},
                {"rescale_prefactor", c.model.rescale_prefactor}};
  if (c.model.sequence) j["model"]["sequence"] = sequence_to_json(*c.model.sequence);
  j["dtwa"] = {{"trajectories", c.trajectories}, {"seed", c.dtwa_seed},
               {"dt", c.dt},                     {"dt_safety", c.dt_safety},
               {"energy_tol", c.energy_tol},     {"sz_tol", c.sz_tol},
               {"norm_tol", c.norm_tol},         {"threads", c.threads}};
  if (!c.grid.times.empty())
    j["dtwa"]["times"] = c.grid.times;
  else {
    j["dtwa"]["tau_max"] = c.grid.tau_max;
    j["dtwa"]["tau_points"] = c.grid.tau_points;
  }
  j["disorder"] = {{"realizations", c.realizations}, {"seed", c.disorder_seed}};
  json sw = json::object();
  if (!c.sweep_sides.empty()) sw["L"] = c.sweep_sides;
  if (!c.sweep_alpha.empty()) sw["alpha"] = c.sweep_alpha;
  if (!c.sweep_a_z.empty()) sw["a_Z"] = c.sweep_a_z;
  if (!c.sweep_filling.empty()) sw["filling"] = c.sweep_filling;
  if (!sw.empty()) j["sweep"] = sw;
  j["oracle"] = {{"kind", oracle_name(c.oracle)}, {"N", c.tms_n}, {"V_avg", c.tms_v_avg}};
  j["output"] = {{"dir", c.out_dir}, {"prefix", c.prefix}};
  return j.dump(2);
}

void write_series_csv(const std::filesystem::path& file, const ObservableSeries& s) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << "# bilayer-series schema=" << kSchemaVersion << " version=" << kVersion << "\n";
  out << "# kind=" << to_string(s.meta.kind) << " L=" << s.meta.side << " alpha="
      << fmt_short(s.meta.alpha) << " a_Z=" << fmt_short(s.meta.a_z) << " a_lat="
      << fmt_short(s.meta.a_lat) << " filling=" << fmt_short(s.meta.filling)
      << " N_occ=" << s.meta.n_occ << " V_avg=" << fmt(s.meta.v_avg) << " h="
      << fmt(s.meta.stagger_h) << " R=" << s.meta.trajectories << " lattice_seed="
      << s.meta.lattice_seed << " dtwa_seed=" << s.meta.dtwa_seed << " realizations="
      << s.meta.realizations << " dt=" << fmt(s.meta.dt) << " exact=" << (s.meta.exact ? 1 : 0)
      << (s.meta.label.empty() ? "" : " label=" + s.meta.label) << "\n";
  out << "t,tau,npair,npair_err,var_minus,var_minus_err,var_plus,var_plus_err,"
         "spinlen,spinlen_err,saz,sbz\n";
  for (const auto& p : s.points) {
    out << fmt(p.t) << ',' << fmt(p.tau) << ',' << fmt(p.n_pair) << ',' << fmt(p.n_pair_err)
        << ',' << fmt(p.var_minus) << ',' << fmt(p.var_minus_err) << ',' << fmt(p.var_plus)
        << ',' << fmt(p.var_plus_err) << ',' << fmt(p.spin_length) << ','
        << fmt(p.spin_length_err) << ',' << fmt(p.s_a_z) << ',' << fmt(p.s_b_z) << "\n";
  }
  if (!out) throw IoError("failed writing " + file.string());
}

ObservableSeries read_series_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  ObservableSeries s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (key == "kind") s.meta.kind = model_kind_from_string(val);
          else if (key == "L") s.meta.side = std::stoi(val);
          else if (key == "alpha") s.meta.alpha = std::stod(val);
          else if (key == "a_Z") s.meta.a_z = std::stod(val);
          else if (key == "a_lat") s.meta.a_lat = std::stod(val);
          else if (key == "filling") s.meta.filling = std::stod(val);
          else if (key == "N_occ") s.meta.n_occ = std::stoull(val);
          else if (key == "V_avg") s.meta.v_avg = std::stod(val);
          else if (key == "h") s.meta.stagger_h = std::stod(val);
          else if (key == "R") s.meta.trajectories = std::stoull(val);
          else if (key == "realizations") s.meta.realizations = std::stoi(val);
          else if (key == "dt") s.meta.dt = std::stod(val);
          else if (key == "exact") s.meta.exact = val == "1";
          else if (key == "label") s.meta.label = val;
        } catch (const std::exception&) {
          throw IoError("bad metadata in " + file.string() + ": " + tok);
        }
      }
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;  // header
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 12) throw IoError("bad row in " + file.string());
    ObservablePoint p;
    p.t = vals[0];
    p.tau = vals[1];
    p.n_pair = vals[2];
    p.n_pair_err = vals[3];
    p.var_minus = p.var_minus_1 = p.var_minus_2 = vals[4];
    p.var_minus_err = vals[5];
    p.var_plus = p.var_plus_1 = p.var_plus_2 = vals[6];
    p.var_plus_err = vals[7];
    p.spin_length = vals[8];
    p.spin_length_err = vals[9];
    p.s_a_z = vals[10];
    p.s_b_z = vals[11];
    s.points.push_back(p);
  }
  return s;
}

namespace {

std::filesystem::path point_file(const ExperimentConfig& c, ModelKind kind, int side,
                                 double alpha, double a_z, double filling) {
  std::string name = c.prefix;
  name += "_" + std::string(to_string(kind));
  name += "_L" + std::to_string(side);
  name += "_a" + fmt_short(alpha);
  name += "_az" + fmt_short(a_z);
  name += "_f" + fmt_short(filling);
  name += ".csv";
  return std::filesystem::path(c.out_dir) / name;
}

RunSpec spec_for(const ExperimentConfig& c, ModelKind kind, int side, double alpha, double a_z,
                 double filling) {
  RunSpec spec;
  spec.lattice = c.lattice;
  spec.lattice.side = side;
  spec.lattice.alpha = alpha;
  spec.lattice.a_z = a_z;
  spec.lattice.filling = filling;
  spec.kind = kind;
  spec.model = c.model;
  spec.trajectories = c.trajectories;
  spec.dtwa_seed = c.dtwa_seed;
  spec.grid = c.grid;
  spec.integrator.dt = c.dt;
  spec.integrator.dt_safety = c.dt_safety;
  spec.integrator.energy_tol = c.energy_tol;
  spec.integrator.sz_tol = c.sz_tol;
  spec.integrator.norm_tol = c.norm_tol;
  spec.integrator.threads = c.threads;
  return spec;
}

json meta_json(const ObservableSeries& s) {
  return {{"kind", to_string(s.meta.kind)},
          {"L", s.meta.side},
          {"alpha", s.meta.alpha},
          {"a_Z", s.meta.a_z},
          {"filling", s.meta.filling},
          {"N_occ", s.meta.n_occ},
          {"V_avg", s.meta.v_avg},
          {"h", s.meta.stagger_h},
          {"R", s.meta.trajectories},
          {"realizations", s.meta.realizations},
          {"dt", s.meta.dt}};
}

}  // namespace

std::vector<PointRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  const auto sides = config.sweep_sides.empty() ? std::vector<int>{config.lattice.side}
                                                : config.sweep_sides;
  const auto alphas = config.sweep_alpha.empty() ? std::vector<double>{config.lattice.alpha}
                                                 : config.sweep_alpha;
  const auto a_zs = config.sweep_a_z.empty() ? std::vector<double>{config.lattice.a_z}
                                             : config.sweep_a_z;
  const auto fillings = config.sweep_filling.empty() ? std::vector<double>{config.lattice.filling}
                                                     : config.sweep_filling;
  std::vector<PointRecord> records;
  json manifest;
  manifest["version"] = kVersion;
  manifest["schema"] = kSchemaVersion;
  manifest["config"] = json::parse(serialize_config(config));
  manifest["points"] = json::array();
  for (ModelKind kind : config.kinds)
    for (int side : sides)
      for (double alpha : alphas)
        for (double a_z : a_zs)
          for (double filling : fillings) {
            RunSpec spec = spec_for(config, kind, side, alpha, a_z, filling);
            ObservableSeries series =
                disorder_average(spec, config.realizations, config.disorder_seed);
            PointRecord rec{kind, side, alpha, a_z, filling,
                            point_file(config, kind, side, alpha, a_z, filling),
                            std::move(series)};
            write_series_csv(rec.file, rec.series);
            json point = meta_json(rec.series);
            point["file"] = rec.file.filename().string();
            manifest["points"].push_back(point);
            records.push_back(std::move(rec));
          }
  std::ofstream mf(std::filesystem::path(config.out_dir) / (config.prefix + "_manifest.json"),
                   std::ios::binary);
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.dump(2) << "\n";
  return records;
}

std::filesystem::path sweep_experiment(const ExperimentConfig& config) {
  auto records = run_experiment(config);
  json summary;
  summary["version"] = kVersion;
  summary["points"] = json::array();
  for (const auto& rec : records) {
    const MinVariance mv = min_variance(rec.series);
    json p = meta_json(rec.series);
    p["file"] = rec.file.filename().string();
    p["t_min"] = mv.t;
    p["tau_min"] = mv.tau;
    p["var_min"] = mv.value;
    p["var_min_err"] = mv.err;
    p["boundary"] = mv.boundary;
    summary["points"].push_back(p);
  }
  // scaling fit per model kind over the size axis
  if (config.sweep_sides.size() >= 3) {
    summary["fits"] = json::array();
    for (ModelKind kind : config.kinds) {
      std::vector<ScalingPoint> pts;
      for (const auto& rec : records)
        if (rec.kind == kind) {
          const MinVariance mv = min_variance(rec.series);
          pts.push_back({static_cast<double>(rec.series.meta.n_occ), mv.value});
        }
      if (pts.size() >= 3) {
        const ScalingFit fit = scaling_fit(pts);
        summary["fits"].push_back({{"kind", to_string(kind)},
                                   {"nu", fit.nu},
                                   {"nu_err", fit.nu_err},
                                   {"intercept", fit.intercept},
                                   {"points", fit.n_points}});
      }
    }
  }
  // collapse metric over the filling axis
  if (config.sweep_filling.size() >= 2) {
    summary["collapse"] = json::array();
    for (ModelKind kind : config.kinds) {
      std::vector<ObservableSeries> group;
      std::vector<double> factors;
      for (const auto& rec : records)
        if (rec.kind == kind) {
          group.push_back(rec.series);
          factors.push_back(static_cast<double>(rec.series.meta.n_occ) * rec.series.meta.v_avg);
        }
      if (group.size() >= 2)
        summary["collapse"].push_back(
            {{"kind", to_string(kind)}, {"metric", collapse_metric(group, factors)}});
    }
  }
  const auto file = std::filesystem::path(config.out_dir) / (config.prefix + "_summary.json");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write summary");
  out << summary.dump(2) << "\n";
  return file;
}

std::filesystem::path oracle_experiment(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  json report;
  report["version"] = kVersion;
  report["comparisons"] = json::array();

  if (config.oracle == OracleKind::Tms && config.tms_n > 0) {
    // analytic curves for explicit (N, V_avg), no lattice pipeline
    TmsPrediction tms{config.tms_n, config.tms_v_avg};
    const auto times = config.grid.resolve(double(config.tms_n) * config.tms_v_avg);
    ObservableSeries s;
    s.meta.exact = true;
    s.meta.label = "tms";
    s.meta.n_occ = static_cast<std::size_t>(config.tms_n);
    s.meta.v_avg = config.tms_v_avg;
    for (double t : times) {
      ObservablePoint p;
      p.t = t;
      p.tau = config.tms_n * config.tms_v_avg * t;
      p.n_pair = tms.n_pair(t);
      p.var_minus = tms.var_minus(t);
      p.var_plus = tms.var_plus(t);
      s.points.push_back(p);
    }
    const auto file = std::filesystem::path(config.out_dir) / (config.prefix + "_tms.csv");
    write_series_csv(file, s);
    return file;
  }

  for (ModelKind kind : config.kinds) {
    RunSpec spec = spec_for(config, kind, config.lattice.side, config.lattice.alpha,
                            config.lattice.a_z, config.lattice.filling);
    const ObservableSeries exact = oracle_series(spec, config.oracle);
    std::string suffix = std::string(to_string(kind)) + "_" + exact.meta.label;
    const auto ofile =
        std::filesystem::path(config.out_dir) / (config.prefix + "_oracle_" + suffix + ".csv");
    write_series_csv(ofile, exact);

    const ObservableSeries dtwa =
        disorder_average(spec, config.realizations, config.disorder_seed);
    const auto dfile = point_file(config, kind, config.lattice.side, config.lattice.alpha,
                                  config.lattice.a_z, config.lattice.filling);
    write_series_csv(dfile, dtwa);

    // max relative deviation of Var- up to the exact minimum
    const MinVariance mv = min_variance(exact);
    double max_dev = 0;
    double at_tau = 0;
    for (std::size_t k = 0; k <= mv.index && k < dtwa.points.size(); ++k) {
      const double dev =
          std::abs(dtwa.points[k].var_minus / exact.points[k].var_minus - 1.0);
      if (dev > max_dev) {
        max_dev = dev;
        at_tau = exact.points[k].tau;
      }
    }
    report["comparisons"].push_back({{"kind", to_string(kind)},
                                     {"oracle", exact.meta.label},
                                     {"oracle_file", ofile.filename().string()},
                                     {"dtwa_file", dfile.filename().string()},
                                     {"max_rel_dev_var_minus", max_dev},
                                     {"at_tau", at_tau},
                                     {"tau_min", mv.tau}});
  }
  const auto file = std::filesystem::path(config.out_dir) / (config.prefix + "_oracle_report.json");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write oracle report");
  out << report.dump(2) << "\n";
  return file;
}

std::string fit_summary(const std::filesystem::path& summary_file) {
  std::ifstream in(summary_file);
  if (!in) throw IoError("cannot read summary " + summary_file.string());
  json summary;
  try {
    in >> summary;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad summary json: ") + e.what());
  }
  std::map<std::string, std::vector<ScalingPoint>> groups;
  for (const auto& p : summary.at("points")) {
    if (p.value("boundary", false)) continue;
    groups[p.at("kind").get<std::string>()].push_back(
        {p.at("N_occ").get<double>(), p.at("var_min").get<double>()});
  }
  json out = json::array();
  for (const auto& [kind, pts] : groups) {
    if (pts.size() < 3) continue;
    const ScalingFit fit = scaling_fit(pts);
    out.push_back({{"kind", kind}, {"nu", fit.nu}, {"nu_err", fit.nu_err},
                   {"intercept", fit.intercept}, {"points", fit.n_points}});
  }
  return out.dump(2);
}

}  // namespace bilayer
