#include "foliated/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>

namespace foliated {

namespace fs = std::filesystem;

Profile Profile::constant(double v) {
  Profile p;
  p.kind = "constant";
  p.value = v;
  return p;
}

Coefficient Profile::resolve(const Coefficient& preset_default) const {
  if (kind == "preset") return preset_default;
  if (kind == "constant") return [v = value](double) { return v; };
  if (kind == "cosine")
    return [m = mean, a = amplitude, f = frequency](double t) { return m + a * std::cos(f * t); };
  fail(ErrorKind::InvalidArgument, "unknown coefficient profile '" + kind + "'");
}

json to_json(const Profile& p) {
  if (p.kind == "constant") return p.value;
  if (p.kind == "cosine")
    return {{"profile", "cosine"}, {"mean", p.mean}, {"amplitude", p.amplitude}, {"frequency", p.frequency}};
  return p.kind;
}

Profile profile_from_json(const json& j) {
  if (j.is_number()) return Profile::constant(j.get<double>());
  if (j.is_string()) {
    Profile p;
    p.kind = j.get<std::string>();
    require(p.kind == "preset", ErrorKind::InvalidArgument, "unknown coefficient profile '" + p.kind + "'");
    return p;
  }
  require(j.is_object(), ErrorKind::InvalidArgument, "a coefficient is a number, \"preset\" or an object");
  Profile p;
  p.kind = j.value("profile", std::string());
  require(p.kind == "cosine" || p.kind == "constant", ErrorKind::InvalidArgument,
          "unknown coefficient profile '" + p.kind + "'");
  for (const auto& [key, _] : j.items())
    require(key == "profile" || key == "value" || key == "mean" || key == "amplitude" ||
                key == "frequency",
            ErrorKind::InvalidArgument, "unknown profile key '" + key + "'");
  p.value = j.value("value", 0.0);
  p.mean = j.value("mean", 0.0);
  p.amplitude = j.value("amplitude", 0.0);
  p.frequency = j.value("frequency", 1.0);
  return p;
}

void RunConfig::validate() const {
  if (domain_file.empty()) get_preset(preset);
  require(resolution >= 8, ErrorKind::InvalidArgument, "resolution must be at least 8");
  require(std::isfinite(p) && p > 2.0, ErrorKind::ParameterDomain, "need p > 2");
  require(k >= 1, ErrorKind::InvalidArgument, "k must be at least 1");
  require(!positive_only || k == 1, ErrorKind::InvalidArgument, "positive-only runs need k = 1");
  require(!out.empty(), ErrorKind::InvalidArgument, "output directory must be set");
  flow.validate();
  for (const auto& s : verify.suites)
    require(s == "projection" || s == "vetois" || s == "embedding" || s == "symmetric-criticality" ||
                s == "oracle",
            ErrorKind::InvalidArgument, "unknown verify suite '" + s + "'");
  require(verify.samples >= 1 && verify.embedding_samples >= 1, ErrorKind::InvalidArgument,
          "sample counts must be positive");
  require(clifford.bins >= 8 && clifford.samples >= clifford.bins, ErrorKind::InvalidArgument,
          "clifford sampling needs at least 8 bins and one sample per bin");
}

json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["domain_file"] = c.domain_file;
  j["resolution"] = c.resolution;
  j["p"] = c.p;
  j["b"] = to_json(c.b);
  j["c"] = to_json(c.c);
  j["theta"] = c.theta ? json(*c.theta) : json(nullptr);
  j["k"] = c.k;
  j["positive_only"] = c.positive_only;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["flow"] = {{"tol_grad", c.flow.tol_grad},   {"max_iters", c.flow.max_iters},
               {"restarts", c.flow.restarts},   {"alpha", c.flow.alpha},
               {"dedup_rel", c.flow.dedup_rel}, {"parallel", c.flow.parallel}};
  j["verify"] = {{"suites", c.verify.suites},
                 {"samples", c.verify.samples},
                 {"residual_tol", c.verify.residual_tol},
                 {"nehari_tol", c.verify.nehari_tol},
                 {"oracle_tol", c.verify.oracle_tol},
                 {"oracle_s_max", c.verify.oracle_s_max},
                 {"embedding_samples", c.verify.embedding_samples},
                 {"embedding_resolutions", c.verify.embedding_resolutions}};
  j["clifford"] = {{"q", c.clifford.q},
                   {"copies", c.clifford.copies},
                   {"bins", c.clifford.bins},
                   {"samples", c.clifford.samples}};
  return j;
}

namespace {

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  require(j.is_object(), ErrorKind::InvalidArgument, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
    require(known, ErrorKind::InvalidArgument, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    only_keys(j,
              {"preset", "domain_file", "resolution", "p", "b", "c", "theta", "k", "positive_only",
               "out", "seed", "flow", "verify", "clifford"},
              "config");
    read(j, "preset", c.preset);
    read(j, "domain_file", c.domain_file);
    read(j, "resolution", c.resolution);
    read(j, "p", c.p);
    if (j.contains("b")) c.b = profile_from_json(j.at("b"));
    if (j.contains("c")) c.c = profile_from_json(j.at("c"));
    if (j.contains("theta") && !j.at("theta").is_null()) c.theta = j.at("theta").get<double>();
    read(j, "k", c.k);
    read(j, "positive_only", c.positive_only);
    read(j, "out", c.out);
    read(j, "seed", c.seed);
    if (j.contains("flow")) {
      const json& f = j.at("flow");
      only_keys(f, {"tol_grad", "max_iters", "restarts", "alpha", "dedup_rel", "parallel"}, "flow");
      read(f, "tol_grad", c.flow.tol_grad);
      read(f, "max_iters", c.flow.max_iters);
      read(f, "restarts", c.flow.restarts);
      read(f, "alpha", c.flow.alpha);
      read(f, "dedup_rel", c.flow.dedup_rel);
      read(f, "parallel", c.flow.parallel);
    }
    if (j.contains("verify")) {
      const json& v = j.at("verify");
      only_keys(v,
                {"suites", "samples", "residual_tol", "nehari_tol", "oracle_tol", "oracle_s_max",
                 "embedding_samples", "embedding_resolutions"},
                "verify");
      read(v, "suites", c.verify.suites);
      read(v, "samples", c.verify.samples);
      read(v, "residual_tol", c.verify.residual_tol);
      read(v, "nehari_tol", c.verify.nehari_tol);
      read(v, "oracle_tol", c.verify.oracle_tol);
      read(v, "oracle_s_max", c.verify.oracle_s_max);
      read(v, "embedding_samples", c.verify.embedding_samples);
      read(v, "embedding_resolutions", c.verify.embedding_resolutions);
    }
    if (j.contains("clifford")) {
      const json& q = j.at("clifford");
      only_keys(q, {"q", "copies", "bins", "samples"}, "clifford");
      read(q, "q", c.clifford.q);
      read(q, "copies", c.clifford.copies);
      read(q, "bins", c.clifford.bins);
      read(q, "samples", c.clifford.samples);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

namespace {

bool is_config_error(ErrorKind kind) {
  return kind != ErrorKind::NonConvergence && kind != ErrorKind::LineSearch;
}

struct Setup {
  std::optional<FoliationPreset> preset;
  WeightedDomain domain;
  Coefficient b;
  Coefficient c;
};

Setup make_setup(const RunConfig& config) {
  Setup s;
  Coefficient b0 = [](double) { return 2.0; };
  Coefficient c0 = [](double) { return 1.0; };
  if (config.domain_file.empty()) {
    s.preset = get_preset(config.preset);
    s.domain = discretize(*s.preset, config.resolution);
    b0 = s.preset->b;
    c0 = s.preset->c;
  } else {
    const json j = read_json(config.domain_file);
    s.domain = domain_from_json(j.contains("domain") ? j.at("domain") : j);
  }
  s.b = config.b.resolve(b0);
  s.c = config.c.resolve(c0);
  return s;
}

std::string preset_name(const RunConfig& config) {
  return config.domain_file.empty() ? get_preset(config.preset).id : std::string();
}

json coefficients_json(const RunConfig& config) {
  return {{"b", to_json(config.b)}, {"c", to_json(config.c)}};
}

std::vector<SolutionRecord> solve_records(const Problem& problem, const RunConfig& config) {
  FlowConfig flow = config.flow;
  flow.seed = config.seed;
  if (config.positive_only || config.k == 1) return {find_least_energy(problem, flow)};
  return find_sign_changing(problem, config.k, flow);
}

Check check_at_least(std::string name, json inputs, double value, double threshold) {
  Check c;
  c.check = std::move(name);
  c.inputs = std::move(inputs);
  c.inputs["relation"] = ">=";
  c.value = value;
  c.threshold = threshold;
  c.pass = value >= threshold;
  return c;
}

Field random_field(const WeightedDomain& d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Field u = Field::Constant(d.size(), normal(rng));
  const double L = d.length();
  for (int k = 1; k <= 6; ++k) {
    const double a = normal(rng) / k;
    const double phase = d.periodic() ? 2.0 * M_PI * std::uniform_real_distribution<double>()(rng) : 0.0;
    const double freq = (d.periodic() ? 2.0 : 1.0) * M_PI * k / L;
    u += a * ((freq * (d.nodes.array() - d.lower) + phase).cos()).matrix();
  }
  return u;
}

void suite_projection(const Problem& problem, const std::vector<SolutionRecord>& records,
                      const RunConfig& config, std::vector<Check>& checks) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Field& u = records[i].field;
    const json in = {{"record", i}, {"seed", records[i].seed}};
    checks.push_back(check_at_most("nehari-residual", in, std::abs(nehari_residual(problem, u)),
                                   config.verify.nehari_tol));
    checks.push_back(check_at_most("strong-residual", in, strong_residual(problem, u),
                                   config.verify.residual_tol));
  }
  std::seed_seq seq{config.seed, std::uint64_t{11}};
  std::mt19937_64 rng(seq);
  double worst = 0.0;
  for (int k = 0; k < config.verify.samples; ++k) {
    const Field u = random_field(problem.domain(), rng);
    worst = std::max(worst, std::abs(project_nehari(problem, u).nehari_residual));
  }
  checks.push_back(check_at_most("nehari-projection", {{"samples", config.verify.samples}}, worst, 1e-10));
}

void suite_vetois(const Problem& problem, const RunConfig& config, std::vector<Check>& checks) {
  const double theta = problem.theta();
  const double mu = problem.spec().mu;
  std::seed_seq seq{config.seed, std::uint64_t{13}};
  std::mt19937_64 rng(seq);
  double worst = 0.0;
  for (int k = 0; k < config.verify.samples; ++k) {
    const Field u = random_field(problem.domain(), rng);
    worst = std::max(worst, norm_theta(problem, apply_L(problem, u)) / norm_theta(problem, u));
  }
  const json in = {{"theta", theta}, {"mu", mu}, {"samples", config.verify.samples}};
  const double bound = (theta - mu) / (theta + mu);
  checks.push_back(check_at_most("vetois-bound", in, worst, bound * (1.0 + 1e-12)));
  // Coercivity with theta >= 1 gives (theta - mu) / theta; constants attain it when b is constant.
  checks.push_back(check_at_most("theta-contraction", in, worst, (theta - mu) / theta * (1.0 + 1e-12)));
}

void suite_embedding(const FoliationPreset& preset, const RunConfig& config, double p,
                     std::vector<Check>& checks) {
  const int d = preset.ambient_dim - preset.kappa;
  const double exponent = transverse_exponent(2.0, d);
  const EmbeddingTable table = embedding_ratio(preset, p, config.verify.embedding_samples,
                                               config.verify.embedding_resolutions, config.seed);
  json in = {{"preset", preset.id}, {"p", p}, {"samples", config.verify.embedding_samples}};
  in["exponent"] = std::isfinite(exponent) ? json(exponent) : json("infinite");
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back({{"resolution", r.resolution}, {"ratio", r.ratio}});
  in["rows"] = rows;
  if (table.unbounded_trend) in["flag"] = "unbounded-trend";
  Check c = check_at_most("embedding-drift", in, table.drift, 0.05);
  if (p > exponent) {
    c.inputs["informational"] = true;
    c.pass = true;
  }
  checks.push_back(c);
}

void suite_symmetric_criticality(const std::string& preset_id, const WeightedDomain& domain,
                                 const ProblemSpec& spec, const std::vector<SolutionRecord>& records,
                                 const RunConfig& config, std::vector<Check>& checks) {
  std::function<AmbientGrid(int)> grid;
  if (preset_id == "torus-factor") grid = [](int n) { return torus_grid(n); };
  else if (preset_id == "suspension-sphere(2)") grid = [](int n) { return sphere_grid(n, 2 * n); };
  else return;
  const auto best = std::min_element(records.begin(), records.end(),
                                     [](const auto& a, const auto& b) { return a.energy < b.energy; });
  if (best == records.end()) return;
  const std::vector<int> levels{32, 64, 128};
  std::vector<double> values;
  for (int n : levels)
    values.push_back(symmetric_criticality_check(domain, spec, best->field, grid(n), config.verify.samples,
                                                 config.seed));
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) rate = std::min(rate, values[i - 1] / values[i]);
  const json in = {{"preset", preset_id}, {"record", best - records.begin()}, {"levels", levels},
                   {"values", values}};
  // An exactly invariant solution (a constant) has no discretization error left to converge.
  if (values.front() <= 1e-9)
    checks.push_back(check_at_most("symmetric-criticality-exact", in, values.back(), 1e-9));
  else
    checks.push_back(check_at_least("symmetric-criticality-rate", in, rate, 3.5));
  // A non-critical invariant field for contrast.
  const double mid = 0.5 * (domain.lower + domain.upper);
  const double width = 0.1 * domain.length();
  const Field bump = domain.nodes.unaryExpr(
      [&](double t) { return std::exp(-(t - mid) * (t - mid) / (2 * width * width)); });
  const double contrast =
      symmetric_criticality_check(domain, spec, bump, grid(levels.back()), config.verify.samples, config.seed) /
      values.back();
  checks.push_back(check_at_least("symmetric-criticality-contrast", in, contrast, 100.0));
}

void suite_oracle(const FoliationPreset& preset, const Coefficient& b, const Coefficient& c,
                  const WeightedDomain& domain, double p, const std::vector<SolutionRecord>& records,
                  const RunConfig& config, std::vector<Check>& checks) {
  ShootingOptions options;
  options.s_min = 0.01;
  options.s_max = config.verify.oracle_s_max;
  options.scan = 600;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    // No bracket keeps the largest finite double so the report stays valid JSON.
    double best = std::numeric_limits<double>::max();
    json inputs = {{"record", i}, {"seed", r.seed}, {"nodal_count", r.nodal_count}, {"s_max", options.s_max}};
    try {
      for (const auto& sol : shooting_oracle(preset, b, c, p, r.nodal_count, options))
        best = std::min(best, oracle_distance(domain, r.field, sol));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      inputs["oracle_error"] = e.what();
    }
    checks.push_back(check_at_most("oracle-distance", inputs, best, config.verify.oracle_tol));
  }
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const Setup setup = make_setup(config);
    const ProblemSpec spec = make_spec(setup.domain, setup.b, setup.c, config.p, config.theta);
    validate(spec, setup.domain);
    const int m = setup.domain.ambient_dim;
    if (m > 2 && config.p >= 2.0 * m / (m - 2) * (1.0 - 1e-12))
      log << "warning: p = " << config.p << " is at or above the ambient critical exponent " << 2.0 * m / (m - 2)
          << "; convergence relies on foliated compactness and is only observed, not guaranteed\n";
    const Problem problem(setup.domain, spec);
    const std::vector<SolutionRecord> records = solve_records(problem, config);

    const fs::path out(config.out);
    fs::create_directories(out / "plot");
    SolutionSet set{preset_name(config), coefficients_json(config), setup.domain, spec, records};
    json solutions = to_json(set);
    double tau = std::numeric_limits<double>::infinity();
    for (const auto& r : records)
      if (r.sign == SignClass::Positive || r.sign == SignClass::Negative) tau = std::min(tau, r.energy);
    if (std::isfinite(tau)) solutions["tau"] = tau;
    write_json(out / "solutions.json", solutions);
    write_json(out / "config.json", to_json(config));
    write_summary_csv(out / "summary.csv", records);
    for (std::size_t i = 0; i < records.size(); ++i)
      write_plot_data(out / "plot" / ("solution_" + std::to_string(i) + ".dat"), setup.domain,
                      records[i].field);

    const auto converged = std::count_if(records.begin(), records.end(),
                                         [](const auto& r) { return r.converged; });
    log << "solve: " << records.size() << " record(s), " << converged << " converged";
    if (std::isfinite(tau)) log << ", tau = " << tau;
    log << '\n';
    if (converged < config.k) {
      log << "convergence shortfall: " << converged << " of " << config.k << " requested records\n";
      return ConvergenceShortfall;
    }
    return Ok;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return is_config_error(e.kind()) ? ConfigError : ConvergenceShortfall;
  }
}

int cmd_verify(const RunConfig& config, const std::string& solutions, std::ostream& log) {
  try {
    config.validate();
    SolutionSet set;
    Coefficient b, c;
    std::optional<FoliationPreset> preset;
    if (!solutions.empty()) {
      set = solution_set_from_json(read_json(solutions));
      RunConfig replay = config;
      if (set.coefficients.contains("b")) replay.b = profile_from_json(set.coefficients.at("b"));
      if (set.coefficients.contains("c")) replay.c = profile_from_json(set.coefficients.at("c"));
      Coefficient b0 = [](double) { return 2.0; };
      Coefficient c0 = [](double) { return 1.0; };
      if (!set.preset.empty()) {
        preset = get_preset(set.preset);
        b0 = preset->b;
        c0 = preset->c;
      }
      b = replay.b.resolve(b0);
      c = replay.c.resolve(c0);
    } else {
      const Setup setup = make_setup(config);
      preset = setup.preset;
      b = setup.b;
      c = setup.c;
      set.preset = preset_name(config);
      set.domain = setup.domain;
      set.spec = make_spec(setup.domain, b, c, config.p, config.theta);
      validate(set.spec, set.domain);
      set.records = solve_records(Problem(set.domain, set.spec), config);
    }
    const Problem problem(set.domain, set.spec);
    const std::set<std::string> suites(config.verify.suites.begin(), config.verify.suites.end());
    std::vector<Check> checks;
    if (suites.count("projection")) suite_projection(problem, set.records, config, checks);
    if (suites.count("vetois")) suite_vetois(problem, config, checks);
    if (suites.count("embedding") && preset) suite_embedding(*preset, config, set.spec.p, checks);
    if (suites.count("symmetric-criticality"))
      suite_symmetric_criticality(set.preset, set.domain, set.spec, set.records, config, checks);
    if (suites.count("oracle") && preset)
      suite_oracle(*preset, b, c, set.domain, set.spec.p, set.records, config, checks);

    json report = json::array();
    std::vector<std::string> failed;
    for (const auto& ch : checks) {
      report.push_back(to_json(ch));
      if (!ch.pass) failed.push_back(ch.check + " " + ch.inputs.dump());
    }
    fs::create_directories(config.out);
    write_json(fs::path(config.out) / "report.json",
               {{"checks", report}, {"pass", failed.empty()}, {"preset", set.preset}});
    log << "verify: " << checks.size() - failed.size() << " of " << checks.size() << " checks passed\n";
    if (failed.empty()) return Ok;
    for (const auto& f : failed) log << "failed: " << f << '\n';
    return VerificationFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return is_config_error(e.kind()) ? ConfigError : ConvergenceShortfall;
  }
}

int cmd_clifford(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const CliffordConfig& cc = config.clifford;
    const CliffordSystem system = build_clifford_system(cc.q, cc.copies);
    require(!is_degenerate(system), ErrorKind::Degenerate,
            "degenerate foliation: q = " + std::to_string(cc.q) + ", copies = " +
                std::to_string(cc.copies) + " makes f o pi_rho constant");

    std::vector<Check> checks;
    const json in = {{"q", cc.q}, {"copies", cc.copies}, {"n", system.n}};
    checks.push_back(check_at_most("anticommutation", in, anticommutation_defect(system), 0.0));
    const Eigen::MatrixXd gram = trace_gram(system);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    checks.push_back(check_at_most("trace-gram", in, (gram - id).cwiseAbs().maxCoeff(), 1e-12));
    std::seed_seq seq{config.seed, std::uint64_t{17}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    double norm_excess = 0.0;
    double range_excess = 0.0;
    const int vectors = 10000;
    for (int k = 0; k < vectors; ++k) {
      Eigen::VectorXd x(system.n);
      for (auto& v : x) v = normal(rng);
      x.normalize();
      norm_excess = std::max(norm_excess, pi_rho(system, x).norm() - 1.0);
      range_excess = std::max(range_excess, std::abs(fkm_value(system, x)) - 1.0);
    }
    checks.push_back(check_at_most("pi-rho-norm", {{"q", cc.q}, {"copies", cc.copies}, {"vectors", vectors}},
                                   norm_excess, 1e-12));
    checks.push_back(check_at_most("fkm-range", {{"q", cc.q}, {"copies", cc.copies}, {"vectors", vectors}},
                                   range_excess, 1e-12));

    const WeightedDomain domain = fkm_quotient_domain(system, cc.bins, cc.samples, config.seed);
    const fs::path out(config.out);
    fs::create_directories(out);
    write_json(out / "system.json", to_json(system));
    write_json(out / "domain.json", to_json(domain));
    json report = json::array();
    bool pass = true;
    for (const auto& ch : checks) {
      report.push_back(to_json(ch));
      pass = pass && ch.pass;
    }
    write_json(out / "relations.json", {{"checks", report}, {"pass", pass}});
    log << "clifford: q = " << cc.q << ", copies = " << cc.copies << ", n = " << system.n
        << ", relations " << (pass ? "pass" : "FAIL") << '\n';
    return pass ? Ok : VerificationFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return is_config_error(e.kind()) ? ConfigError : ConvergenceShortfall;
  }
}

void cmd_presets(std::ostream& out) {
  for (const auto& id : preset_ids()) {
    if (id == "custom") {
      out << "custom  (user domain via --domain-file)\n";
      continue;
    }
    const FoliationPreset p = get_preset(id);
    out << p.id << "  " << p.construction << "  m = " << p.ambient_dim << "  kappa = " << p.kappa
        << "  [" << p.lower << ", " << p.upper << "]  " << to_string(p.left) << "/" << to_string(p.right)
        << "  vol = " << p.volume << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Foliation-invariant solutions of Yamabe-type equations on 1-D leaf spaces"};
  app.require_subcommand(1);

  std::string config_file, domain_file, out_dir, preset, solutions;
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution, k, q, copies, bins;
  std::optional<double> p, b, c;
  std::optional<std::int64_t> samples;
  std::vector<std::string> suites;
  bool positive_only = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
  };
  auto problem = [&](CLI::App* sub) {
    sub->add_option("--preset", preset, "preset id (see `presets`)");
    sub->add_option("--domain-file", domain_file, "quotient domain JSON (replaces the preset)");
    sub->add_option("--resolution", resolution, "quotient nodes");
    sub->add_option("--p", p, "exponent p > 2");
    sub->add_option("--b", b, "constant b");
    sub->add_option("--c", c, "constant c");
    sub->add_option("--k", k, "number of records");
    sub->add_flag("--positive-only", positive_only, "least-energy positive record only");
  };
  CLI::App* solve = app.add_subcommand("solve", "find critical points and write artifacts");
  common(solve);
  problem(solve);
  CLI::App* verify = app.add_subcommand("verify", "run invariant suites and write report.json");
  common(verify);
  problem(verify);
  verify->add_option("--solutions", solutions, "solutions.json from a previous solve")->check(CLI::ExistingFile);
  verify->add_option("--suite", suites, "suite to run (repeatable)");
  CLI::App* clifford = app.add_subcommand("clifford", "build a Clifford system and its quotient domain");
  common(clifford);
  clifford->add_option("--q", q, "number of matrices minus one (1..5)");
  clifford->add_option("--copies", copies, "block-diagonal copies");
  clifford->add_option("--bins", bins, "histogram bins");
  clifford->add_option("--samples", samples, "Monte-Carlo samples");
  CLI::App* presets = app.add_subcommand("presets", "list the preset registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : ConfigError;
  }
  if (presets->parsed()) {
    cmd_presets(out);
    return Ok;
  }

  RunConfig config;
  try {
    if (!config_file.empty()) config = run_config_from_json(read_json(config_file));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ConfigError;
  }
  if (!preset.empty()) config.preset = preset;
  if (!domain_file.empty()) config.domain_file = domain_file;
  if (!out_dir.empty()) config.out = out_dir;
  if (seed) config.seed = *seed;
  if (resolution) config.resolution = *resolution;
  if (p) config.p = *p;
  if (b) config.b = Profile::constant(*b);
  if (c) config.c = Profile::constant(*c);
  if (k) config.k = *k;
  if (positive_only) config.positive_only = true;
  if (!suites.empty()) config.verify.suites = suites;
  if (q) config.clifford.q = *q;
  if (copies) config.clifford.copies = *copies;
  if (bins) config.clifford.bins = *bins;
  if (samples) config.clifford.samples = *samples;

  if (solve->parsed()) return cmd_solve(config, err);
  if (verify->parsed()) return cmd_verify(config, solutions, err);
  return cmd_clifford(config, err);
}

}  // namespace foliated
