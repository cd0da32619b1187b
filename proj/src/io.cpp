#include "foliated/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace foliated {

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

json to_json(const WeightedDomain& d) {
  json j;
  j["name"] = d.name;
  j["lower"] = d.lower;
  j["upper"] = d.upper;
  j["left"] = to_string(d.left);
  j["right"] = to_string(d.right);
  j["quadrature"] = d.quadrature == Quadrature::Midpoint ? "midpoint" : "trapezoid";
  j["ambient_dim"] = d.ambient_dim;
  j["kappa"] = d.kappa;
  j["volume"] = d.volume;
  j["nodes"] = vector_json(d.nodes);
  j["weights"] = vector_json(d.weights);
  if (d.standard_error.size() > 0) j["standard_error"] = vector_json(d.standard_error);
  return j;
}

WeightedDomain domain_from_json(const json& j) {
  WeightedDomain d = guarded("domain", [&] {
    WeightedDomain d;
    d.name = j.value("name", std::string());
    d.lower = j.at("lower").get<double>();
    d.upper = j.at("upper").get<double>();
    d.left = endpoint_kind_from_string(j.at("left").get<std::string>());
    d.right = endpoint_kind_from_string(j.at("right").get<std::string>());
    const std::string q = j.value("quadrature", std::string("trapezoid"));
    require(q == "trapezoid" || q == "midpoint", ErrorKind::Io, "unknown quadrature '" + q + "'");
    d.quadrature = q == "midpoint" ? Quadrature::Midpoint : Quadrature::Trapezoid;
    d.ambient_dim = j.at("ambient_dim").get<int>();
    d.kappa = j.at("kappa").get<int>();
    d.volume = j.at("volume").get<double>();
    d.nodes = vector_from(j.at("nodes"));
    d.weights = vector_from(j.at("weights"));
    if (j.contains("standard_error")) d.standard_error = vector_from(j.at("standard_error"));
    return d;
  });
  d.validate();
  return d;
}

json to_json(const ProblemSpec& spec) {
  return {{"p", spec.p},
          {"theta", spec.theta},
          {"mu", spec.mu},
          {"b", vector_json(spec.b)},
          {"c", vector_json(spec.c)}};
}

ProblemSpec spec_from_json(const json& j) {
  return guarded("spec", [&] {
    ProblemSpec spec;
    spec.p = j.at("p").get<double>();
    spec.theta = j.at("theta").get<double>();
    spec.mu = j.at("mu").get<double>();
    spec.b = vector_from(j.at("b"));
    spec.c = vector_from(j.at("c"));
    return spec;
  });
}

SignClass sign_class_from_string(const std::string& s) {
  for (SignClass c : {SignClass::Positive, SignClass::Negative, SignClass::SignChanging, SignClass::Zero})
    if (s == to_string(c)) return c;
  fail(ErrorKind::Io, "unknown sign class '" + s + "'");
}

json to_json(const SolutionRecord& r) {
  json j;
  j["seed"] = r.seed;
  j["energy"] = r.energy;
  j["grad_norm"] = r.grad_norm;
  j["nehari_residual"] = r.nehari_residual;
  j["strong_residual"] = r.strong_residual;
  j["nodal_count"] = r.nodal_count;
  j["sign"] = to_string(r.sign);
  j["iters"] = r.iters;
  j["converged"] = r.converged;
  j["stop_reason"] = r.trace.stop_reason;
  j["field"] = vector_json(r.field);
  return j;
}

SolutionRecord record_from_json(const json& j) {
  return guarded("solution record", [&] {
    SolutionRecord r;
    r.seed = j.value("seed", std::string());
    r.energy = j.at("energy").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    r.nehari_residual = j.at("nehari_residual").get<double>();
    r.strong_residual = j.at("strong_residual").get<double>();
    r.nodal_count = j.at("nodal_count").get<int>();
    r.sign = sign_class_from_string(j.at("sign").get<std::string>());
    r.iters = j.value("iters", 0);
    r.converged = j.at("converged").get<bool>();
    r.trace.stop_reason = j.value("stop_reason", std::string());
    r.field = vector_from(j.at("field"));
    return r;
  });
}

json to_json(const CliffordSystem& system) {
  json mats = json::array();
  for (const auto& P : system.matrices) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      std::vector<int> row(P.cols());
      for (Eigen::Index k = 0; k < P.cols(); ++k) row[k] = P(i, k);
      rows.push_back(row);
    }
    mats.push_back(rows);
  }
  return {{"q", system.q}, {"copies", system.copies}, {"n", system.n}, {"matrices", mats}};
}

json to_json(const Check& check) {
  return {{"check", check.check},
          {"inputs", check.inputs},
          {"value", check.value},
          {"threshold", check.threshold},
          {"pass", check.pass}};
}

json to_json(const SolutionSet& set) {
  json records = json::array();
  for (const auto& r : set.records) records.push_back(to_json(r));
  return {{"preset", set.preset},
          {"coefficients", set.coefficients},
          {"domain", to_json(set.domain)},
          {"spec", to_json(set.spec)},
          {"records", records}};
}

SolutionSet solution_set_from_json(const json& j) {
  SolutionSet set;
  set.preset = j.value("preset", std::string());
  set.coefficients = j.value("coefficients", json::object());
  set.domain = domain_from_json(guarded("solutions", [&] { return j.at("domain"); }));
  set.spec = spec_from_json(guarded("solutions", [&] { return j.at("spec"); }));
  validate(set.spec, set.domain);
  for (const auto& r : guarded("solutions", [&] { return j.at("records"); })) {
    set.records.push_back(record_from_json(r));
    require(set.records.back().field.size() == set.domain.size(), ErrorKind::DimensionMismatch,
            "solution field does not match the domain");
  }
  return set;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SolutionRecord>& records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].energy < records[b].energy; });
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << "index,seed,energy,nodal_count,sign,grad_norm,nehari_residual,strong_residual,converged\n";
  out << std::setprecision(12);
  for (std::size_t i : order) {
    const auto& r = records[i];
    out << i << ',' << r.seed << ',' << r.energy << ',' << r.nodal_count << ',' << to_string(r.sign)
        << ',' << r.grad_norm << ',' << r.nehari_residual << ',' << r.strong_residual << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

void write_plot_data(const std::filesystem::path& path, const WeightedDomain& domain, const Field& u) {
  require(u.size() == domain.size(), ErrorKind::DimensionMismatch, "field does not match domain");
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << "# t u w\n" << std::setprecision(15);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out << domain.nodes(i) << ' ' << u(i) << ' ' << domain.weights(i) << '\n';
}

}  // namespace foliated
