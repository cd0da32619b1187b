#include <doctest.h>

#include "foliated/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace foliated;
namespace fs = std::filesystem;

namespace {

Coefficient constant(double v) {
  return [v](double) { return v; };
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("foliated_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("domain round trip") {
  const WeightedDomain d = make_preset("okon-sphere(2,2)", 64);
  const WeightedDomain e = domain_from_json(json::parse(to_json(d).dump()));
  CHECK(e.nodes == d.nodes);
  CHECK(e.weights == d.weights);
  CHECK(e.lower == d.lower);
  CHECK(e.upper == d.upper);
  CHECK(e.left == d.left);
  CHECK(e.right == d.right);
  CHECK(e.periodic() == d.periodic());
  CHECK(e.volume == d.volume);

  json broken = to_json(d);
  broken["weights"][3] = -1.0;
  CHECK(kind_of([&] { domain_from_json(broken); }) == ErrorKind::InvalidArgument);
  json missing = to_json(d);
  missing.erase("nodes");
  CHECK(kind_of([&] { domain_from_json(missing); }) == ErrorKind::Io);
}

TEST_CASE("spec and record round trip") {
  const WeightedDomain d = make_preset("torus-factor", 128);
  const ProblemSpec spec = make_spec(d, [](double t) { return 2.0 + 0.5 * std::cos(t); }, constant(1.0), 3.5);
  const ProblemSpec back = spec_from_json(json::parse(to_json(spec).dump()));
  CHECK(back.b == spec.b);
  CHECK(back.c == spec.c);
  CHECK(back.p == spec.p);
  CHECK(back.theta == spec.theta);
  CHECK(back.mu == spec.mu);

  const Problem pr(d, spec);
  const SolutionRecord r = find_least_energy(pr, FlowConfig{});
  const SolutionRecord s = record_from_json(json::parse(to_json(r).dump()));
  CHECK(s.field == r.field);
  CHECK(s.energy == r.energy);
  CHECK(s.grad_norm == r.grad_norm);
  CHECK(s.nodal_count == r.nodal_count);
  CHECK(s.sign == r.sign);
  CHECK(s.converged == r.converged);
  CHECK(s.seed == r.seed);

  for (SignClass c : {SignClass::Positive, SignClass::Negative, SignClass::SignChanging, SignClass::Zero}) {
    SolutionRecord t = r;
    t.sign = c;
    CHECK(record_from_json(to_json(t)).sign == c);
  }
  CHECK(kind_of([] { sign_class_from_string("mixed"); }) == ErrorKind::Io);
}

TEST_CASE("solution set files") {
  const fs::path dir = scratch_dir("set");
  const WeightedDomain d = make_preset("suspension-sphere(2)", 128);
  const ProblemSpec spec = make_spec(d, constant(2.0), constant(1.0), 4.0);
  const Problem pr(d, spec);
  SolutionSet set{"suspension-sphere(2)", {{"b", 2.0}}, d, spec, find_sign_changing(pr, 2, FlowConfig{})};
  write_json(dir / "solutions.json", to_json(set));
  const SolutionSet back = solution_set_from_json(read_json(dir / "solutions.json"));
  CHECK(back.preset == set.preset);
  CHECK(back.coefficients == set.coefficients);
  REQUIRE(back.records.size() == set.records.size());
  for (std::size_t i = 0; i < set.records.size(); ++i) CHECK(back.records[i].field == set.records[i].field);
  // Serialization is a pure function of the data.
  write_json(dir / "again.json", to_json(back));
  std::ifstream a(dir / "solutions.json"), b(dir / "again.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());

  json wrong = to_json(set);
  wrong["records"][0]["field"].erase(0);
  CHECK(kind_of([&] { solution_set_from_json(wrong); }) == ErrorKind::DimensionMismatch);

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK(kind_of([&] { read_json(dir / "bad.json"); }) == ErrorKind::Io);
  CHECK(kind_of([&] { read_json(dir / "absent.json"); }) == ErrorKind::Io);
}

TEST_CASE("summary csv and plot data") {
  const fs::path dir = scratch_dir("csv");
  const WeightedDomain d = make_preset("okon-sphere(2,2)", 128);
  const Problem pr(d, make_spec(d, constant(1.0), constant(1.0), 4.0));
  std::vector<SolutionRecord> recs = find_sign_changing(pr, 3, FlowConfig{});
  std::reverse(recs.begin(), recs.end());
  write_summary_csv(dir / "summary.csv", recs);
  std::ifstream in(dir / "summary.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,seed,energy,nodal_count,sign,grad_norm,nehari_residual,strong_residual,converged");
  std::vector<double> energies;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    energies.push_back(std::stod(cell));
  }
  REQUIRE(energies.size() == recs.size());
  CHECK(std::is_sorted(energies.begin(), energies.end()));

  write_plot_data(dir / "u.dat", d, recs.front().field);
  std::ifstream plot(dir / "u.dat");
  int rows = 0;
  while (std::getline(plot, line))
    if (!line.empty() && line[0] != '#') {
      double t, u, w;
      std::stringstream(line) >> t >> u >> w;
      CHECK(t == doctest::Approx(d.nodes(rows)));
      CHECK(w == doctest::Approx(d.weights(rows)));
      ++rows;
    }
  CHECK(rows == d.size());
}

TEST_CASE("clifford systems and checks serialize") {
  const json s = to_json(build_clifford_system(2, 1));
  CHECK(s["q"] == 2);
  CHECK(s["matrices"].size() == 3);
  const json c = to_json(check_at_most("nehari", {{"record", 0}}, 1e-12, 1e-8));
  CHECK(c["check"] == "nehari");
  CHECK(c["pass"] == true);
  CHECK(c["inputs"]["record"] == 0);
}
