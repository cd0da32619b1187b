#pragma once

#include "foliated/io.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace foliated {

/// A coefficient given as a constant, a named profile, or the preset default.
///  constant: value
///  cosine:   mean + amplitude cos(frequency t)
struct Profile {
  std::string kind = "preset";
  double value = 0.0;
  double mean = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;

  static Profile constant(double v);
  Coefficient resolve(const Coefficient& preset_default) const;
};

json to_json(const Profile& profile);
Profile profile_from_json(const json& j);

struct VerifyConfig {
  std::vector<std::string> suites{"projection", "vetois", "embedding", "symmetric-criticality", "oracle"};
  int samples = 20;
  double residual_tol = 1e-6;
  double nehari_tol = 1e-10;
  double oracle_tol = 1e-4;
  double oracle_s_max = 30.0;
  int embedding_samples = 100;
  std::vector<int> embedding_resolutions{256, 512, 1024};
};

struct CliffordConfig {
  int q = 1;
  int copies = 2;
  int bins = 200;
  std::int64_t samples = 1'000'000;
};

struct RunConfig {
  std::string preset = "suspension-sphere(2)";
  std::string domain_file;  // replaces the preset when set
  int resolution = 8192;
  double p = 4.0;
  Profile b;
  Profile c;
  std::optional<double> theta;
  int k = 1;
  bool positive_only = false;
  std::string out = "out";
  std::uint64_t seed = 1;
  FlowConfig flow;
  VerifyConfig verify;
  CliffordConfig clifford;

  /// Throws InvalidArgument / UnknownPreset on a config that cannot run.
  void validate() const;
};

json to_json(const RunConfig& config);
/// Unknown keys are rejected.
RunConfig run_config_from_json(const json& j);

enum ExitCode { Ok = 0, ConfigError = 2, ConvergenceShortfall = 3, VerificationFailure = 4 };

/// Writes solutions.json, summary.csv, config.json and plot/solution_<i>.dat under config.out.
int cmd_solve(const RunConfig& config, std::ostream& log);

/// Runs the selected suites on `solutions` (a solutions.json) or on a fresh
/// solve when empty; writes report.json under config.out.
int cmd_verify(const RunConfig& config, const std::string& solutions, std::ostream& log);

/// Writes system.json, domain.json and relations.json under config.out.
int cmd_clifford(const RunConfig& config, std::ostream& log);

void cmd_presets(std::ostream& out);

/// Entry point of the command-line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace foliated
