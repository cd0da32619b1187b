#pragma once

#include "foliated/clifford.hpp"
#include "foliated/flow.hpp"
#include "foliated/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace foliated {

using nlohmann::json;

json to_json(const WeightedDomain& domain);
/// Parses and validates; throws Io on malformed JSON, the validation error otherwise.
WeightedDomain domain_from_json(const json& j);

json to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const json& j);

json to_json(const SolutionRecord& record);
SolutionRecord record_from_json(const json& j);
SignClass sign_class_from_string(const std::string& s);

json to_json(const CliffordSystem& system);
json to_json(const Check& check);

/// Everything a later verify run needs: the domain, the coefficients and the records.
struct SolutionSet {
  std::string preset;  // empty for user-supplied domains
  json coefficients = json::object();
  WeightedDomain domain;
  ProblemSpec spec;
  std::vector<SolutionRecord> records;
};

json to_json(const SolutionSet& set);
SolutionSet solution_set_from_json(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// One row per record, sorted by energy.
void write_summary_csv(const std::filesystem::path& path, const std::vector<SolutionRecord>& records);

/// Whitespace-separated columns t u(t) w(t).
void write_plot_data(const std::filesystem::path& path, const WeightedDomain& domain, const Field& u);

}  // namespace foliated
