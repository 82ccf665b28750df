#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diracflow/errors.hpp"
#include "json.hpp"

namespace diracflow {

// Everything a run needs, resolvable from a JSON document plus flag
// overrides. Field defaults are the CLI defaults.
struct RunConfig {
  std::string graph_path;
  double beta = 0.0;
  std::vector<double> gamma;               // empty = all couplings 1
  double t_end = 10.0;
  double h = 1e-3;
  std::vector<std::string> observers;      // empty = all standard series
  int snapshot_every = 10;
  bool with_unitary = true;
  std::vector<double> flow_poly{1.0};
  std::vector<std::string> checks{"all"};
  std::string output_dir = ".";
  std::uint64_t seed = 0;
};

// Observer series selectable in a config; str_U covers both the re and im
// columns of the written CSV.
const std::vector<std::string>& known_observer_names();

// Strict parse: unknown fields and wrong types are usage errors, as are
// h <= 0, t_end = 0, and unknown check or observer names.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
void validate_run_config(const RunConfig& c);

// Canonical serialization of a config. The hash covers every field except
// output_dir, so runs into different directories produce identical files.
nlohmann::json run_config_json(const RunConfig& c);
std::uint64_t config_hash(const nlohmann::json& canonical);
std::string hash_hex(std::uint64_t h);

// "# config-hash: <16 hex digits>\n" for the top of every output file.
std::string config_hash_line(const nlohmann::json& canonical);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Makes output_dir (and parents) and returns dir + "/" + name.
std::string output_path(const std::string& dir, const std::string& name);

// DIRACFLOW_THREADS when set and positive, otherwise hardware concurrency.
int thread_budget();

}  // namespace diracflow
