#include "diracflow/cliutil.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "diracflow/diagnostics.hpp"

namespace diracflow {

namespace {

double as_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("config field '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> as_number_list(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw UsageError("config field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, key));
  return out;
}

std::vector<std::string> as_string_list(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw UsageError("config field '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) throw UsageError("config field '" + key + "' must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_observer_names() {
  static const std::vector<std::string> names = {"tr_M", "tr_b2", "spec_drift",
                                                 "str_U", "norm_d"};
  return names;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("config document must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "graph_path") {
      if (!value.is_string()) throw UsageError("config field 'graph_path' must be a string");
      c.graph_path = value.get<std::string>();
    } else if (key == "beta") {
      c.beta = as_number(value, key);
    } else if (key == "gamma") {
      c.gamma = as_number_list(value, key);
    } else if (key == "t_end") {
      c.t_end = as_number(value, key);
    } else if (key == "h") {
      c.h = as_number(value, key);
    } else if (key == "observers") {
      c.observers = as_string_list(value, key);
    } else if (key == "snapshot_every") {
      if (!value.is_number_integer()) throw UsageError("config field 'snapshot_every' must be an integer");
      c.snapshot_every = value.get<int>();
    } else if (key == "with_unitary") {
      if (!value.is_boolean()) throw UsageError("config field 'with_unitary' must be a boolean");
      c.with_unitary = value.get<bool>();
    } else if (key == "flow_poly") {
      c.flow_poly = as_number_list(value, key);
    } else if (key == "checks") {
      c.checks = as_string_list(value, key);
    } else if (key == "output_dir") {
      if (!value.is_string()) throw UsageError("config field 'output_dir' must be a string");
      c.output_dir = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer())
        throw UsageError("config field 'seed' must be a nonnegative integer");
      auto s = value.get<long long>();
      if (s < 0) throw UsageError("config field 'seed' must be a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(s);
    } else {
      throw UsageError("unknown config field '" + key + "'");
    }
  }
  validate_run_config(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

void validate_run_config(const RunConfig& c) {
  if (!(c.h > 0)) throw UsageError("step size h must be positive");
  if (c.t_end == 0) throw UsageError("t_end must be nonzero");
  if (c.snapshot_every < 1) throw UsageError("snapshot_every must be at least 1");
  if (c.flow_poly.empty()) throw UsageError("flow_poly needs at least one coefficient");
  for (double g : c.gamma)
    if (g == 0) throw UsageError("gamma couplings must be nonzero");
  const auto& known = known_check_names();
  for (const auto& name : c.checks) {
    if (name == "all") continue;
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw UsageError("unknown check name '" + name + "'");
  }
  const auto& obs = known_observer_names();
  for (const auto& name : c.observers) {
    if (std::find(obs.begin(), obs.end(), name) == obs.end())
      throw UsageError("unknown observer '" + name + "'");
  }
}

nlohmann::json run_config_json(const RunConfig& c) {
  nlohmann::json j;
  j["graph_path"] = c.graph_path;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["t_end"] = c.t_end;
  j["h"] = c.h;
  j["observers"] = c.observers;
  j["snapshot_every"] = c.snapshot_every;
  j["with_unitary"] = c.with_unitary;
  j["flow_poly"] = c.flow_poly;
  j["checks"] = c.checks;
  j["seed"] = c.seed;
  return j;
}

std::uint64_t config_hash(const nlohmann::json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash_line(const nlohmann::json& canonical) {
  return "# config-hash: " + hash_hex(config_hash(canonical)) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw UsageError("cannot read " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw UsageError("failed writing " + path);
}

std::string output_path(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  const std::string d = dir.empty() ? std::string(".") : dir;
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw UsageError("cannot create output directory " + d + ": " + ec.message());
  return (fs::path(d) / name).string();
}

int thread_budget() {
  if (const char* env = std::getenv("DIRACFLOW_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace diracflow
