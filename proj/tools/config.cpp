#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mfca/error.hpp"
#include "mfca/wigner.hpp"

namespace mfca::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {"seed",   "n_frames",   "cos_threshold", "p_values",
                                     "k_max",  "knn_k",      "snr_values",    "image_size",
                                     "output_dir"};

[[noreturn]] void bad(const std::string& what) { throw InvalidArgument("config: " + what); }

double number(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key + " must be a number");
  return v.get<double>();
}

int count(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key + " must be an integer");
  const auto x = v.get<long long>();
  if (x < 0 || x > std::numeric_limits<int>::max()) bad(key + " out of range");
  return static_cast<int>(x);
}

std::vector<double> number_list(const json& v, const std::string& key, bool allow_inf) {
  if (!v.is_array()) bad(key + " must be an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (allow_inf && e.is_string() && e.get<std::string>() == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(number(e, key));
    }
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_frames < 3) bad("n_frames must be at least 3");
  if (!(cos_threshold > -1.0 && cos_threshold < 1.0)) bad("cos_threshold must lie in (-1, 1)");
  if (p_values.empty()) bad("p_values must not be empty");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) bad("p_values entries must lie in [0, 1]");
  }
  if (k_max < 1 || k_max > kMaxWignerWeight) bad("k_max must lie in [1, 64]");
  if (knn_k < 1 || knn_k >= n_frames) bad("knn_k must lie in [1, n_frames)");
  for (double s : snr_values) {
    if (!(s > 0.0)) bad("snr_values entries must be positive or \"inf\"");
  }
  if (image_size < 3 || image_size % 2 == 0) bad("image_size must be odd and at least 3");
  if (output_dir && output_dir->empty()) bad("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("top level must be an object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (kKeys.count(key) == 0) bad("unknown key '" + key + "'");
    if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
        bad("seed must be a non-negative integer");
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "n_frames") {
      c.n_frames = count(value, key);
    } else if (key == "cos_threshold") {
      c.cos_threshold = number(value, key);
    } else if (key == "p_values") {
      c.p_values = number_list(value, key, false);
    } else if (key == "k_max") {
      c.k_max = count(value, key);
    } else if (key == "knn_k") {
      c.knn_k = count(value, key);
    } else if (key == "snr_values") {
      c.snr_values = number_list(value, key, true);
    } else if (key == "image_size") {
      c.image_size = count(value, key);
    } else if (key == "output_dir") {
      if (!value.is_string()) bad("output_dir must be a string");
      c.output_dir = value.get<std::string>();
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const ExperimentConfig& c) {
  json snr = json::array();
  for (double s : c.snr_values) {
    if (std::isinf(s)) {
      snr.push_back("inf");
    } else {
      snr.push_back(s);
    }
  }
  return json{{"seed", c.seed},         {"n_frames", c.n_frames}, {"cos_threshold", c.cos_threshold},
              {"p_values", c.p_values}, {"k_max", c.k_max},       {"knn_k", c.knn_k},
              {"snr_values", snr},      {"image_size", c.image_size}};
}

std::string config_hash(const ExperimentConfig& c) { return fnv_hex(to_json(c).dump()); }

std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mfca::cli
