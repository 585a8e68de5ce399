#include "gal/config.hpp"

#include <fstream>
#include <sstream>

#include "gal/common.hpp"

namespace gal {

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw input_error("config: malformed section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error("config: expected key = value at line " + std::to_string(lineno));
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    if (key.empty()) throw input_error("config: empty key at line " + std::to_string(lineno));
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw input_error("config: bad number for " + key);
  }
}

int Config::get_int(const std::string& key, int dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw input_error("config: bad integer for " + key);
  }
}

uint64_t Config::get_u64(const std::string& key, uint64_t dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw input_error("config: bad integer for " + key);
  }
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw input_error("config: bad boolean for " + key);
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::istringstream is(it->second);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (out.empty()) throw input_error("config: empty list for " + key);
  return out;
}

std::vector<uint64_t> Config::get_u64s(const std::string& key,
                                       const std::vector<uint64_t>& dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::istringstream is(it->second);
  std::vector<uint64_t> out;
  uint64_t v;
  while (is >> v) out.push_back(v);
  if (out.empty()) throw input_error("config: empty list for " + key);
  return out;
}

}  // namespace gal
