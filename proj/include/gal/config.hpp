#ifndef GAL_CONFIG_HPP
#define GAL_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gal {

// Flat key = value configuration with [section] headers and # comments.
// Keys are addressed as "section.key".
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  uint64_t get_u64(const std::string& key, uint64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& dflt) const;
  std::vector<uint64_t> get_u64s(const std::string& key,
                                 const std::vector<uint64_t>& dflt) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace gal

#endif  // GAL_CONFIG_HPP
