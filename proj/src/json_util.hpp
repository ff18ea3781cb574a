#pragma once

#include <cmath>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "catch919/error.hpp"

namespace catch919::detail {

using Json = nlohmann::ordered_json;

Json parse_json(std::string_view text, const std::string& what);

// Strict field access on a JSON object: every read records the key, and
// finish() rejects anything that was not read.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return obj_.contains(key); }

  const Json& get(const std::string& key);
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  long long integer(const std::string& key);
  bool boolean(const std::string& key);
  std::string string(const std::string& key);
  const Json& array(const std::string& key);
  const Json& object(const std::string& key);

  std::string child(const std::string& key) const { return path_ + "." + key; }
  void finish() const;

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace catch919::detail
