#include "json_util.hpp"

namespace catch919::detail {

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(what, std::string("malformed JSON: ") + e.what());
  }
}

ObjectReader::ObjectReader(const Json& j, std::string path) : obj_(j), path_(std::move(path)) {
  if (!j.is_object()) throw SchemaError(path_, "expected an object");
}

const Json& ObjectReader::get(const std::string& key) {
  auto it = obj_.find(key);
  if (it == obj_.end()) throw SchemaError(child(key), "missing field");
  seen_.insert(key);
  return *it;
}

double ObjectReader::number(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_number()) throw SchemaError(child(key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(child(key), "must be finite");
  return d;
}

double ObjectReader::number_or(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}

long long ObjectReader::integer(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_number_integer()) throw SchemaError(child(key), "expected an integer");
  return v.get<long long>();
}

bool ObjectReader::boolean(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_boolean()) throw SchemaError(child(key), "expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_string()) throw SchemaError(child(key), "expected a string");
  return v.get<std::string>();
}

const Json& ObjectReader::array(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_array()) throw SchemaError(child(key), "expected an array");
  return v;
}

const Json& ObjectReader::object(const std::string& key) {
  const Json& v = get(key);
  if (!v.is_object()) throw SchemaError(child(key), "expected an object");
  return v;
}

void ObjectReader::finish() const {
  for (auto it = obj_.begin(); it != obj_.end(); ++it) {
    if (!seen_.contains(it.key())) throw SchemaError(child(it.key()), "unknown key");
  }
}

}  // namespace catch919::detail
