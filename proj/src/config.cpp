#include "imae/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "imae/errors.hpp"

namespace imae {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (cfg.values_.contains({section, key})) {
      throw ConfigError(where + ": duplicate key " + qualified(section, key));
    }
    cfg.values_[{section, key}] = trim(std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void ConfigFile::set(const std::string& section, const std::string& key, std::string value) {
  values_[{section, key}] = std::move(value);
}

void ConfigFile::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "': expected section.key=value");
  const std::string lhs = trim(assignment.substr(0, eq));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos) throw ConfigError("override '" + std::string(assignment) + "': expected section.key=value");
  set(lhs.substr(0, dot), lhs.substr(dot + 1), trim(assignment.substr(eq + 1)));
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return values_.contains({section, key});
}

std::optional<std::string> ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto it = values_.find({section, key});
  if (it == values_.end()) return std::nullopt;
  used_.insert(it->first);
  return it->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   std::string fallback) const {
  auto v = get(section, key);
  return v ? *v : std::move(fallback);
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError(source_ + ": " + qualified(section, key) + " = '" + *v + "' is not a number");
  }
  return out;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError(source_ + ": " + qualified(section, key) + " = '" + *v + "' is not an integer");
  }
  return out;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError(source_ + ": " + qualified(section, key) + " = '" + *v + "' is not an unsigned integer");
  }
  return out;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(source_ + ": " + qualified(section, key) + " = '" + *v + "' is not a boolean");
}

void ConfigFile::reject_unused() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    if (used_.contains(k)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += qualified(k.first, k.second);
  }
  if (!unknown.empty()) throw ConfigError(source_ + ": unknown config keys: " + unknown);
}

ConfigWriter& ConfigWriter::section(const std::string& name) {
  if (!text_.empty()) text_ += "\n";
  text_ += "[" + name + "]\n";
  return *this;
}

ConfigWriter& ConfigWriter::put(const std::string& key, const std::string& value) {
  text_ += key + " = " + value + "\n";
  return *this;
}

ConfigWriter& ConfigWriter::put(const std::string& key, double value) { return put(key, format_double(value)); }
ConfigWriter& ConfigWriter::put(const std::string& key, std::int64_t value) { return put(key, std::to_string(value)); }
ConfigWriter& ConfigWriter::put(const std::string& key, std::uint64_t value) { return put(key, std::to_string(value)); }
ConfigWriter& ConfigWriter::put(const std::string& key, bool value) {
  return put(key, std::string(value ? "true" : "false"));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

}  // namespace imae
