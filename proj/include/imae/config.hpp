#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace imae {

/// Flat `key = value` text with `[section]` headers and `#` comments.
///
/// Every lookup marks the key as used; `reject_unused()` then turns typos
/// and unknown keys into errors instead of silently ignoring them.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Adds or replaces `section.key`. Used for command-line overrides.
  void set(const std::string& section, const std::string& key, std::string value);
  /// Parses "section.key=value" (command-line override syntax).
  void set_override(std::string_view assignment);

  bool has(const std::string& section, const std::string& key) const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, std::string fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  /// Throws ConfigError naming every key that was never looked up.
  void reject_unused() const;

  const std::string& source() const { return source_; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> values_;
  mutable std::set<std::pair<std::string, std::string>> used_;
  std::string source_;
};

/// Ordered writer for the same format.
class ConfigWriter {
 public:
  ConfigWriter& section(const std::string& name);
  ConfigWriter& put(const std::string& key, const std::string& value);
  ConfigWriter& put(const std::string& key, double value);
  ConfigWriter& put(const std::string& key, std::int64_t value);
  ConfigWriter& put(const std::string& key, std::uint64_t value);
  ConfigWriter& put(const std::string& key, bool value);
  ConfigWriter& put(const std::string& key, int value) { return put(key, static_cast<std::int64_t>(value)); }
  ConfigWriter& put(const std::string& key, const char* value) { return put(key, std::string(value)); }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace imae
