#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace wsfe {

/// Plain-text `key=value` record, one pair per line, keys sorted. Used for
/// artifact sidecars and pipeline configuration files. Blank lines and
/// lines starting with '#' are ignored on read.
class Metadata {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, std::uint64_t value);
  /// Printed with 17 significant digits so doubles round-trip exactly.
  void set_real(std::string key, double value);

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  std::uint64_t require_uint(std::string_view key) const;
  double require_real(std::string_view key) const;

  /// Copies every entry of `other` under `prefix`.
  void merge(const Metadata& other, std::string_view prefix = {});

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  static Metadata read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Metadata load(const std::filesystem::path& path);

  friend bool operator==(const Metadata&, const Metadata&) = default;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// `<artifact>.meta`
std::filesystem::path sidecar_path(const std::filesystem::path& artifact);

std::uint64_t parse_uint(std::string_view s, std::string_view what);
double parse_real(std::string_view s, std::string_view what);
std::string format_real(double v);

}  // namespace wsfe
