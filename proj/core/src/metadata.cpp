#include "wsfe/metadata.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wsfe/error.hpp"

namespace wsfe {

std::uint64_t parse_uint(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) {
    throw ParseError(std::string(what) + ": expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::string_view what) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) {
    throw ParseError(std::string(what) + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void Metadata::set(std::string key, std::string value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos) {
    throw Error("invalid metadata key '" + key + "'");
  }
  if (value.find('\n') != std::string::npos) throw Error("metadata value for '" + key + "' spans lines");
  entries_.insert_or_assign(std::move(key), std::move(value));
}

void Metadata::set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }

void Metadata::set_real(std::string key, double value) { set(std::move(key), format_real(value)); }

bool Metadata::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> Metadata::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Metadata::require(std::string_view key) const {
  auto v = get(key);
  if (!v) throw MetadataError("metadata is missing key '" + std::string(key) + "'");
  return *v;
}

std::uint64_t Metadata::require_uint(std::string_view key) const { return parse_uint(require(key), key); }

double Metadata::require_real(std::string_view key) const { return parse_real(require(key), key); }

void Metadata::merge(const Metadata& other, std::string_view prefix) {
  for (const auto& [k, v] : other.entries_) set(std::string(prefix) + k, v);
}

void Metadata::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

Metadata Metadata::read(std::istream& in) {
  Metadata m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("line " + std::to_string(line_no) + ": expected key=value");
    }
    m.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

void Metadata::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write(out);
}

Metadata Metadata::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetadataError("metadata not found: " + path.string());
  return read(in);
}

std::filesystem::path sidecar_path(const std::filesystem::path& artifact) {
  return std::filesystem::path(artifact.string() + ".meta");
}

}  // namespace wsfe
