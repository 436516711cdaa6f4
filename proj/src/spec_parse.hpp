// key=value specification strings shared by the kernel, weight and
// initial-data parsers: "family:key=val,key=val".
#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "wavekin/kernels.hpp"

namespace wavekin::detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void require_nonneg(double v, const char* field, std::size_t pos) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw SpecError(std::string("parameter '") + field + "' must be finite and >= 0, got " +
                        fmt_num(v),
                    field, pos);
  }
}

struct ParsedSpec {
  std::string family;
  // key -> (value, offset of the value in the input)
  std::map<std::string, std::pair<double, std::size_t>> params;
};

inline ParsedSpec split_spec(std::string_view s) {
  ParsedSpec out;
  const auto colon = s.find(':');
  out.family = std::string(s.substr(0, colon));
  if (out.family.empty()) throw SpecError("empty family name", "family", 0);
  if (colon == std::string_view::npos) return out;

  std::size_t pos = colon + 1;
  if (pos >= s.size()) throw SpecError("expected key=value after ':'", "params", pos);
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    const auto item = s.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw SpecError("expected key=value at position " + std::to_string(pos), "params", pos);
    }
    std::string key(item.substr(0, eq));
    const auto val = item.substr(eq + 1);
    const std::size_t vpos = pos + eq + 1;
    double v = 0.0;
    const auto* first = val.data();
    const auto* last = val.data() + val.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (val.empty() || ec != std::errc() || ptr != last) {
      throw SpecError("malformed number for '" + key + "' at position " + std::to_string(vpos),
                      key, vpos);
    }
    if (out.params.contains(key)) {
      throw SpecError("duplicate key '" + key + "' at position " + std::to_string(pos), key, pos);
    }
    out.params.emplace(key, std::make_pair(v, vpos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
    if (pos >= s.size()) throw SpecError("trailing ','", "params", pos);
  }
  return out;
}

inline double take(ParsedSpec& p, const std::string& key, std::size_t spec_len) {
  auto it = p.params.find(key);
  if (it == p.params.end()) {
    throw SpecError("missing parameter '" + key + "' for family '" + p.family + "'", key, spec_len);
  }
  const double v = it->second.first;
  require_nonneg(v, key.c_str(), it->second.second);
  p.params.erase(it);
  return v;
}

inline void reject_leftovers(const ParsedSpec& p) {
  if (p.params.empty()) return;
  const auto& [key, v] = *p.params.begin();
  throw SpecError("unknown parameter '" + key + "' for family '" + p.family + "' at position " +
                      std::to_string(v.second - key.size() - 1),
                  key, v.second - key.size() - 1);
}

}  // namespace wavekin::detail
