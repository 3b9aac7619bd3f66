#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace stableforms {

/// Deterministic JSON text: keys sorted, floats with 17 significant digits,
/// two-space indentation. Non-finite floats become null.
inline void dump_json(const nlohmann::json& j, std::string& out, int indent = 0) {
  auto pad = [&](int n) { out.append(static_cast<std::size_t>(n), ' '); };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        pad(indent + 2);
        out += nlohmann::json(it.key()).dump(-1, ' ', false);
        out += ": ";
        dump_json(it.value(), out, indent + 2);
      }
      out += "\n";
      pad(indent);
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        pad(indent + 2);
        dump_json(j[i], out, indent + 2);
      }
      out += "\n";
      pad(indent);
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump(-1, ' ', false);
  }
}

inline std::string dump_json(const nlohmann::json& j) {
  std::string out;
  dump_json(j, out);
  out += "\n";
  return out;
}

}  // namespace stableforms
