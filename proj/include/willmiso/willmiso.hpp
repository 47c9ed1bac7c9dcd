#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "willmiso/analysis.hpp"
#include "willmiso/corpus.hpp"
#include "willmiso/errors.hpp"
#include "willmiso/extension.hpp"
#include "willmiso/functionals.hpp"
#include "willmiso/generators.hpp"
#include "willmiso/intersect.hpp"
#include "willmiso/mesh.hpp"
#include "willmiso/mesh_io.hpp"
#include "willmiso/optimizer.hpp"
#include "willmiso/variation.hpp"

namespace willmiso {

inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// "# willmiso <version> config_hash=<hex>" followed by the resolved config
/// on one "# config ..." line (newlines become ';').
inline std::string csv_provenance(const std::string& resolved_config) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(resolved_config)));
  std::string flat = resolved_config;
  while (!flat.empty() && flat.back() == '\n') flat.pop_back();
  for (char& c : flat) {
    if (c == '\n') c = ';';
  }
  return "# willmiso " + std::string(kVersion) + " config_hash=" + buf + "\n# config " + flat + "\n";
}

}  // namespace willmiso
