#pragma once

// OBJ read/write and binary little-endian PLY output.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "willmiso/mesh.hpp"

namespace willmiso {

/// Reads `v` and `f` records; polygons are fan-triangulated, texture and
/// normal indices ignored, negative (relative) indices supported.
inline TriMesh read_obj_stream(std::istream& in, const std::string& name = "<stream>") {
  TriMesh m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        throw Error(ErrorKind::Io, name + ":" + std::to_string(lineno) + ": malformed vertex");
      }
      m.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        int idx = 0;
        try {
          idx = std::stoi(tok.substr(0, slash));
        } catch (const std::logic_error&) {
          throw Error(ErrorKind::Io, name + ":" + std::to_string(lineno) + ": malformed face index");
        }
        idx = idx < 0 ? static_cast<int>(m.vertices.size()) + idx : idx - 1;
        poly.push_back(idx);
      }
      if (poly.size() < 3) throw Error(ErrorKind::Io, name + ":" + std::to_string(lineno) + ": face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) m.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  for (const Face& f : m.faces) {
    for (int v : f) {
      if (v < 0 || v >= static_cast<int>(m.vertices.size())) {
        throw Error(ErrorKind::Io, name + ": face index out of range");
      }
    }
  }
  return m;
}

inline TriMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_obj_stream(in, path);
}

inline void write_obj_stream(std::ostream& out, const TriMesh& m, const std::string& comment = "") {
  if (!comment.empty()) out << "# " << comment << "\n";
  char buf[128];
  for (const Vec3& p : m.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  for (const Face& f : m.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void write_obj(const std::string& path, const TriMesh& m, const std::string& comment = "") {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_obj_stream(out, m, comment);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

}  // namespace detail

inline void write_ply(const std::string& path, const TriMesh& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << m.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << m.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& p : m.vertices) {
    for (int d = 0; d < 3; ++d) detail::put_le<double>(out, p[d]);
  }
  for (const Face& f : m.faces) {
    detail::put_le<std::uint8_t>(out, 3);
    for (int v : f) detail::put_le<std::int32_t>(out, v);
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace willmiso
