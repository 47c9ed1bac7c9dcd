#pragma once

// Ten small genus-0 meshes of varied shape and quality, used by property
// checks that must hold on every closed surface.

#include <cmath>
#include <string>
#include <vector>

#include "willmiso/generators.hpp"
#include "willmiso/mesh.hpp"

namespace willmiso {

struct NamedMesh {
  std::string name;
  TriMesh mesh;
};

inline std::vector<NamedMesh> genus0_corpus() {
  std::vector<NamedMesh> out;
  out.push_back({"icosphere_l2", icosphere(1.0, 2)});
  out.push_back({"icosphere_l3", icosphere(1.0, 3)});
  out.push_back({"icosphere_l4_shifted", translated(icosphere(0.5, 4), Vec3(0.3, -1.2, 2.0))});
  out.push_back({"cube_sub3", subdivide(subdivide(subdivide(unit_cube())))});

  TriMesh ell = icosphere(1.0, 3);
  for (Vec3& p : ell.vertices) p = Vec3(p.x(), 0.7 * p.y(), 0.4 * p.z());
  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(0.7, Vec3::UnitX()) * Eigen::AngleAxisd(-0.4, Vec3(1.0, 1.0, 0.0).normalized()))
          .toRotationMatrix();
  out.push_back({"ellipsoid_rotated", transformed(ell, rot, Vec3(-0.5, 0.25, 0.0))});

  TriMesh bumpy = icosphere(1.0, 4);
  for (Vec3& p : bumpy.vertices) {
    const double th = std::acos(std::clamp(p.z(), -1.0, 1.0));
    const double ph = std::atan2(p.y(), p.x());
    p *= 1.0 + 0.12 * std::sin(3.0 * th) * std::cos(2.0 * ph);
  }
  out.push_back({"bumpy_sphere", bumpy});

  out.push_back({"prolate_0.9", prolate_mesh(0.9, 2000)});
  out.push_back({"dumbbell_0.7", dumbbell_mesh(0.7, 2000)});
  out.push_back({"stomatocyte_0.6", stomatocyte_mesh(0.6, 3000)});

  CatenoidParams cp;
  cp.a = 0.3;
  cp.s_max = 2.4;
  cp.n_s = 64;
  cp.n_theta = 32;
  out.push_back({"inverted_catenoid_0.3", inverted_catenoid_mesh(cp)});
  return out;
}

}  // namespace willmiso
