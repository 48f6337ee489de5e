#ifndef HYPERFIT_MESH_HPP
#define HYPERFIT_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hyperfit {

struct Mesh2D {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> elements;  // counterclockwise node triples
  std::map<std::string, std::vector<int>> sets;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_dofs() const { return 2 * num_nodes(); }
  const std::vector<int>& set(const std::string& name) const;
};

double element_area(const Mesh2D& mesh, int e);

// V - E + F over the triangulated surface (without the outer face); 1 for a
// disk, decreasing by 1 per hole.
int euler_characteristic(const Mesh2D& mesh);

// Structured triangulation of [0,w] x [0,h] with nx-by-ny cells, two
// triangles per cell.  Node sets "bottom" (y=0) and "top" (y=h).
Mesh2D make_plate(double w, double h, int nx, int ny);

struct Hole {
  double cx, cy, r;
};

// Same plate with elements inside the holes removed and nearby nodes snapped
// onto the hole boundaries.
Mesh2D make_plate_with_holes(double w, double h, int nx, int ny,
                             const std::vector<Hole>& holes);

void save_mesh(const Mesh2D& mesh, const std::filesystem::path& file);
Mesh2D load_mesh(const std::filesystem::path& file);

}  // namespace hyperfit

#endif
