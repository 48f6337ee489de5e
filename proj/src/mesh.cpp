#include "hyperfit/mesh.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace hyperfit {

const std::vector<int>& Mesh2D::set(const std::string& name) const {
  const auto it = sets.find(name);
  if (it == sets.end()) throw std::out_of_range("no node set named " + name);
  return it->second;
}

double element_area(const Mesh2D& mesh, int e) {
  const auto& el = mesh.elements[e];
  const Eigen::Vector2d a = mesh.nodes[el[0]], b = mesh.nodes[el[1]], c = mesh.nodes[el[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

int euler_characteristic(const Mesh2D& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& el : mesh.elements)
    for (int k = 0; k < 3; ++k) {
      int a = el[k], b = el[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.insert({a, b});
    }
  return mesh.num_nodes() - static_cast<int>(edges.size()) + mesh.num_elements();
}

Mesh2D make_plate(double w, double h, int nx, int ny) {
  if (nx < 1 || ny < 1 || w <= 0.0 || h <= 0.0)
    throw std::invalid_argument("bad plate dimensions");
  Mesh2D m;
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.emplace_back(w * i / nx, h * j / ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.elements.push_back({a, b, c});
      m.elements.push_back({a, c, d});
    }
  for (int i = 0; i <= nx; ++i) {
    m.sets["bottom"].push_back(id(i, 0));
    m.sets["top"].push_back(id(i, ny));
  }
  return m;
}

Mesh2D make_plate_with_holes(double w, double h, int nx, int ny,
                             const std::vector<Hole>& holes) {
  Mesh2D plate = make_plate(w, h, nx, ny);

  const auto inside = [&](const Eigen::Vector2d& p) -> const Hole* {
    for (const auto& hole : holes) {
      const double dx = p.x() - hole.cx, dy = p.y() - hole.cy;
      if (dx * dx + dy * dy < hole.r * hole.r) return &hole;
    }
    return nullptr;
  };

  // drop elements touching a hole interior
  std::vector<std::array<int, 3>> kept;
  for (const auto& el : plate.elements) {
    bool cut = false;
    for (int n : el)
      if (inside(plate.nodes[n])) cut = true;
    if (!cut) kept.push_back(el);
  }
  plate.elements = std::move(kept);

  // snap remaining near-rim nodes onto the hole boundary
  for (auto& p : plate.nodes)
    for (const auto& hole : holes) {
      const Eigen::Vector2d c(hole.cx, hole.cy);
      const double d = (p - c).norm();
      if (d > 0.0 && d >= hole.r && d < hole.r * 1.25) p = c + (p - c) * (hole.r / d);
    }

  // compact unused nodes, remap elements and sets
  std::vector<int> remap(plate.nodes.size(), -1);
  for (const auto& el : plate.elements)
    for (int n : el) remap[n] = 0;
  Mesh2D out;
  for (std::size_t n = 0; n < plate.nodes.size(); ++n)
    if (remap[n] == 0) {
      remap[n] = out.num_nodes();
      out.nodes.push_back(plate.nodes[n]);
    }
  for (const auto& el : plate.elements)
    out.elements.push_back({remap[el[0]], remap[el[1]], remap[el[2]]});
  for (const auto& [name, nodes] : plate.sets) {
    for (int n : nodes)
      if (remap[n] >= 0) out.sets[name].push_back(remap[n]);
  }
  for (int e = 0; e < out.num_elements(); ++e)
    if (element_area(out, e) <= 0.0)
      throw std::runtime_error("hole snapping inverted an element; refine the grid");
  return out;
}

void save_mesh(const Mesh2D& mesh, const std::filesystem::path& file) {
  nlohmann::json j;
  for (const auto& n : mesh.nodes) j["nodes"].push_back({n.x(), n.y()});
  for (const auto& el : mesh.elements) j["elements"].push_back({el[0], el[1], el[2]});
  for (const auto& [name, nodes] : mesh.sets) j["sets"][name] = nodes;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write mesh file: " + file.string());
  out << j.dump() << "\n";
}

Mesh2D load_mesh(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open mesh file: " + file.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  Mesh2D m;
  for (const auto& n : j.at("nodes")) m.nodes.emplace_back(n.at(0), n.at(1));
  for (const auto& el : j.at("elements"))
    m.elements.push_back({el.at(0), el.at(1), el.at(2)});
  if (j.contains("sets"))
    for (const auto& [name, nodes] : j.at("sets").items())
      m.sets[name] = nodes.get<std::vector<int>>();
  return m;
}

}  // namespace hyperfit
