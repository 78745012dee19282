#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hdg {

using Point = Eigen::Vector2d;

enum class MeshPattern { right_split, criss_cross };

/// An edge of the triangulation.
///
/// The global normal is fixed once: on interior edges it points from `left`
/// into `right`, on boundary edges it is the outward normal of `left`.
/// Trace unknowns on the edge are parameterized by t in [0,1] running from
/// vertex `v[0]` (the lower vertex index) to `v[1]`.
struct Edge {
  std::array<int, 2> v{};
  int left = -1;
  std::optional<int> right;
  Point normal = Point::Zero();
  double length = 0.0;

  bool boundary() const { return !right.has_value(); }
};

/// Conforming triangulation with full edge topology.
///
/// Local edge i of a triangle joins its vertices (i+1)%3 and (i+2)%3, i.e. it
/// is opposite vertex i. `edge_sign[t][i]` is +1 when the global normal of that
/// edge coincides with the outward normal of triangle t, -1 otherwise.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  const std::array<int, 3>& triangle_edge_signs(int t) const { return tri_signs_[t]; }

  /// Outward unit normal of local edge i of triangle t.
  Point outward_normal(int t, int i) const { return tri_signs_[t][i] * edges_[tri_edges_[t][i]].normal; }

  double area(int t) const;

  /// Throws hdg::Error(topology) if any structural invariant is violated.
  void validate() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 3>> tri_signs_;
};

Mesh build_structured_mesh(int n, MeshPattern pattern);

/// Reads Triangle's `.node` / `.ele` ASCII formats. Index base (0 or 1) is
/// taken from the first vertex row. Clockwise triangles are flipped.
Mesh import_mesh(std::string_view node_text, std::string_view ele_text);

struct MeshStats {
  double h = 0.0;            ///< maximal element diameter
  double shape_ratio = 0.0;  ///< max over elements of diameter / inradius
};

MeshStats mesh_stats(const Mesh& mesh);

}  // namespace hdg
