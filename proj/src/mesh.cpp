#include "hdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "hdg/error.hpp"

namespace hdg {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) fail(ErrorKind::topology, "triangle " + std::to_string(t) + " references missing vertex");
    }
    const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (!(std::abs(a) > 0.0)) fail(ErrorKind::topology, "triangle " + std::to_string(t) + " is degenerate");
    if (a < 0.0) std::swap(tri[1], tri[2]);
  }

  std::map<std::pair<int, int>, int> lookup;
  tri_edges_.resize(triangles_.size());
  tri_signs_.resize(triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3];
      int b = tri[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, num_edges());
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.left = t;
        const Point tangent = vertices_[e.v[1]] - vertices_[e.v[0]];
        e.length = tangent.norm();
        e.normal = Point(-tangent.y(), tangent.x()) / e.length;
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.right) {
          fail(ErrorKind::topology, "non-manifold edge (" + std::to_string(key.first) + ", " +
                                        std::to_string(key.second) + ") shared by more than two triangles");
        }
        e.right = t;
      }
      tri_edges_[t][i] = it->second;
    }
  }

  // Orient: the global normal must be outward for `left`.
  for (auto& e : edges_) {
    const auto& tri = triangles_[e.left];
    const Point centroid = (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    const bool outward_for_left = e.normal.dot(vertices_[e.v[0]] - centroid) > 0.0;
    if (!outward_for_left) {
      if (e.right) {
        std::swap(e.left, *e.right);
      } else {
        e.normal = -e.normal;
      }
    }
  }

  for (int t = 0; t < num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) tri_signs_[t][i] = edges_[tri_edges_[t][i]].left == t ? 1 : -1;
  }
}

double Mesh::area(int t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

void Mesh::validate() const {
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(area(t) > 0.0)) fail(ErrorKind::topology, "triangle " + std::to_string(t) + " is not counter-clockwise");
  }
  std::vector<int> incidence(edges_.size(), 0);
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    const Point centroid = (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const int e = tri_edges_[t][i];
      ++incidence[e];
      // outward normal of local edge i is the rotated edge vector (CCW ordering)
      const Point a = vertices_[tri[(i + 1) % 3]];
      const Point b = vertices_[tri[(i + 2) % 3]];
      const Point n = Point(b.y() - a.y(), a.x() - b.x()).normalized();
      if ((outward_normal(t, i) - n).norm() > 1e-14) {
        fail(ErrorKind::topology, "incidence sign mismatch on triangle " + std::to_string(t));
      }
      if (n.dot(a - centroid) <= 0.0) fail(ErrorKind::topology, "inward normal on triangle " + std::to_string(t));
    }
  }
  for (int e = 0; e < num_edges(); ++e) {
    const int expected = edges_[e].boundary() ? 1 : 2;
    if (incidence[e] != expected) fail(ErrorKind::topology, "edge " + std::to_string(e) + " has wrong adjacency");
  }
  // Euler characteristic of a disk: V - E + F = 1 (F counts triangles only).
  if (num_vertices() - num_edges() + num_triangles() + 1 != 2) {
    fail(ErrorKind::topology, "Euler relation violated (mesh is not a simply connected region)");
  }
}

Mesh build_structured_mesh(int n, MeshPattern pattern) {
  if (n < 1) fail(ErrorKind::config, "mesh resolution must be >= 1");
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) vertices.emplace_back(i * h, j * h);
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if (pattern == MeshPattern::right_split) {
        triangles.push_back({v00, v10, v11});
        triangles.push_back({v00, v11, v01});
      } else {
        const int c = static_cast<int>(vertices.size());
        vertices.emplace_back((i + 0.5) * h, (j + 0.5) * h);
        triangles.push_back({v00, v10, c});
        triangles.push_back({v10, v11, c});
        triangles.push_back({v11, v01, c});
        triangles.push_back({v01, v00, c});
      }
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

namespace {

// Splits text into non-empty, comment-stripped lines of whitespace-separated tokens.
std::vector<std::vector<std::string>> tokenize(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> row;
    for (std::string tok; ls >> tok;) row.push_back(tok);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

long parse_int(const std::string& s, const char* what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) fail(ErrorKind::parse, std::string("malformed ") + what + ": '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) fail(ErrorKind::parse, std::string("malformed ") + what + ": '" + s + "'");
  return v;
}

}  // namespace

Mesh import_mesh(std::string_view node_text, std::string_view ele_text) {
  const auto nodes = tokenize(node_text);
  if (nodes.empty()) fail(ErrorKind::parse, ".node: missing header");
  const long nv = parse_int(nodes[0].at(0), ".node header");
  if (nodes[0].size() < 2 || parse_int(nodes[0][1], ".node dimension") != 2) {
    fail(ErrorKind::parse, ".node: only 2-D meshes are supported");
  }
  if (nv < 3 || static_cast<long>(nodes.size()) - 1 != nv) fail(ErrorKind::parse, ".node: vertex count mismatch");

  std::vector<Point> vertices;
  std::unordered_map<long, int> node_ids;
  long base = 0;
  for (long r = 0; r < nv; ++r) {
    const auto& row = nodes[r + 1];
    if (row.size() < 3) fail(ErrorKind::parse, ".node: row " + std::to_string(r + 1) + " is too short");
    const long id = parse_int(row[0], ".node index");
    if (r == 0) base = id;
    if (id != base + r) fail(ErrorKind::parse, ".node: indices must be consecutive");
    node_ids[id] = static_cast<int>(r);
    vertices.emplace_back(parse_double(row[1], ".node coordinate"), parse_double(row[2], ".node coordinate"));
  }
  if (base != 0 && base != 1) fail(ErrorKind::parse, ".node: first index must be 0 or 1");

  const auto eles = tokenize(ele_text);
  if (eles.empty()) fail(ErrorKind::parse, ".ele: missing header");
  const long nt = parse_int(eles[0].at(0), ".ele header");
  if (eles[0].size() >= 2 && parse_int(eles[0][1], ".ele nodes per triangle") != 3) {
    fail(ErrorKind::parse, ".ele: only linear triangles are supported");
  }
  if (nt < 1 || static_cast<long>(eles.size()) - 1 != nt) fail(ErrorKind::parse, ".ele: triangle count mismatch");

  std::vector<std::array<int, 3>> triangles;
  for (long r = 0; r < nt; ++r) {
    const auto& row = eles[r + 1];
    if (row.size() < 4) fail(ErrorKind::parse, ".ele: row " + std::to_string(r + 1) + " is too short");
    parse_int(row[0], ".ele index");
    std::array<int, 3> tri{};
    for (int i = 0; i < 3; ++i) {
      const long id = parse_int(row[i + 1], ".ele vertex");
      auto it = node_ids.find(id);
      if (it == node_ids.end()) fail(ErrorKind::parse, ".ele: unknown vertex " + std::to_string(id));
      tri[i] = it->second;
    }
    triangles.push_back(tri);
  }
  Mesh mesh(std::move(vertices), std::move(triangles));
  mesh.validate();
  return mesh;
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats s;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    const double a = (v[tri[1]] - v[tri[2]]).norm();
    const double b = (v[tri[2]] - v[tri[0]]).norm();
    const double c = (v[tri[0]] - v[tri[1]]).norm();
    const double diam = std::max({a, b, c});
    const double inradius = 2.0 * mesh.area(t) / (a + b + c);
    s.h = std::max(s.h, diam);
    s.shape_ratio = std::max(s.shape_ratio, diam / inradius);
  }
  return s;
}

}  // namespace hdg
