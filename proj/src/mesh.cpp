#include "wavectrl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>

#include "wavectrl/error.hpp"

namespace wavectrl {

namespace {

constexpr double kSideTol = 1e-12;

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0)));
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

void fnv_mix(std::uint64_t& hash, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
}

}  // namespace

std::string_view to_string(BoundarySide side) {
  switch (side) {
    case BoundarySide::Bottom: return "bottom";
    case BoundarySide::Top: return "top";
    case BoundarySide::Left: return "left";
    case BoundarySide::Right: return "right";
  }
  return "?";
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  WAVECTRL_REQUIRE(vertices_.size() >= 3 && !triangles_.empty(), "mesh: empty mesh");
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      WAVECTRL_REQUIRE(v >= 0 && v < num_vertices(), "mesh: vertex index out of range");
    }
    const double area = signed_area(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
    WAVECTRL_REQUIRE(area > 0.0, "mesh: triangle with non-positive signed area");
  }
  final_time_ = 0.0;
  for (const auto& v : vertices_) final_time_ = std::max(final_time_, v(0));
  build_connectivity();
  classify_boundary();

  h_ = 0.0;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) {
      h_ = std::max(h_, (vertex(tri[k]) - vertex(tri[(k + 1) % 3])).norm());
    }
  }
}

void Mesh::build_connectivity() {
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (int c = 0; c < num_triangles(); ++c) {
    const auto& tri = triangles_[static_cast<std::size_t>(c)];
    // local edge k is opposite vertex k
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), num_edges());
      if (inserted) {
        edges_.push_back(Edge{{a, b}, c, -1, std::nullopt});
      } else {
        Edge& e = edges_[static_cast<std::size_t>(it->second)];
        WAVECTRL_REQUIRE(e.right < 0, "mesh: edge shared by more than two triangles");
        e.right = c;
      }
      triangle_edges_[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = it->second;
    }
  }
}

void Mesh::classify_boundary() {
  for (int e = 0; e < num_edges(); ++e) {
    Edge& edge = edges_[static_cast<std::size_t>(e)];
    if (!edge.is_boundary()) continue;
    const Point& a = vertex(edge.vertices[0]);
    const Point& b = vertex(edge.vertices[1]);
    const auto on = [&](int coord, double value) {
      return std::abs(a(coord) - value) <= kSideTol && std::abs(b(coord) - value) <= kSideTol;
    };
    if (on(0, 0.0)) {
      edge.tag = BoundarySide::Bottom;
    } else if (on(0, final_time_)) {
      edge.tag = BoundarySide::Top;
    } else if (on(1, 0.0)) {
      edge.tag = BoundarySide::Left;
    } else if (on(1, 1.0)) {
      edge.tag = BoundarySide::Right;
    } else {
      throw InvalidArgument("mesh: boundary edge not on a side of (0,T)x(0,1)");
    }
    boundary_edges_[static_cast<std::size_t>(*edge.tag)].push_back(e);
  }
}

std::array<Point, 3> Mesh::corners(int cell) const {
  const auto& tri = triangles_[static_cast<std::size_t>(cell)];
  return {vertex(tri[0]), vertex(tri[1]), vertex(tri[2])};
}

double Mesh::area(int cell) const {
  const auto p = corners(cell);
  return signed_area(p[0], p[1], p[2]);
}

FacePair Mesh::face_pair(int edge) const {
  const Edge& e = edges_[static_cast<std::size_t>(edge)];
  const Point& a = vertex(e.vertices[0]);
  const Point& b = vertex(e.vertices[1]);
  const Point tangent = (b - a).normalized();
  Point normal(tangent(1), -tangent(0));
  // orient away from the left triangle's interior
  const auto p = corners(e.left);
  const Point centroid = (p[0] + p[1] + p[2]) / 3.0;
  if (normal.dot(a - centroid) < 0.0) normal = -normal;
  return FacePair{edge, normal, e.left, e.right};
}

std::vector<int> Mesh::interior_edges() const {
  std::vector<int> out;
  out.reserve(edges_.size());
  for (int e = 0; e < num_edges(); ++e) {
    if (!edges_[static_cast<std::size_t>(e)].is_boundary()) out.push_back(e);
  }
  return out;
}

std::uint64_t Mesh::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const auto& v : vertices_) fnv_mix(hash, v.data(), 2 * sizeof(double));
  for (const auto& t : triangles_) fnv_mix(hash, t.data(), 3 * sizeof(int));
  return hash;
}

Mesh build_rect_mesh(const RectMeshOptions& opt) {
  WAVECTRL_REQUIRE(opt.nx >= 2, "build_rect_mesh: nx must be at least 2");
  WAVECTRL_REQUIRE(opt.nt >= 2, "build_rect_mesh: nt must be at least 2");
  WAVECTRL_REQUIRE(opt.final_time > 0.0 && std::isfinite(opt.final_time),
                   "build_rect_mesh: final time must be positive");
  WAVECTRL_REQUIRE(opt.jitter >= 0.0 && opt.jitter < 0.3, "build_rect_mesh: jitter must lie in [0, 0.3)");

  const int nx = opt.nx;
  const int nt = opt.nt;
  const double dt = opt.final_time / nt;
  const double dx = 1.0 / nx;
  const auto grid_id = [nx](int i, int j) { return i * (nx + 1) + j; };  // i along t, j along x

  std::vector<Point> base;
  base.reserve(static_cast<std::size_t>((nt + 1) * (nx + 1) + (opt.pattern == MeshPattern::Crisscross ? nt * nx : 0)));
  for (int i = 0; i <= nt; ++i) {
    for (int j = 0; j <= nx; ++j) {
      const double t = (i == nt) ? opt.final_time : i * dt;
      const double x = (j == nx) ? 1.0 : j * dx;
      base.emplace_back(t, x);
    }
  }

  std::vector<std::array<int, 3>> triangles;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int v00 = grid_id(i, j);
      const int v10 = grid_id(i + 1, j);
      const int v01 = grid_id(i, j + 1);
      const int v11 = grid_id(i + 1, j + 1);
      if (opt.pattern == MeshPattern::Crisscross) {
        const int c = static_cast<int>(base.size());
        base.emplace_back((i + 0.5) * dt, (j + 0.5) * dx);
        triangles.push_back({v00, v10, c});
        triangles.push_back({v10, v11, c});
        triangles.push_back({v11, v01, c});
        triangles.push_back({v01, v00, c});
      } else if ((i + j) % 2 == 0) {
        triangles.push_back({v00, v10, v11});
        triangles.push_back({v00, v11, v01});
      } else {
        triangles.push_back({v00, v10, v01});
        triangles.push_back({v10, v11, v01});
      }
    }
  }

  // (t, x) ordering: counterclockwise means positive (t-axis, x-axis) cross product.
  for (auto& tri : triangles) {
    if (signed_area(base[static_cast<std::size_t>(tri[0])], base[static_cast<std::size_t>(tri[1])],
                    base[static_cast<std::size_t>(tri[2])]) < 0.0) {
      std::swap(tri[1], tri[2]);
    }
  }

  if (opt.jitter == 0.0) return Mesh(std::move(base), std::move(triangles));

  const double radius = opt.jitter * std::min(dx, dt);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<Point> moved = base;
    for (auto& v : moved) {
      const bool bottom_top = v(0) == 0.0 || v(0) == opt.final_time;
      const bool left_right = v(1) == 0.0 || v(1) == 1.0;
      if (bottom_top && left_right) continue;  // corners are fixed
      if (bottom_top) {
        v(1) += radius * unit(rng);
      } else if (left_right) {
        v(0) += radius * unit(rng);
      } else {
        const double r = radius * std::sqrt(0.5 * (unit(rng) + 1.0));
        const double angle = std::numbers::pi * unit(rng);
        v(0) += r * std::cos(angle);
        v(1) += r * std::sin(angle);
      }
    }
    const bool valid = std::all_of(triangles.begin(), triangles.end(), [&](const auto& tri) {
      return signed_area(moved[static_cast<std::size_t>(tri[0])], moved[static_cast<std::size_t>(tri[1])],
                         moved[static_cast<std::size_t>(tri[2])]) > 0.0;
    });
    if (valid) return Mesh(std::move(moved), std::move(triangles));
  }
  throw InvalidArgument("build_rect_mesh: jitter produced inverted triangles in 10 attempts");
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "wavectrl-mesh v1\n" << mesh.num_vertices() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) out << v(0) << ' ' << v(1) << '\n';
  out << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::string header;
  std::getline(in, header);
  WAVECTRL_REQUIRE(header == "wavectrl-mesh v1", "read_mesh: bad header '" + header + "'");
  long long nv = -1;
  in >> nv;
  WAVECTRL_REQUIRE(in && nv >= 3, "read_mesh: bad vertex count");
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& v : vertices) in >> v(0) >> v(1);
  long long nt = -1;
  in >> nt;
  WAVECTRL_REQUIRE(in && nt >= 1, "read_mesh: bad triangle count");
  std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nt));
  for (auto& t : triangles) in >> t[0] >> t[1] >> t[2];
  WAVECTRL_REQUIRE(static_cast<bool>(in), "read_mesh: truncated file");
  return Mesh(std::move(vertices), std::move(triangles));
}

}  // namespace wavectrl
