#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace wavectrl {

/// Spacetime point, stored as (t, x).
using Point = Eigen::Vector2d;

enum class BoundarySide : std::uint8_t { Bottom, Top, Left, Right };

std::string_view to_string(BoundarySide side);

struct Edge {
  std::array<int, 2> vertices{};
  int left = -1;   // always set
  int right = -1;  // -1 on the boundary
  std::optional<BoundarySide> tag;

  [[nodiscard]] bool is_boundary() const { return right < 0; }
};

/// Interior or boundary edge together with its Euclidean unit normal,
/// pointing out of the left triangle.
struct FacePair {
  int edge = -1;
  Point normal = Point::Zero();
  int left = -1;
  int right = -1;

  [[nodiscard]] FacePair flipped() const { return {edge, -normal, right, left}; }
};

enum class MeshPattern : std::uint8_t { Alternating, Crisscross };

/// Conforming triangulation of the spacetime rectangle (0,T) x (0,1).
///
/// Triangles are counterclockwise in the (t, x) plane. Edges, adjacency and
/// the boundary classification are derived on construction; the object is
/// immutable afterwards.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::array<int, 3>& triangle_edges(int cell) const {
    return triangle_edges_[static_cast<std::size_t>(cell)];
  }

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }

  [[nodiscard]] double final_time() const { return final_time_; }
  /// Largest triangle diameter.
  [[nodiscard]] double h() const { return h_; }

  [[nodiscard]] const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::array<Point, 3> corners(int cell) const;
  [[nodiscard]] double area(int cell) const;

  [[nodiscard]] FacePair face_pair(int edge) const;
  [[nodiscard]] const std::vector<int>& boundary_edges(BoundarySide side) const {
    return boundary_edges_[static_cast<std::size_t>(side)];
  }
  [[nodiscard]] std::vector<int> interior_edges() const;

  /// FNV-1a hash of the exact vertex and triangle data.
  [[nodiscard]] std::uint64_t fingerprint() const;

 private:
  void build_connectivity();
  void classify_boundary();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::array<std::vector<int>, 4> boundary_edges_;
  double final_time_ = 0.0;
  double h_ = 0.0;
};

struct RectMeshOptions {
  double final_time = 1.0;
  int nx = 2;
  int nt = 2;
  MeshPattern pattern = MeshPattern::Alternating;
  double jitter = 0.0;
  std::uint64_t seed = 20240607;
};

Mesh build_rect_mesh(const RectMeshOptions& options);

inline Mesh build_rect_mesh(double final_time, int nx, int nt,
                            MeshPattern pattern = MeshPattern::Alternating, double jitter = 0.0,
                            std::uint64_t seed = 20240607) {
  return build_rect_mesh(RectMeshOptions{final_time, nx, nt, pattern, jitter, seed});
}

inline double mesh_size(const Mesh& mesh) { return mesh.h(); }

/// `wavectrl-mesh v1` text format.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace wavectrl
