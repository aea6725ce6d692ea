#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medmax/space.hpp"

namespace medmax {

enum class BasisKind { balls, cubes, axis_rects, rotated_rects, dyadic_cubes };

std::string to_string(BasisKind kind);
// Accepts the canonical names plus "intervals1d" (cubes on a 1D grid).
BasisKind basis_kind_from_string(std::string_view name);

// Half-open diameter window [lo, hi).
struct Window {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

// Descriptor of a differentiation basis. Members are generated from
// parameters and rasterized against a concrete space on demand.
struct BasisFamily {
  BasisKind kind = BasisKind::cubes;
  double eccentricity = 1.0;  // max long/short side, in cells
  int angles = 32;            // rotated_rects: uniform angles in [0, pi)
  std::vector<double> scale_grid;  // decreasing diameters; empty = unrestricted
  std::uint64_t seed = 0;

  static BasisFamily balls();
  static BasisFamily cubes();
  static BasisFamily axis_rects(double eccentricity);
  static BasisFamily rotated_rects(int angles = 32, double eccentricity = 32.0);
  static BasisFamily dyadic_cubes();

  bool is_box() const { return kind != BasisKind::balls; }
};

// Scales 2^-k for k = k_min..k_max, largest first.
std::vector<double> dyadic_scales(int k_min, int k_max);

std::string family_to_json(const BasisFamily& family);
BasisFamily family_from_json(std::string_view text);

// One basis member. Boxes live on a frame lattice: frame cells
// [u0, u0 + lu) x [v0, v0 + lv). Balls are {y : d(center, y) < radius}.
struct Member {
  int frame = -1;  // -1 for balls
  int u0 = 0, v0 = 0, lu = 1, lv = 1;
  Index center = 0;
  double radius = 0.0;

  bool is_ball() const { return frame < 0; }
  bool operator==(const Member&) const = default;
};

// Cell lattice used to rasterize boxes. Axis frames map grid index (i0, i1)
// to cell (i0, i1); rotated frames round the rotated index coordinates.
struct Frame {
  double angle = 0.0;
  double cos_a = 1.0, sin_a = 0.0;
  bool axis = true;
  int umin = 0, vmin = 0;  // absolute cell of lattice position (0, 0)
  int nu = 1, nv = 1;
  std::vector<int> cell_of;         // point -> local cell index (u + nu * v)
  std::vector<Index> cell_start;    // CSR offsets, nu * nv + 1
  std::vector<Index> cell_points;
  std::vector<int> u_of, v_of;      // point -> local cell coordinates

  int cell(int u, int v) const { return u + nu * v; }
  std::span<const Index> points_in(int c) const {
    return std::span<const Index>(cell_points).subspan(cell_start[c],
                                                       cell_start[c + 1] - cell_start[c]);
  }
};

// Shape of a box family member on a given frame.
struct Shape {
  int frame = 0;
  int lu = 1, lv = 1;
  double diameter = 0.0;
};

// A family bound to a space. Immutable after construction.
class Basis {
 public:
  Basis(const Space& space, BasisFamily family);

  const Space& space() const { return *space_; }
  const BasisFamily& family() const { return family_; }

  std::size_t frame_count() const { return frames_.size(); }
  const Frame& frame(std::size_t i) const { return frames_[i]; }

  // All box shapes whose diameter lies in the window.
  std::vector<Shape> shapes(Window w) const;
  // Box positions are local lattice coordinates of the lower corner.
  bool valid_box(int frame, int u0, int v0, int lu, int lv) const;
  bool dyadic() const { return family_.kind == BasisKind::dyadic_cubes; }

  double diameter(const Member& m) const;
  bool contains(const Member& m, Index x) const;
  MSet rasterize(const Member& m) const;

  // Members containing x with diameter in the window; stops after `cap`+1.
  std::vector<Member> members_at(Index x, Window w,
                                 std::size_t cap = std::numeric_limits<std::size_t>::max()) const;
  std::size_t count_at(Index x, Window w) const;

  // Up to `budget` members containing x with diameter < eps. All of them when
  // they fit the budget, otherwise a seeded sample headed by the canonical
  // member. Throws ResolutionExhausted when eps does not exceed the space's
  // resolution.
  std::vector<Member> sample_at(Index x, Window w, std::size_t budget) const;
  std::vector<MSet> sets_at(Index x, double eps, std::size_t budget) const;

  // Image under dilation by `scale` and a lattice shift, applied to the
  // parameters. Throws OutOfDomain when the image leaves the space.
  Member homothety(const Member& m, double scale, std::span<const int> shift) const;

  Member canonical(Index x, Window w) const;

 private:
  void build_frames();
  void check_window(Window w) const;
  const std::vector<double>& ball_radii(Index center) const;
  double ball_diameter(Index center, double radius) const;
  std::vector<Member> sample_boxes(Index x, Window w, std::size_t budget) const;

  const Space* space_;  // not owned; must outlive the basis
  BasisFamily family_;
  std::vector<Frame> frames_;
  std::vector<int> lengths_;  // admissible side lengths in cells
  std::vector<std::vector<double>> radii_;  // balls: distinct distances from each center
};

// Global collection of sets with, for each point, the sets selected for it.
struct SetCollection {
  std::vector<MSet> sets;
  std::vector<std::vector<std::uint32_t>> at;
};

SetCollection enumerate_collection(const Basis& basis, Window w, std::size_t budget);

// For every set B, the increasing unions of maximal sub-balls of B (largest
// first) whose measure reaches mu(B)/2. B itself is always among them.
SetCollection countable_refinement(const Space& space, const SetCollection& base);

}  // namespace medmax
