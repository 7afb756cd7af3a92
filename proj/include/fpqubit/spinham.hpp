#pragma once

// Spin-1 zero-field-splitting + Zeeman Hamiltonian, a deterministic 3x3
// Hermitian eigensolver and transition tables. All energies are in Hz.

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace fpq {

using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;
using Vector3 = Eigen::Vector3d;

/// Zero-field splitting parameters plus per-transition ODMR amplitudes.
///
/// The level labels follow the convention used throughout the project:
/// T_z is the -2d/3 level, T_x the d/3+e level and T_y the d/3-e level, so
/// at zero field T_x-T_z = d+e, T_y-T_z = d-e and T_x-T_y = 2e.
struct ZfsParams {
  double d = 0.0;  // Hz
  double e = 0.0;  // Hz
  double amp_xz = 1.0;
  double amp_yz = 1.0;
  double amp_xy = 0.0;

  // Throws ValidationError unless d > 0, |e| <= d/3, amplitudes >= 0, all
  // finite. Negative e is accepted: it swaps which middle level is T_x.
  void validate() const;
};

/// Magnetic field in the molecular (ZFS principal-axis) frame, Tesla.
struct FieldVector {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  static FieldVector along(const Vector3& dir, double magnitude) {
    return {dir.x() * magnitude, dir.y() * magnitude, dir.z() * magnitude};
  }
  Vector3 vec() const { return {bx, by, bz}; }
  double norm() const { return vec().norm(); }
};

struct SpinOperators {
  Matrix3c sx;
  Matrix3c sy;
  Matrix3c sz;
};

// Standard spin-1 matrices in the |m=+1,0,-1> basis.
const SpinOperators& spin1();

/// Eigen-decomposition of a 3x3 Hermitian matrix. `states` holds the
/// eigenvectors as columns, matching `levels` (ascending).
struct EnergyLevels {
  std::array<double, 3> levels{};
  Matrix3c states = Matrix3c::Identity();
};

enum class Sublevel { x, y, z };

/// Which pair of labeled sublevels a transition connects.
enum class PairLabel { yz, xz, xy };

const char* to_string(PairLabel p);

struct Transition {
  std::size_t lower = 0;  // index into EnergyLevels::levels
  std::size_t upper = 0;
  double frequency = 0.0;  // Hz
  double weight = 0.0;     // |<lower| S.axis |upper>|^2
};

/// The three transitions, ordered (0,1), (0,2), (1,2) by level index.
struct TransitionSet {
  std::array<Transition, 3> entries{};
};

/// H/h in Hz: d(Sz^2 - 2/3) + e(Sx^2 - Sy^2) - gamma_el S.B.
Matrix3c build_hamiltonian(const ZfsParams& zfs, const FieldVector& b);

/// Cyclic complex Jacobi rotations. Levels ascending; each eigenvector's
/// largest-magnitude component (first index on ties) is made real-positive.
EnergyLevels eigensolve(const Matrix3c& h);

/// Transition frequencies and coupling weights for a drive along `drive_axis`
/// (unit vector, molecular frame).
TransitionSet transition_table(const EnergyLevels& lv, const Vector3& drive_axis);

/// |<i| S.axis |j>|^2 for eigenvectors i, j of `lv`.
double coupling_weight(const EnergyLevels& lv, std::size_t i, std::size_t j,
                       const Vector3& axis);

/// Sublevel label of the ascending level index, for the sign of e.
Sublevel sublevel_of(std::size_t level_index, double e);

/// Pair label for a transition between level indices i < j.
PairLabel pair_label(std::size_t i, std::size_t j, double e);

/// Level indices (lower, upper) carrying a given pair label.
std::array<std::size_t, 2> pair_indices(PairLabel p, double e);

/// Two orthonormal vectors perpendicular to the unit vector `n`,
/// constructed deterministically.
std::array<Vector3, 2> perpendicular_axes(const Vector3& n);

}  // namespace fpq
