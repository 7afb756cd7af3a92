#include "fpqubit/spinham.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"

namespace fpq {

namespace {

using cd = std::complex<double>;

bool all_finite(const Matrix3c& m) {
  for (Eigen::Index i = 0; i < 9; ++i) {
    if (!std::isfinite(m(i).real()) || !std::isfinite(m(i).imag())) return false;
  }
  return true;
}

double off_diagonal_norm(const Matrix3c& a) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Zero a(p,q) with a unitary J = P R, where P rephases column q so that
// a(p,q) becomes real and R is a real plane rotation. A <- J^H A J, V <- V J.
void rotate(Matrix3c& a, Matrix3c& v, int p, int q) {
  const cd apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const cd phase = apq / mag;  // e^{i phi}

  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = 0.5 * std::atan2(2.0 * mag, aqq - app);
  const double c = std::cos(theta);
  const double s = std::sin(theta);

  // P = I with P(q,q) = e^{-i phi} makes (P^H A P)(p,q) = |a(p,q)|.
  const cd back = std::conj(phase);
  Matrix3c j = Matrix3c::Identity();
  j(p, p) = c;
  j(p, q) = s;
  j(q, p) = -s * back;
  j(q, q) = c * back;

  a = (j.adjoint() * a * j).eval();
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (int k = 0; k < 3; ++k) a(k, k) = a(k, k).real();
  v = (v * j).eval();
}

}  // namespace

void ZfsParams::validate() const {
  require(std::isfinite(d) && std::isfinite(e) && std::isfinite(amp_xz) &&
              std::isfinite(amp_yz) && std::isfinite(amp_xy),
          "ZfsParams: non-finite value");
  require(d > 0.0, "ZfsParams: d must be positive");
  require(std::abs(e) <= d / 3.0 * (1.0 + 1e-12), "ZfsParams: |e| must not exceed d/3");
  require(amp_xz >= 0.0 && amp_yz >= 0.0 && amp_xy >= 0.0,
          "ZfsParams: amplitudes must be non-negative");
}

const SpinOperators& spin1() {
  static const SpinOperators ops = [] {
    const double r = 1.0 / std::sqrt(2.0);
    const cd i(0.0, 1.0);
    SpinOperators s;
    s.sx << 0, r, 0, r, 0, r, 0, r, 0;
    s.sy << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
    s.sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return s;
  }();
  return ops;
}

const char* to_string(PairLabel p) {
  switch (p) {
    case PairLabel::yz: return "yz";
    case PairLabel::xz: return "xz";
    case PairLabel::xy: return "xy";
  }
  return "?";
}

Matrix3c build_hamiltonian(const ZfsParams& zfs, const FieldVector& b) {
  zfs.validate();
  require(std::isfinite(b.bx) && std::isfinite(b.by) && std::isfinite(b.bz),
          "build_hamiltonian: non-finite field");
  const auto& s = spin1();
  const Matrix3c id = Matrix3c::Identity();
  Matrix3c h = zfs.d * (s.sz * s.sz - (2.0 / 3.0) * id) + zfs.e * (s.sx * s.sx - s.sy * s.sy) -
               constants::gamma_el * (b.bx * s.sx + b.by * s.sy + b.bz * s.sz);
  return h;
}

EnergyLevels eigensolve(const Matrix3c& h) {
  require(all_finite(h), "eigensolve: non-finite matrix");
  const double scale = h.norm();
  require((h - h.adjoint()).norm() <= 1e-10 * std::max(scale, 1e-300) || scale == 0.0,
          "eigensolve: matrix is not Hermitian");

  Matrix3c a = 0.5 * (h + h.adjoint());
  Matrix3c v = Matrix3c::Identity();
  const double tol = 1e-13 * scale;

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && off_diagonal_norm(a) > tol; ++sweep) {
    rotate(a, v, 0, 1);
    rotate(a, v, 0, 2);
    rotate(a, v, 1, 2);
  }
  if (off_diagonal_norm(a) > tol) throw NumericalError("eigensolve: Jacobi did not converge");

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return a(x, x).real() < a(y, y).real(); });

  EnergyLevels out;
  for (int k = 0; k < 3; ++k) {
    out.levels[k] = a(order[k], order[k]).real();
    Vector3c col = v.col(order[k]);
    int big = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(col(c)) > std::abs(col(big)) * (1.0 + 1e-12)) big = c;
    const cd ph = std::conj(col(big)) / std::abs(col(big));
    col *= ph;
    col(big) = std::abs(col(big));
    out.states.col(k) = col;
  }
  return out;
}

double coupling_weight(const EnergyLevels& lv, std::size_t i, std::size_t j, const Vector3& axis) {
  const auto& s = spin1();
  const Matrix3c op = axis.x() * s.sx + axis.y() * s.sy + axis.z() * s.sz;
  const cd m = lv.states.col(static_cast<Eigen::Index>(i)).adjoint() * op *
               lv.states.col(static_cast<Eigen::Index>(j));
  return std::norm(m);
}

TransitionSet transition_table(const EnergyLevels& lv, const Vector3& drive_axis) {
  require(drive_axis.allFinite() && std::abs(drive_axis.norm() - 1.0) < 1e-9,
          "transition_table: drive axis must be a unit vector");
  constexpr std::array<std::array<std::size_t, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  TransitionSet out;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [i, j] = kPairs[k];
    auto& t = out.entries[k];
    t.lower = i;
    t.upper = j;
    t.frequency = std::max(0.0, lv.levels[j] - lv.levels[i]);
    t.weight = coupling_weight(lv, i, j, drive_axis);
  }
  return out;
}

Sublevel sublevel_of(std::size_t level_index, double e) {
  switch (level_index) {
    case 0: return Sublevel::z;
    case 1: return e >= 0.0 ? Sublevel::y : Sublevel::x;
    case 2: return e >= 0.0 ? Sublevel::x : Sublevel::y;
    default: throw ValidationError("sublevel_of: level index out of range");
  }
}

PairLabel pair_label(std::size_t i, std::size_t j, double e) {
  require(i < j && j < 3, "pair_label: need i < j < 3");
  const Sublevel a = sublevel_of(i, e);
  const Sublevel b = sublevel_of(j, e);
  auto has = [&](Sublevel s) { return a == s || b == s; };
  if (!has(Sublevel::z)) return PairLabel::xy;
  return has(Sublevel::x) ? PairLabel::xz : PairLabel::yz;
}

std::array<std::size_t, 2> pair_indices(PairLabel p, double e) {
  constexpr std::array<std::array<std::size_t, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (const auto& ij : kPairs)
    if (pair_label(ij[0], ij[1], e) == p) return ij;
  throw ValidationError("pair_indices: unknown pair");
}

std::array<Vector3, 2> perpendicular_axes(const Vector3& n) {
  // Helper axis: the coordinate axis least aligned with n.
  Eigen::Index k = 0;
  n.cwiseAbs().minCoeff(&k);
  Vector3 helper = Vector3::Zero();
  helper(k) = 1.0;
  Vector3 u = n.cross(helper).normalized();
  Vector3 w = n.cross(u).normalized();
  return {u, w};
}

}  // namespace fpq
