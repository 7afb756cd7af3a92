#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "fpqubit/constants.hpp"
#include "fpqubit/errors.hpp"
#include "fpqubit/spinham.hpp"
#include "oracles.hpp"

using namespace fpq;

namespace {
const ZfsParams kZfs{2.356e9, 0.458e9};

Matrix3c random_hermitian(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix3c a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = {g(rng), g(rng)};
  return (a + a.adjoint()) * 0.5;
}

double transition_frequency(const ZfsParams& z, const FieldVector& b, std::size_t k) {
  return transition_table(eigensolve(build_hamiltonian(z, b)), Vector3::UnitX()).entries[k].frequency;
}
}  // namespace

TEST_CASE("spin-1 operators satisfy the angular momentum algebra") {
  const auto& s = spin1();
  const std::complex<double> i(0.0, 1.0);
  CHECK((s.sx * s.sy - s.sy * s.sx - i * s.sz).norm() < 1e-14);
  CHECK((s.sy * s.sz - s.sz * s.sy - i * s.sx).norm() < 1e-14);
  CHECK((s.sz * s.sx - s.sx * s.sz - i * s.sy).norm() < 1e-14);
  CHECK((s.sx * s.sx + s.sy * s.sy + s.sz * s.sz - 2.0 * Matrix3c::Identity()).norm() < 1e-14);
  CHECK((s.sx - s.sx.adjoint()).norm() == 0.0);
}

TEST_CASE("zero-field levels of the reference splitting") {
  const auto lv = eigensolve(build_hamiltonian(kZfs, {}));
  CHECK(lv.levels[0] == doctest::Approx(-2.0 * kZfs.d / 3.0).epsilon(1e-12));
  CHECK(lv.levels[1] == doctest::Approx(kZfs.d / 3.0 - kZfs.e).epsilon(1e-12));
  CHECK(lv.levels[2] == doctest::Approx(kZfs.d / 3.0 + kZfs.e).epsilon(1e-12));
  CHECK(lv.levels[0] == doctest::Approx(-1.5707e9).epsilon(1e-4));
  CHECK(lv.levels[1] == doctest::Approx(0.32733e9).epsilon(1e-4));
  CHECK(lv.levels[2] == doctest::Approx(1.2433e9).epsilon(1e-4));
  CHECK(std::abs(lv.levels[0] + lv.levels[1] + lv.levels[2]) < 1e-9 * kZfs.d);
}

TEST_CASE("pure Zeeman splitting") {
  const auto lv = eigensolve(build_hamiltonian({1e-300, 0.0, 1, 1, 0}, {0, 0, 10e-3}));
  CHECK(lv.levels[0] == doctest::Approx(-0.28024e9).epsilon(1e-9));
  CHECK(std::abs(lv.levels[1]) < 1.0);
  CHECK(lv.levels[2] == doctest::Approx(0.28024e9).epsilon(1e-9));
}

TEST_CASE("eigenvalues agree with the characteristic-polynomial roots") {
  const Matrix3c h = build_hamiltonian(kZfs, {3e-3, 4e-3, 5e-3});
  const auto lv = eigensolve(h);
  const auto ref = oracle::hermitian_eigenvalues(h);
  for (int k = 0; k < 3; ++k) CHECK(lv.levels[k] == doctest::Approx(ref[k]).epsilon(1e-6));
}

TEST_CASE("eigensolve on simple and random Hermitian matrices") {
  Matrix3c d = Matrix3c::Zero();
  d.diagonal() << 1.0, 2.0, 3.0;
  const auto lv = eigensolve(d);
  CHECK(lv.levels[0] == 1.0);
  CHECK(lv.levels[2] == 3.0);
  CHECK((lv.states - Matrix3c::Identity()).norm() < 1e-14);

  std::mt19937_64 rng(1234);
  for (int n = 0; n < 100; ++n) {
    const Matrix3c h = random_hermitian(rng);
    const auto e = eigensolve(h);
    const double scale = h.norm();
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vector3c v = e.states.col(k);
      CHECK((h * v - e.levels[k] * v).norm() < 1e-8 * scale);
      sum += e.levels[k];
    }
    CHECK(sum == doctest::Approx(h.trace().real()).epsilon(1e-9).scale(scale));
    CHECK((e.states.adjoint() * e.states - Matrix3c::Identity()).norm() < 1e-10);
    CHECK(e.levels[0] <= e.levels[1]);
    CHECK(e.levels[1] <= e.levels[2]);
  }
}

TEST_CASE("eigensolve rejects non-Hermitian input") {
  Matrix3c h = Matrix3c::Identity();
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensolve(h), ValidationError);
}

TEST_CASE("largest eigenvector component is real and positive") {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 20; ++n) {
    const auto e = eigensolve(random_hermitian(rng));
    for (int k = 0; k < 3; ++k) {
      Eigen::Index idx;
      e.states.col(k).cwiseAbs().maxCoeff(&idx);
      CHECK(std::abs(e.states(idx, k).imag()) < 1e-14);
      CHECK(e.states(idx, k).real() > 0.0);
    }
  }
}

TEST_CASE("zero-field transitions and drive selection rules") {
  const auto lv = eigensolve(build_hamiltonian(kZfs, {}));
  const auto tx = transition_table(lv, Vector3::UnitX());
  // (0,1) = d - e, (0,2) = d + e, (1,2) = 2e
  CHECK(tx.entries[0].frequency == doctest::Approx(1.898e9).epsilon(1e-9));
  CHECK(tx.entries[1].frequency == doctest::Approx(2.814e9).epsilon(1e-9));
  CHECK(tx.entries[2].frequency == doctest::Approx(0.916e9).epsilon(1e-9));
  CHECK(pair_label(0, 1, kZfs.e) == PairLabel::yz);
  CHECK(pair_label(0, 2, kZfs.e) == PairLabel::xz);
  CHECK(pair_label(1, 2, kZfs.e) == PairLabel::xy);

  // A drive along x connects only the d+e pair, along z only the 2e pair.
  CHECK(tx.entries[0].weight < 1e-20);
  CHECK(tx.entries[1].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tx.entries[2].weight < 1e-20);
  const auto tz = transition_table(lv, Vector3::UnitZ());
  CHECK(tz.entries[0].weight < 1e-20);
  CHECK(tz.entries[1].weight < 1e-20);
  CHECK(tz.entries[2].weight == doctest::Approx(1.0).epsilon(1e-12));
  const auto ty = transition_table(lv, Vector3::UnitY());
  CHECK(ty.entries[0].weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transition sum rule over the three drive axes") {
  // Sum over a of Tr(S_a^2) = s(s+1)(2s+1) = 6; at zero field the diagonal
  // matrix elements vanish, leaving half of it for the i<j pairs.
  const auto& s = spin1();
  const double trace_sum = (s.sx * s.sx + s.sy * s.sy + s.sz * s.sz).trace().real();
  CHECK(trace_sum == doctest::Approx(6.0));
  const auto lv = eigensolve(build_hamiltonian(kZfs, {}));
  double total = 0.0;
  for (const auto& a : std::array<Vector3, 3>{Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()})
    for (const auto& t : transition_table(lv, a).entries) total += t.weight;
  CHECK(total == doctest::Approx(trace_sum / 2.0).epsilon(1e-9));

  // Any field: off-diagonal sum = (6 - diagonal part) / 2.
  const auto lb = eigensolve(build_hamiltonian(kZfs, {2e-3, -7e-3, 11e-3}));
  double off = 0.0, diag = 0.0;
  for (const auto& a : std::array<Vector3, 3>{Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()}) {
    for (const auto& t : transition_table(lb, a).entries) off += t.weight;
    for (std::size_t i = 0; i < 3; ++i) diag += coupling_weight(lb, i, i, a);
  }
  CHECK(off == doctest::Approx((trace_sum - diag) / 2.0).epsilon(1e-9));
}

TEST_CASE("weights are bounded and phase invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const FieldVector b{20e-3 * u(rng), 20e-3 * u(rng), 20e-3 * u(rng)};
    auto lv = eigensolve(build_hamiltonian(kZfs, b));
    const Vector3 axis = Vector3(u(rng), u(rng), u(rng)).normalized();
    const auto t0 = transition_table(lv, axis);
    for (int k = 0; k < 3; ++k) {
      lv.states.col(k) *= std::polar(1.0, 0.7 * (k + 1) + n);
    }
    const auto t1 = transition_table(lv, axis);
    for (int k = 0; k < 3; ++k) {
      CHECK(t0.entries[k].weight >= 0.0);
      CHECK(t0.entries[k].weight <= 2.0 + 1e-12);
      CHECK(t0.entries[k].frequency >= 0.0);
      CHECK(t1.entries[k].weight == doctest::Approx(t0.entries[k].weight).epsilon(1e-12));
    }
  }
}

TEST_CASE("transition_table rejects a non-unit drive axis") {
  const auto lv = eigensolve(build_hamiltonian(kZfs, {}));
  CHECK_THROWS_AS(transition_table(lv, Vector3(1.0, 1.0, 0.0)), ValidationError);
}

TEST_CASE("frequencies move continuously with the field") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double db = 1e-6;
  for (int n = 0; n < 50; ++n) {
    const Vector3 dir = Vector3(u(rng), u(rng), u(rng)).normalized();
    const double mag = 35e-3 * std::abs(u(rng));
    const Vector3 step = Vector3(u(rng), u(rng), u(rng)).normalized() * db;
    const FieldVector b0 = FieldVector::along(dir, mag);
    const FieldVector b1{b0.bx + step.x(), b0.by + step.y(), b0.bz + step.z()};
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(std::abs(transition_frequency(kZfs, b1, k) - transition_frequency(kZfs, b0, k)) <
            2.0 * constants::gamma_el * db);
  }
}

TEST_CASE("high-field limit of the outer transitions") {
  const double mag = 100.0 * kZfs.d / constants::gamma_el;
  for (const Vector3& dir : {Vector3(0, 0, 1), Vector3(1, 0, 0), Vector3(1, 1, 1).normalized()}) {
    const auto lv = eigensolve(build_hamiltonian(kZfs, FieldVector::along(dir, mag)));
    const double gb = constants::gamma_el * mag;
    CHECK((lv.levels[1] - lv.levels[0]) == doctest::Approx(gb).epsilon(0.02));
    CHECK((lv.levels[2] - lv.levels[1]) == doctest::Approx(gb).epsilon(0.02));
  }
}

TEST_CASE("zfs validation") {
  CHECK_THROWS_AS(build_hamiltonian({-1.0, 0.0}, {}), ValidationError);
  CHECK_THROWS_AS(build_hamiltonian({1e9, 0.4e9}, {}), ValidationError);
  CHECK_THROWS_AS(build_hamiltonian({1e9, 0.1e9, -1.0}, {}), ValidationError);
  CHECK_THROWS_AS(build_hamiltonian(kZfs, {NAN, 0, 0}), ValidationError);
  CHECK_NOTHROW(build_hamiltonian({1e9, -0.2e9}, {}));
}

TEST_CASE("negative e swaps the middle-level labels") {
  CHECK(sublevel_of(1, 0.4e9) == Sublevel::y);
  CHECK(sublevel_of(2, 0.4e9) == Sublevel::x);
  CHECK(sublevel_of(1, -0.4e9) == Sublevel::x);
  CHECK(sublevel_of(2, -0.4e9) == Sublevel::y);
  CHECK(sublevel_of(0, -0.4e9) == Sublevel::z);
  const auto idx = pair_indices(PairLabel::xz, -0.4e9);
  CHECK(idx[0] == 0);
  CHECK(idx[1] == 1);
}

TEST_CASE("perpendicular axes are orthonormal") {
  for (const Vector3& n : {Vector3(0, 0, 1), Vector3(1, 0, 0), Vector3(0.3, -0.4, 0.866).normalized()}) {
    const auto ax = perpendicular_axes(n);
    CHECK(std::abs(ax[0].dot(n)) < 1e-14);
    CHECK(std::abs(ax[1].dot(n)) < 1e-14);
    CHECK(std::abs(ax[0].dot(ax[1])) < 1e-14);
    CHECK(ax[0].norm() == doctest::Approx(1.0));
    CHECK(ax[1].norm() == doctest::Approx(1.0));
  }
}
