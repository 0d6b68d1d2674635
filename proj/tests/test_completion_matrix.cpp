#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "basisforge/completion_matrix.hpp"
#include "basisforge/tolerances.hpp"

using namespace basisforge;

namespace {

// Orthonormal test inputs: a permutation of reference vectors with pairs
// mixed by plane rotations. Stays orthonormal for any angle choice.
std::vector<SparseL2Vector> rotated_family(std::mt19937_64& rng, std::size_t count) {
  std::vector<std::uint32_t> coords(2 * count);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    coords[i] = static_cast<std::uint32_t>(i);
  }
  for (std::size_t i = 0; i + 1 < coords.size(); ++i) {
    const std::size_t j = i + rng() % (coords.size() - i);
    std::swap(coords[i], coords[j]);
  }
  std::vector<SparseL2Vector> family;
  family.reserve(count);
  for (std::size_t i = 0; i + 1 < 2 * count; i += 2) {
    const double angle = static_cast<double>(rng() % 360) / 180.0 * 3.141592653589793;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    family.push_back(SparseL2Vector::from_entries(
        {{coords[i], c}, {coords[i + 1], s}}));
    if (family.size() == count) break;
    family.push_back(SparseL2Vector::from_entries(
        {{coords[i], -s}, {coords[i + 1], c}}));
    if (family.size() == count) break;
  }
  return family;
}

double frozen_gamma_1() { return 0.29289321881345254; }
double frozen_gamma_2() { return 0.14644660940672627; }

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("gamma closed form") {
  // 1 / ((2 + sqrt(2)) * n), hand-evaluated for n = 1 and n = 2.
  CHECK(std::abs(completion_gamma(1) - frozen_gamma_1()) <= 1e-16);
  CHECK(std::abs(completion_gamma(2) - frozen_gamma_2()) <= 1e-16);
  CHECK_THROWS_AS(completion_gamma(0), std::invalid_argument);
  CHECK_THROWS_AS(make_completion_matrix(0), std::invalid_argument);
}

TEST_CASE("gamma satisfies its defining identities") {
  for (std::uint32_t n = 1; n <= 4096; n *= 2) {
    const double g = completion_gamma(n);
    const double dn = static_cast<double>(n);
    // Orthogonality identity: n g^2 - 2 g + 1/(2n) = 0.
    CHECK(std::abs(dn * g * g - 2.0 * g + 1.0 / (2.0 * dn)) <= 1e-15);
    // Row-sum identity: n g = 1 - 1/sqrt(2).
    CHECK(std::abs(dn * g - (1.0 - 1.0 / std::sqrt(2.0))) <= 1e-15);
    // Size bound, strict on both sides.
    CHECK(g > 0.0);
    CHECK(g < 1.0 / (2.0 * dn));
  }
}

TEST_CASE("materialized matrix for n = 1 is the 45-degree rotation") {
  const Eigen::MatrixXd a = materialize(make_completion_matrix(1));
  const double r = std::sqrt(0.5);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 2);
  CHECK(std::abs(a(0, 0) - r) <= 1e-15);
  CHECK(std::abs(a(0, 1) - r) <= 1e-15);
  CHECK(std::abs(a(1, 0) + r) <= 1e-15);
  CHECK(std::abs(a(1, 1) - r) <= 1e-15);
}

TEST_CASE("materialized matrix for n = 2 against frozen values") {
  const Eigen::MatrixXd a = materialize(make_completion_matrix(2));
  REQUIRE(a.rows() == 3);
  const double expected[3][3] = {
      {0.8535533906, -0.1464466094, 0.5},
      {-0.1464466094, 0.8535533906, 0.5},
      {-0.5, -0.5, 0.7071067812},
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(a(i, j) - expected[i][j]) <= 1e-10);
    }
  }
}

TEST_CASE("corner entry is always 1/sqrt(2)") {
  for (std::uint32_t n : {1u, 2u, 3u, 5u, 8u, 64u}) {
    const Eigen::MatrixXd a = materialize(make_completion_matrix(n));
    CHECK(a(n, n) == 1.0 / std::sqrt(2.0));
  }
}

TEST_CASE("orthogonality defect stays at roundoff") {
  for (std::uint32_t n : {1u, 2u, 3u, 7u, 8u, 64u}) {
    CHECK(orthogonality_defect(make_completion_matrix(n)) <= 1e-13);
  }
}

TEST_CASE("materialize guard rejects oversized blocks before allocating") {
  const CompletionMatrix big = make_completion_matrix(kMaterializeGuard + 1);
  CHECK_THROWS_AS(materialize(big), std::length_error);
  CHECK_THROWS_AS(orthogonality_defect(big), std::length_error);
}

TEST_CASE("structured apply on a single-vector block") {
  // Block {e_2} with corrective e_1: both outputs are the classic pair
  // (e_1 + e_2)/sqrt(2) and (e_1 - e_2)/sqrt(2).
  const std::vector<SparseL2Vector> block = {SparseL2Vector::unit(2)};
  const SparseL2Vector g = SparseL2Vector::unit(1);
  const ApplyResult out = apply_structured(make_completion_matrix(1), block, g);

  const double r = std::sqrt(0.5);
  REQUIRE(out.rotated.size() == 1);
  CHECK(std::abs(out.rotated[0].coef(1) - r) <= 1e-12);
  CHECK(std::abs(out.rotated[0].coef(2) - r) <= 1e-12);
  CHECK(std::abs(out.leftover.coef(1) - r) <= 1e-12);
  CHECK(std::abs(out.leftover.coef(2) + r) <= 1e-12);
}

TEST_CASE("structured apply matches the frozen n = 2 step") {
  const std::vector<SparseL2Vector> block = {SparseL2Vector::unit(2),
                                             SparseL2Vector::unit(4)};
  const SparseL2Vector g = SparseL2Vector::unit(1);
  const ApplyResult out = apply_structured(make_completion_matrix(2), block, g);

  REQUIRE(out.rotated.size() == 2);
  CHECK(std::abs(out.rotated[0].coef(1) - 0.5) <= 1e-12);
  CHECK(std::abs(out.rotated[0].coef(2) - 0.85355339059327373) <= 1e-12);
  CHECK(std::abs(out.rotated[0].coef(4) + 0.14644660940672627) <= 1e-12);
  CHECK(std::abs(out.rotated[1].coef(1) - 0.5) <= 1e-12);
  CHECK(std::abs(out.rotated[1].coef(2) + 0.14644660940672627) <= 1e-12);
  CHECK(std::abs(out.rotated[1].coef(4) - 0.85355339059327373) <= 1e-12);
  CHECK(std::abs(out.leftover.coef(1) - std::sqrt(0.5)) <= 1e-12);
  CHECK(std::abs(out.leftover.coef(2) + 0.5) <= 1e-12);
  CHECK(std::abs(out.leftover.coef(4) + 0.5) <= 1e-12);
}

TEST_CASE("structured and naive paths agree on randomized orthonormal inputs") {
  std::mt19937_64 rng(101);
  for (std::uint32_t n : {1u, 2u, 3u, 8u, 16u}) {
    std::vector<SparseL2Vector> family = rotated_family(rng, n + 1);
    const SparseL2Vector g = family.back();
    family.pop_back();

    const CompletionMatrix m = make_completion_matrix(n);
    const ApplyResult fast = apply_structured(m, family, g);
    const ApplyResult slow = apply_naive(m, family, g);

    REQUIRE(fast.rotated.size() == slow.rotated.size());
    for (std::uint32_t j = 0; j < n; ++j) {
      CHECK(max_abs_diff(fast.rotated[j], slow.rotated[j]) <= 1e-12);
    }
    CHECK(max_abs_diff(fast.leftover, slow.leftover) <= 1e-12);
  }
}

TEST_CASE("outputs stay orthonormal, leftover included") {
  std::mt19937_64 rng(103);
  const std::uint32_t n = 8;
  std::vector<SparseL2Vector> family = rotated_family(rng, n + 1);
  const SparseL2Vector g = family.back();
  family.pop_back();

  const ApplyResult out = apply_structured(make_completion_matrix(n), family, g);
  std::vector<const SparseL2Vector*> all;
  for (const auto& v : out.rotated) all.push_back(&v);
  all.push_back(&out.leftover);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i; j < all.size(); ++j) {
      const double expected = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(inner(*all[i], *all[j]) - expected) <= 1e-12);
    }
  }
}

TEST_CASE("every row moves by exactly (2 - sqrt(2)) / n") {
  const double want = 2.0 - std::sqrt(2.0);
  for (std::uint32_t n : {1u, 2u, 4u, 16u}) {
    std::vector<SparseL2Vector> block;
    for (std::uint32_t i = 0; i < n; ++i) {
      block.push_back(SparseL2Vector::unit(2 * i));
    }
    const SparseL2Vector g = SparseL2Vector::unit(2 * n + 1);
    const ApplyResult out = apply_structured(make_completion_matrix(n), block, g);
    for (std::uint32_t j = 0; j < n; ++j) {
      const SparseL2Vector diff = axpy(-1.0, block[j], out.rotated[j]);
      CHECK(std::abs(inner(diff, diff) - want / n) <= 1e-12);
    }
  }
}

TEST_CASE("corrective recovery from outputs") {
  // The mixing matrix is orthogonal, so its transpose recovers the inputs:
  // g = c * sum(rotated) + (1/sqrt(2)) * leftover with c = 1/sqrt(2n).
  const std::uint32_t n = 4;
  std::vector<SparseL2Vector> block;
  for (std::uint32_t i = 0; i < n; ++i) block.push_back(SparseL2Vector::unit(3 * i));
  const SparseL2Vector g = SparseL2Vector::unit(100);
  const ApplyResult out = apply_structured(make_completion_matrix(n), block, g);

  std::vector<WeightedVec> terms;
  const double c = 1.0 / std::sqrt(2.0 * n);
  for (const auto& v : out.rotated) terms.push_back({c, &v});
  terms.push_back({1.0 / std::sqrt(2.0), &out.leftover});
  const SparseL2Vector recovered = linear_combination(terms);
  CHECK(max_abs_diff(recovered, g) <= 1e-12);
}

TEST_CASE("input checking is available and block sizes are enforced") {
  const std::vector<SparseL2Vector> block = {SparseL2Vector::unit(0)};
  const SparseL2Vector g = SparseL2Vector::unit(1);
  CHECK_THROWS_AS(
      apply_structured(make_completion_matrix(2), block, g),
      std::invalid_argument);
  CHECK_THROWS_AS(apply_naive(make_completion_matrix(2), block, g),
                  std::invalid_argument);

  // Non-orthonormal inputs pass silently by default but fail the check.
  const std::vector<SparseL2Vector> bad = {
      SparseL2Vector::from_entries({{0, 0.5}})};
  CHECK_NOTHROW(apply_structured(make_completion_matrix(1), bad, g));
  CHECK_THROWS_AS(
      apply_structured(make_completion_matrix(1), bad, g, 1, true),
      std::invalid_argument);
}

TEST_CASE("thread count does not change the outputs") {
  std::mt19937_64 rng(107);
  const std::uint32_t n = 16;
  std::vector<SparseL2Vector> family = rotated_family(rng, n + 1);
  const SparseL2Vector g = family.back();
  family.pop_back();

  const CompletionMatrix m = make_completion_matrix(n);
  const ApplyResult serial = apply_structured(m, family, g, 1);
  const ApplyResult parallel = apply_structured(m, family, g, 4);
  for (std::uint32_t j = 0; j < n; ++j) {
    CHECK(max_abs_diff(serial.rotated[j], parallel.rotated[j]) == 0.0);
  }
  CHECK(max_abs_diff(serial.leftover, parallel.leftover) == 0.0);
}

}  // TEST_SUITE
