#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "basisforge/sparse_vector.hpp"

using namespace basisforge;

namespace {

SparseL2Vector make(std::initializer_list<SparseL2Vector::Entry> entries) {
  return SparseL2Vector::from_entries(entries);
}

// Deterministic sparse vector with a handful of grid coefficients.
SparseL2Vector random_vector(std::mt19937_64& rng, std::uint32_t max_coord) {
  std::vector<SparseL2Vector::Entry> entries;
  const std::size_t count = 1 + rng() % 6;
  for (std::size_t i = 0; i < count; ++i) {
    const auto coord = static_cast<std::uint32_t>(rng() % (max_coord + 1));
    const double coef = static_cast<double>(static_cast<std::int64_t>(rng() % 65) - 32) / 16.0;
    entries.push_back({coord, coef});
  }
  return SparseL2Vector::from_entries(std::move(entries));
}

}  // namespace

TEST_SUITE("l2core") {

TEST_CASE("construction sorts, merges duplicates, and drops dust") {
  const SparseL2Vector v = make({{7, 0.25}, {2, 1.0}, {7, 0.75}, {4, 1e-16}});
  REQUIRE(v.support_size() == 2);
  CHECK(v.entries()[0].index == 2);
  CHECK(v.entries()[0].coef == 1.0);
  CHECK(v.entries()[1].index == 7);
  CHECK(v.entries()[1].coef == 1.0);
  CHECK(v.coef(4) == 0.0);
  CHECK(v.max_index() == 7);
}

TEST_CASE("iteration yields strictly increasing coordinates") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const SparseL2Vector v = random_vector(rng, 40);
    const auto entries = v.entries();
    for (std::size_t i = 1; i < entries.size(); ++i) {
      CHECK(entries[i - 1].index < entries[i].index);
    }
  }
}

TEST_CASE("inner products of reference vectors") {
  const SparseL2Vector e0 = SparseL2Vector::unit(0);
  const SparseL2Vector e1 = SparseL2Vector::unit(1);
  CHECK(inner(e0, e0) == 1.0);
  CHECK(inner(e0, e1) == 0.0);

  // Hand value: only the shared coordinate 2 contributes, 0.8 * 0.8.
  const SparseL2Vector u = make({{0, 0.6}, {2, 0.8}});
  const SparseL2Vector w = make({{2, 0.8}});
  CHECK(inner(u, w) == doctest::Approx(0.64).epsilon(1e-15));
}

TEST_CASE("norms") {
  CHECK(norm(SparseL2Vector{}) == 0.0);
  CHECK(norm(SparseL2Vector::unit(5)) == 1.0);
  // 3-4-5 triangle.
  CHECK(norm(make({{0, 3.0}, {1, 4.0}})) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("axpy merges and cancels exactly") {
  const SparseL2Vector e0 = SparseL2Vector::unit(0);
  const SparseL2Vector e1 = SparseL2Vector::unit(1);

  const SparseL2Vector sum = axpy(1.0, e0, e1);
  CHECK(sum.support_size() == 2);
  CHECK(sum.coef(0) == 1.0);
  CHECK(sum.coef(1) == 1.0);

  const SparseL2Vector zero = axpy(-1.0, sum, sum);
  CHECK(zero.empty());
  CHECK(norm(zero) == 0.0);

  const SparseL2Vector one = axpy(0.5, e0, scale(0.5, e0));
  REQUIRE(one.support_size() == 1);
  CHECK(one.coef(0) == 1.0);
}

TEST_CASE("linear_combination skips zero weights and empty vectors") {
  const SparseL2Vector e0 = SparseL2Vector::unit(0);
  const SparseL2Vector nothing;
  const WeightedVec terms[] = {{0.0, &e0}, {2.0, &nothing}};
  CHECK(linear_combination(terms).empty());
}

TEST_CASE("linear_combination over many vectors matches repeated axpy") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SparseL2Vector> vs;
    std::vector<double> ws;
    for (int i = 0; i < 9; ++i) {
      vs.push_back(random_vector(rng, 30));
      ws.push_back(static_cast<double>(static_cast<std::int64_t>(rng() % 9) - 4) / 2.0);
    }
    std::vector<WeightedVec> terms;
    for (int i = 0; i < 9; ++i) terms.push_back({ws[i], &vs[i]});
    const SparseL2Vector combined = linear_combination(terms);

    SparseL2Vector acc;
    for (int i = 0; i < 9; ++i) acc = axpy(ws[i], vs[i], acc);
    CHECK(max_abs_diff(combined, acc) <= 1e-12);
  }
}

TEST_CASE("projection onto a single reference vector") {
  const double r = std::sqrt(0.5);
  const SparseL2Vector g = make({{0, r}, {1, r}});
  const std::vector<SparseL2Vector> family = {SparseL2Vector::unit(0)};

  const Projection p = project_onto_orthonormal(g, family);
  REQUIRE(p.coefficients.size() == 1);
  CHECK(p.coefficients[0] == doctest::Approx(r).epsilon(1e-15));
  REQUIRE(p.residual.support_size() == 1);
  CHECK(p.residual.coef(1) == doctest::Approx(r).epsilon(1e-15));
}

TEST_CASE("projection onto an empty family is the identity") {
  const SparseL2Vector g = make({{3, 0.6}, {9, 0.8}});
  const Projection p = project_onto_orthonormal(g, {});
  CHECK(p.coefficients.empty());
  CHECK(max_abs_diff(p.residual, g) == 0.0);
}

TEST_CASE("Cauchy-Schwarz holds with slack for roundoff") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const SparseL2Vector u = random_vector(rng, 25);
    const SparseL2Vector v = random_vector(rng, 25);
    CHECK(std::abs(inner(u, v)) <= norm(u) * norm(v) + 1e-12);
  }
}

TEST_CASE("Parseval split against reference families") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    // Orthonormal family: distinct reference vectors.
    std::vector<SparseL2Vector> family;
    for (std::uint32_t i = 0; i < 6; ++i) {
      family.push_back(SparseL2Vector::unit(i * 3 + static_cast<std::uint32_t>(rng() % 2)));
    }
    const SparseL2Vector g = random_vector(rng, 20);
    if (g.empty()) continue;
    const Projection p = project_onto_orthonormal(g, family);

    double coef_sq = 0.0;
    for (double c : p.coefficients) coef_sq += c * c;
    const double lhs = inner(g, g);
    const double rhs = coef_sq + inner(p.residual, p.residual);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, lhs));
  }
}

TEST_CASE("projection residual re-projects to nothing") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SparseL2Vector> family;
    for (std::uint32_t i = 0; i < 5; ++i) family.push_back(SparseL2Vector::unit(2 * i));
    const SparseL2Vector g = random_vector(rng, 15);
    const Projection p = project_onto_orthonormal(g, family);
    const Projection again = project_onto_orthonormal(p.residual, family);
    for (double c : again.coefficients) {
      CHECK(std::abs(c) <= 1e-10 * std::max(1.0, norm(g)));
    }
  }
}

TEST_CASE("max_abs_diff covers both supports") {
  const SparseL2Vector u = make({{0, 1.0}, {2, 0.5}});
  const SparseL2Vector v = make({{2, 0.5}, {7, -0.25}});
  CHECK(max_abs_diff(u, v) == 1.0);
  CHECK(max_abs_diff(u, u) == 0.0);
}

}  // TEST_SUITE
