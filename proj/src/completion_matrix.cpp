#include "basisforge/completion_matrix.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>

#include "basisforge/tolerances.hpp"

namespace basisforge {

double completion_gamma(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("completion matrix requires n >= 1");
  return 1.0 / ((2.0 + std::sqrt(2.0)) * static_cast<double>(n));
}

CompletionMatrix make_completion_matrix(std::uint32_t n) {
  return CompletionMatrix{n, completion_gamma(n)};
}

Eigen::MatrixXd materialize(const CompletionMatrix& m) {
  if (m.n == 0) throw std::invalid_argument("completion matrix requires n >= 1");
  if (m.n > kMaterializeGuard) {
    throw std::length_error("materialize: block size " + std::to_string(m.n) +
                            " exceeds the dense-allocation guard " +
                            std::to_string(kMaterializeGuard));
  }
  const auto n = static_cast<Eigen::Index>(m.n);
  const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(m.n));
  const double d = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n + 1, n + 1, -m.gamma);
  a.topLeftCorner(n, n).diagonal().setConstant(1.0 - m.gamma);
  a.col(n).head(n).setConstant(c);
  a.row(n).head(n).setConstant(-c);
  a(n, n) = d;
  return a;
}

double orthogonality_defect(const CompletionMatrix& m) {
  const Eigen::MatrixXd a = materialize(m);
  const auto dim = a.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = j; i < dim; ++i) {
      const double expected = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(gram(i, j) - expected));
    }
  }
  return worst;
}

namespace {

void check_orthonormal_inputs(std::span<const SparseL2Vector> block,
                              const SparseL2Vector& g) {
  std::vector<const SparseL2Vector*> all;
  all.reserve(block.size() + 1);
  for (const auto& v : block) all.push_back(&v);
  all.push_back(&g);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i; j < all.size(); ++j) {
      const double expected = (i == j) ? 1.0 : 0.0;
      if (std::abs(inner(*all[i], *all[j]) - expected) > kOrthoTol) {
        throw std::invalid_argument(
            "apply_structured: inputs are not orthonormal within tolerance");
      }
    }
  }
}

}  // namespace

ApplyResult apply_structured(const CompletionMatrix& m,
                             std::span<const SparseL2Vector> block,
                             const SparseL2Vector& g,
                             unsigned threads,
                             bool check_inputs) {
  if (block.size() != m.n) {
    throw std::invalid_argument("apply_structured: block length " +
                                std::to_string(block.size()) +
                                " does not match matrix size " + std::to_string(m.n));
  }
  if (check_inputs) check_orthonormal_inputs(block, g);

  const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(m.n));
  const double d = 1.0 / std::sqrt(2.0);

  // Shared running sum of the whole block; every output row reuses it.
  std::vector<WeightedVec> sum_terms;
  sum_terms.reserve(block.size());
  for (const auto& v : block) sum_terms.push_back({1.0, &v});
  const SparseL2Vector block_sum = linear_combination(sum_terms);

  ApplyResult out;
  out.rotated.resize(block.size());

  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const WeightedVec terms[] = {
          {1.0, &block[j]}, {-m.gamma, &block_sum}, {c, &g}};
      out.rotated[j] = linear_combination(terms);
    }
  };

  const std::size_t rows = block.size();
  if (threads <= 1 || rows < 2 * threads) {
    fill_rows(0, rows);
  } else {
    const std::size_t chunk = (rows + threads - 1) / threads;
    std::vector<std::future<void>> workers;
    for (std::size_t begin = 0; begin < rows; begin += chunk) {
      const std::size_t end = std::min(rows, begin + chunk);
      workers.push_back(
          std::async(std::launch::async, fill_rows, begin, end));
    }
    for (auto& w : workers) w.get();
  }

  const WeightedVec leftover_terms[] = {{-c, &block_sum}, {d, &g}};
  out.leftover = linear_combination(leftover_terms);
  return out;
}

ApplyResult apply_naive(const CompletionMatrix& m,
                        std::span<const SparseL2Vector> block,
                        const SparseL2Vector& g) {
  if (block.size() != m.n) {
    throw std::invalid_argument("apply_naive: block length does not match matrix size");
  }
  const Eigen::MatrixXd a = materialize(m);
  const auto n = static_cast<Eigen::Index>(m.n);

  ApplyResult out;
  out.rotated.resize(m.n);
  for (Eigen::Index row = 0; row <= n; ++row) {
    SparseL2Vector acc;
    for (Eigen::Index col = 0; col < n; ++col) {
      acc = axpy(a(row, col), block[static_cast<std::size_t>(col)], acc);
    }
    acc = axpy(a(row, n), g, acc);
    if (row < n) {
      out.rotated[static_cast<std::size_t>(row)] = std::move(acc);
    } else {
      out.leftover = std::move(acc);
    }
  }
  return out;
}

}  // namespace basisforge
