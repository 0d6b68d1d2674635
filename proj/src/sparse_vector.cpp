#include "basisforge/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace basisforge {

SparseL2Vector SparseL2Vector::unit(std::uint32_t index) {
  return SparseL2Vector({{index, 1.0}});
}

SparseL2Vector SparseL2Vector::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!merged.empty() && merged.back().index == e.index) {
      merged.back().coef += e.coef;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return std::abs(e.coef) < kDropTol; });
  return SparseL2Vector(std::move(merged));
}

double SparseL2Vector::coef(std::uint32_t index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry& e, std::uint32_t i) { return e.index < i; });
  if (it != entries_.end() && it->index == index) return it->coef;
  return 0.0;
}

std::uint32_t SparseL2Vector::max_index() const {
  if (entries_.empty()) throw std::logic_error("max_index of the zero vector");
  return entries_.back().index;
}

double inner(const SparseL2Vector& u, const SparseL2Vector& v) {
  auto ue = u.entries();
  auto ve = v.entries();
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  while (i < ue.size() && j < ve.size()) {
    if (ue[i].index < ve[j].index) {
      ++i;
    } else if (ve[j].index < ue[i].index) {
      ++j;
    } else {
      acc += ue[i].coef * ve[j].coef;
      ++i;
      ++j;
    }
  }
  return acc;
}

double norm(const SparseL2Vector& u) {
  double acc = 0.0;
  for (const auto& e : u.entries()) acc += e.coef * e.coef;
  return std::sqrt(acc);
}

namespace {

// k-way scan over a handful of sorted streams; linear in the total support.
SparseL2Vector combine_scan(std::span<const WeightedVec> terms) {
  std::vector<std::span<const SparseL2Vector::Entry>> streams;
  std::vector<std::size_t> cursor(terms.size(), 0);
  streams.reserve(terms.size());
  std::size_t total = 0;
  for (const auto& t : terms) {
    streams.push_back(t.vec->entries());
    total += streams.back().size();
  }
  std::vector<SparseL2Vector::Entry> out;
  out.reserve(total);
  for (;;) {
    std::uint32_t next = UINT32_MAX;
    bool any = false;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      if (cursor[s] < streams[s].size()) {
        any = true;
        next = std::min(next, streams[s][cursor[s]].index);
      }
    }
    if (!any) break;
    double coef = 0.0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      if (cursor[s] < streams[s].size() && streams[s][cursor[s]].index == next) {
        coef += terms[s].weight * streams[s][cursor[s]].coef;
        ++cursor[s];
      }
    }
    if (std::abs(coef) >= kDropTol) out.push_back({next, coef});
  }
  return SparseL2Vector::from_entries(std::move(out));
}

// Collect-and-sort path for combinations of many vectors.
SparseL2Vector combine_sort(std::span<const WeightedVec> terms) {
  std::vector<SparseL2Vector::Entry> all;
  std::size_t total = 0;
  for (const auto& t : terms) total += t.vec->support_size();
  all.reserve(total);
  for (const auto& t : terms) {
    for (const auto& e : t.vec->entries()) {
      all.push_back({e.index, t.weight * e.coef});
    }
  }
  return SparseL2Vector::from_entries(std::move(all));
}

}  // namespace

SparseL2Vector linear_combination(std::span<const WeightedVec> terms) {
  std::vector<WeightedVec> live;
  live.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.weight != 0.0 && !t.vec->empty()) live.push_back(t);
  }
  if (live.empty()) return {};
  if (live.size() <= 4) return combine_scan(live);
  return combine_sort(live);
}

SparseL2Vector axpy(double a, const SparseL2Vector& u, const SparseL2Vector& v) {
  const WeightedVec terms[] = {{1.0, &v}, {a, &u}};
  return linear_combination(terms);
}

SparseL2Vector scale(double a, const SparseL2Vector& u) {
  const WeightedVec terms[] = {{a, &u}};
  return linear_combination(terms);
}

Projection project_onto_orthonormal(const SparseL2Vector& g,
                                    std::span<const SparseL2Vector> family) {
  Projection p;
  p.coefficients.reserve(family.size());
  std::vector<WeightedVec> terms;
  terms.reserve(family.size() + 1);
  terms.push_back({1.0, &g});
  for (const SparseL2Vector& f : family) {
    const double c = inner(g, f);
    p.coefficients.push_back(c);
    terms.push_back({-c, &f});
  }
  p.residual = linear_combination(terms);
  return p;
}

double max_abs_diff(const SparseL2Vector& u, const SparseL2Vector& v) {
  auto ue = u.entries();
  auto ve = v.entries();
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < ue.size() || j < ve.size()) {
    double d = 0.0;
    if (j >= ve.size() || (i < ue.size() && ue[i].index < ve[j].index)) {
      d = ue[i++].coef;
    } else if (i >= ue.size() || ve[j].index < ue[i].index) {
      d = ve[j++].coef;
    } else {
      d = ue[i++].coef - ve[j++].coef;
    }
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace basisforge
