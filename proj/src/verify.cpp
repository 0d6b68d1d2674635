#include "basisforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <Eigen/Dense>

#include "basisforge/errors.hpp"

namespace basisforge {

namespace {

const double kTwoMinusSqrt2 = 2.0 - std::sqrt(2.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Maximum dense scratch (in doubles) the Gram computation may allocate.
constexpr std::size_t kGramScratch = 400u * 1000u * 1000u;

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

// Worst |<v_i, v_j> - delta_ij| over every pair. When the total size allows,
// the vectors are packed into a dense matrix (columns remapped to the union
// of supports) and the Gram matrix is formed in one rank update; otherwise
// falls back to pairwise sparse inner products.
double gram_defect(const std::vector<const SparseL2Vector*>& family) {
  const std::size_t count = family.size();
  if (count == 0) return 0.0;

  std::map<std::uint32_t, Eigen::Index> column_of;
  for (const auto* v : family) {
    for (const auto& e : v->entries()) column_of.emplace(e.index, 0);
  }
  Eigen::Index next = 0;
  for (auto& kv : column_of) kv.second = next++;

  const std::size_t cells = count * static_cast<std::size_t>(column_of.size());
  double worst = 0.0;
  if (cells <= kGramScratch) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                                              next);
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& e : family[i]->entries()) {
        m(static_cast<Eigen::Index>(i), column_of[e.index]) = e.coef;
      }
    }
    Eigen::MatrixXd gram =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                              static_cast<Eigen::Index>(count));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(m);
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      for (Eigen::Index i = j; i < gram.rows(); ++i) {
        const double expected = (i == j) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(gram(i, j) - expected));
      }
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i; j < count; ++j) {
        const double expected = (i == j) ? 1.0 : 0.0;
        worst = std::max(worst,
                         std::abs(inner(*family[i], *family[j]) - expected));
      }
    }
  }
  return worst;
}

}  // namespace

CertificateSection completeness_certificate(std::span<const SparseL2Vector> probes,
                                            std::span<const SparseL2Vector> system,
                                            double alpha) {
  CertificateSection section;
  section.alpha = alpha;
  std::uint32_t k = 1;
  for (const auto& probe : probes) {
    const Projection p = project_onto_orthonormal(probe, system);
    const double residual = norm(p.residual);
    section.entries.push_back({k++, residual});
    if (!(residual < alpha + 1e-9)) section.pass = false;
  }
  return section;
}

BariSection bari_partial_sums(std::span<const PerturbationEntry> perturbations) {
  BariSection section;
  double running = 0.0;
  std::uint32_t current_block = 0;
  for (const auto& p : perturbations) {
    if (p.block != current_block) {
      if (current_block != 0) {
        section.increments.push_back(running);
        section.partial_sums.push_back(
            (section.partial_sums.empty() ? 0.0 : section.partial_sums.back()) +
            running);
      }
      current_block = p.block;
      running = 0.0;
    }
    running += p.norm * p.norm;
  }
  if (current_block != 0) {
    section.increments.push_back(running);
    section.partial_sums.push_back(
        (section.partial_sums.empty() ? 0.0 : section.partial_sums.back()) +
        running);
  }
  for (double inc : section.increments) {
    section.max_increment_error =
        std::max(section.max_increment_error, std::abs(inc - kTwoMinusSqrt2));
  }
  return section;
}

DecaySection decay_fit(std::span<const PerturbationEntry> perturbations,
                       const BlockSchedule& sched) {
  DecaySection section;
  if (sched.kind != BlockSchedule::Kind::Geometric) {
    section.applicable = false;
    return section;
  }
  section.applicable = true;
  const double base = static_cast<double>(sched.base);
  section.bound = std::sqrt(kTwoMinusSqrt2 * base / (base - 1.0));
  for (const auto& p : perturbations) {
    section.sup_scaled =
        std::max(section.sup_scaled,
                 std::sqrt(static_cast<double>(p.global_index)) * p.norm);
  }
  section.within = section.sup_scaled <= section.bound + 1e-6;
  return section;
}

EpsilonSection epsilon_check(std::span<const PerturbationEntry> perturbations,
                             const BlockSchedule& sched, double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  if (!sched.sizes.empty()) {
    const double floor = 1.0 / (epsilon * epsilon);
    if (static_cast<double>(sched.sizes.front()) <= floor) {
      throw ConfigError("epsilon guarantee requires the first block size to "
                        "exceed 1/epsilon^2");
    }
  }
  EpsilonSection section;
  section.epsilon = epsilon;
  for (const auto& p : perturbations) {
    section.max_norm = std::max(section.max_norm, p.norm);
  }
  section.pass = section.max_norm < epsilon;
  return section;
}

CompletionReport build_report(const CompletionResult& result) {
  const InputSystem sys = materialize_system(result.config.system);
  const BlockSchedule sched = resolve_schedule(result.config);
  if (result.steps.size() > sched.sizes.size()) {
    throw ConfigError("result has more steps than its schedule allows");
  }
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    if (result.steps[i].n != sched.sizes[i]) {
      throw ConfigError("result does not match its schedule at step " +
                        std::to_string(i + 1));
    }
  }

  CompletionReport report;
  const Tolerances& tol = result.config.tolerances;

  // Orthonormality of everything the construction emitted.
  std::vector<const SparseL2Vector*> emitted;
  for (const auto& step : result.steps) {
    for (const auto& v : step.perturbed) emitted.push_back(&v);
  }
  for (const auto& step : result.steps) emitted.push_back(&step.leftover);
  report.orthonormality_defect = gram_defect(emitted);

  // Perturbation sizes against the closed form and the strict bound.
  std::uint64_t position = 0;
  std::size_t source_at = 0;
  for (const auto& step : result.steps) {
    const double want_sq = kTwoMinusSqrt2 / static_cast<double>(step.n);
    const double strict = 1.0 / std::sqrt(static_cast<double>(step.n));
    for (std::size_t j = 0; j < step.perturbed.size(); ++j) {
      const SparseL2Vector& source = sys.vectors.at(source_at + j);
      const SparseL2Vector diff = axpy(-1.0, source, step.perturbed[j]);
      const double got_sq = inner(diff, diff);
      PerturbationEntry entry;
      entry.global_index = ++position;
      entry.block = step.k;
      entry.norm = std::sqrt(got_sq);
      entry.strict_bound = strict;
      report.perturbations.push_back(entry);
      report.closed_form_max_error =
          std::max(report.closed_form_max_error, std::abs(got_sq - want_sq));
      if (!(entry.norm < strict)) report.strict_bound_ok = false;
    }
    source_at += step.perturbed.size();
  }

  // Residual bookkeeping, step by step and against the finished system.
  const std::vector<SparseL2Vector> flat = result.flattened();
  std::vector<SparseL2Vector> probes;
  probes.reserve(result.steps.size());
  for (const auto& step : result.steps) probes.push_back(step.probe);

  std::size_t built_through = 0;
  for (const auto& step : result.steps) {
    built_through += step.perturbed.size();
    ResidualCheck check;
    check.k = step.k;
    check.fallback_used = step.fallback_used;
    check.lambda_over_sqrt2 = step.lambda * kInvSqrt2;

    std::vector<WeightedVec> terms;
    const double c = 1.0 / std::sqrt(2.0 * static_cast<double>(step.n));
    terms.reserve(step.perturbed.size() + 1);
    for (const auto& v : step.perturbed) terms.push_back({c, &v});
    terms.push_back({-1.0, &step.corrective});
    const SparseL2Vector recovery = linear_combination(terms);
    check.recovery_sq = inner(recovery, recovery);

    const std::span<const SparseL2Vector> through(flat.data(), built_through);
    check.residual_at_step =
        norm(project_onto_orthonormal(step.probe, through).residual);
    check.residual_full =
        norm(project_onto_orthonormal(step.probe, flat).residual);
    report.residual_checks.push_back(check);
  }

  report.certificate = completeness_certificate(probes, flat, result.config.alpha);
  report.bari = bari_partial_sums(report.perturbations);
  report.decay = decay_fit(report.perturbations, sched);
  if (result.config.epsilon) {
    report.epsilon =
        epsilon_check(report.perturbations, sched, *result.config.epsilon);
  }

  // Verdict table.
  auto add_check = [&report](const std::string& name, bool pass,
                             const std::string& detail) {
    report.checks.push_back({name, pass, detail});
    report.pass = report.pass && pass;
  };

  add_check("system_orthonormality",
            report.orthonormality_defect <= tol.ortho_tol,
            "max Gram defect " + format_double(report.orthonormality_defect));
  add_check("perturbation_closed_form", report.closed_form_max_error <= 1e-10,
            "max deviation " + format_double(report.closed_form_max_error));
  add_check("perturbation_strict_bound", report.strict_bound_ok,
            "every ||perturbed - source|| below 1/sqrt(n_k)");

  bool recovery_ok = true;
  bool identity_ok = true;
  bool bound_ok = true;
  for (const auto& check : report.residual_checks) {
    recovery_ok = recovery_ok && std::abs(check.recovery_sq - 0.5) <= 1e-10;
    identity_ok = identity_ok &&
                  std::abs(check.residual_at_step - check.lambda_over_sqrt2) <= 1e-9;
    bound_ok = bound_ok &&
               check.residual_full <= check.residual_at_step + 1e-9 &&
               check.residual_full <= kInvSqrt2 + 1e-9;
  }
  add_check("corrective_recovery", recovery_ok,
            "||c * block sum - corrective||^2 = 1/2 per step");
  add_check("probe_residual_identity", identity_ok,
            "step residual = lambda/sqrt(2) per step");
  add_check("probe_residual_bound", bound_ok,
            "full-system residual within lambda/sqrt(2) and 1/sqrt(2)");
  add_check("certificate", report.certificate.pass,
            "every probe residual below alpha = " +
                format_double(report.certificate.alpha));
  add_check("bari_increments", report.bari.max_increment_error <= 1e-9,
            "each block adds 2 - sqrt(2); worst error " +
                format_double(report.bari.max_increment_error));
  if (report.decay.applicable) {
    add_check("decay", report.decay.within,
              "sup sqrt(position) * norm = " + format_double(report.decay.sup_scaled) +
                  " vs bound " + format_double(report.decay.bound));
  }
  if (report.epsilon) {
    add_check("epsilon", report.epsilon->pass,
              "max perturbation " + format_double(report.epsilon->max_norm) +
                  " vs epsilon " + format_double(report.epsilon->epsilon));
  }
  return report;
}

}  // namespace basisforge
