#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "basisforge/verify.hpp"

using namespace basisforge;

namespace {

RunConfig even_run_config(std::uint32_t vectors) {
  RunConfig config;
  config.system.kind = SystemSpec::Kind::ReferenceSubset;
  for (std::uint32_t n = 1; n <= vectors; ++n) {
    config.system.indices.push_back(2 * n);
  }
  config.schedule.kind = ScheduleSpec::Kind::Geometric;
  config.schedule.first = 2;
  config.schedule.base = 2;
  config.schedule.steps = 2;
  return config;
}

const CheckLine* find_check(const CompletionReport& report, const std::string& name) {
  for (const auto& line : report.checks) {
    if (line.name == name) return &line;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("certificate accepts represented probes and rejects orthogonal ones") {
  const std::vector<SparseL2Vector> system = {SparseL2Vector::unit(0)};

  const std::vector<SparseL2Vector> inside = {SparseL2Vector::unit(0)};
  const CertificateSection good = completeness_certificate(inside, system, 0.5);
  CHECK(good.pass);
  REQUIRE(good.entries.size() == 1);
  CHECK(good.entries[0].residual <= 1e-12);

  const std::vector<SparseL2Vector> outside = {SparseL2Vector::unit(1)};
  const CertificateSection bad =
      completeness_certificate(outside, system, std::sqrt(0.5));
  CHECK(!bad.pass);
  CHECK(bad.entries[0].residual == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("certificate boundary case sits exactly at alpha") {
  // probe = (e_0 + e_1)/sqrt(2) against span{e_0}: residual is exactly
  // 1/sqrt(2), which passes an alpha of 1/sqrt(2) by the comparison slack.
  const double r = std::sqrt(0.5);
  const std::vector<SparseL2Vector> system = {SparseL2Vector::unit(0)};
  const std::vector<SparseL2Vector> probes = {
      SparseL2Vector::from_entries({{0, r}, {1, r}})};

  const CertificateSection section = completeness_certificate(probes, system, r);
  CHECK(section.pass);
  CHECK(section.entries[0].residual == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("certificate residuals shrink as the system grows") {
  const std::vector<SparseL2Vector> probes = {SparseL2Vector::from_entries(
      {{0, 0.5}, {1, 0.5}, {2, 0.5}, {3, 0.5}})};
  std::vector<SparseL2Vector> system;
  double previous = 2.0;
  for (std::uint32_t i = 0; i < 4; ++i) {
    system.push_back(SparseL2Vector::unit(i));
    const CertificateSection section = completeness_certificate(probes, system, 2.0);
    CHECK(section.entries[0].residual <= previous + 1e-12);
    previous = section.entries[0].residual;
  }
  CHECK(previous <= 1e-12);
}

TEST_CASE("blockwise increments accumulate a fixed amount per block") {
  const double unit_total = 2.0 - std::sqrt(2.0);
  std::vector<PerturbationEntry> entries;
  entries.push_back({1, 1, std::sqrt(unit_total / 1.0), 1.0});
  entries.push_back({2, 2, std::sqrt(unit_total / 2.0), std::sqrt(0.5)});
  entries.push_back({3, 2, std::sqrt(unit_total / 2.0), std::sqrt(0.5)});

  const BariSection bari = bari_partial_sums(entries);
  REQUIRE(bari.increments.size() == 2);
  CHECK(bari.increments[0] == doctest::Approx(0.5857864376269049).epsilon(1e-14));
  CHECK(bari.increments[1] == doctest::Approx(0.5857864376269049).epsilon(1e-14));
  REQUIRE(bari.partial_sums.size() == 2);
  CHECK(bari.partial_sums[0] == doctest::Approx(0.5857864376269049).epsilon(1e-14));
  CHECK(bari.partial_sums[1] == doctest::Approx(1.1715728752538098).epsilon(1e-14));
  CHECK(bari.max_increment_error <= 1e-14);
}

TEST_CASE("decay is reported only for geometric schedules") {
  std::vector<PerturbationEntry> entries;
  entries.push_back({1, 1, 0.5, 1.0});

  const DecaySection off = decay_fit(entries, explicit_schedule({1}));
  CHECK(!off.applicable);

  const DecaySection on = decay_fit(entries, geometric_schedule(1, 2, 1));
  CHECK(on.applicable);
  CHECK(on.bound == doctest::Approx(1.0823922002923940).epsilon(1e-14));
  CHECK(on.sup_scaled == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(on.within);
}

TEST_CASE("a doubling run keeps scaled perturbations under the decay bound") {
  const CompletionResult result = run(even_run_config(6));
  const CompletionReport report = build_report(result);
  CHECK(report.decay.applicable);
  CHECK(report.decay.within);
  CHECK(report.decay.bound == doctest::Approx(1.0823922002923940).epsilon(1e-12));
  // Largest contribution comes from the last position of the last block:
  // sqrt(6) * sqrt((2 - sqrt(2))/4).
  const double expected = std::sqrt(6.0 * (2.0 - std::sqrt(2.0)) / 4.0);
  CHECK(report.decay.sup_scaled == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("uniform guarantee checks demand an adequate first block") {
  const double unit_total = 2.0 - std::sqrt(2.0);
  std::vector<PerturbationEntry> entries;
  for (std::uint64_t i = 0; i < 4; ++i) {
    entries.push_back({i + 1, 1, std::sqrt(unit_total / 128.0),
                       1.0 / std::sqrt(128.0)});
  }

  const EpsilonSection section =
      epsilon_check(entries, geometric_schedule(128, 2, 1), 0.1);
  CHECK(section.pass);
  CHECK(section.max_norm == doctest::Approx(0.06764951251827461).epsilon(1e-9));

  CHECK_THROWS_AS(epsilon_check(entries, geometric_schedule(64, 2, 1), 0.1),
                  ConfigError);
  CHECK_THROWS_AS(epsilon_check(entries, geometric_schedule(128, 2, 1), 0.0),
                  ConfigError);
}

TEST_CASE("the full report passes on a healthy run") {
  const CompletionResult result = run(even_run_config(6));
  const CompletionReport report = build_report(result);

  CHECK(report.pass);
  CHECK(report.orthonormality_defect <= 1e-12);
  CHECK(report.closed_form_max_error <= 1e-10);
  CHECK(report.strict_bound_ok);

  REQUIRE(report.perturbations.size() == 6);
  for (std::size_t i = 0; i < report.perturbations.size(); ++i) {
    CHECK(report.perturbations[i].global_index == i + 1);
    CHECK(report.perturbations[i].norm < report.perturbations[i].strict_bound);
  }
  CHECK(report.perturbations[0].block == 1);
  CHECK(report.perturbations[2].block == 2);
  CHECK(report.perturbations[0].strict_bound ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(report.perturbations[2].strict_bound == doctest::Approx(0.5).epsilon(1e-14));

  REQUIRE(report.residual_checks.size() == 2);
  for (const auto& rc : report.residual_checks) {
    CHECK(std::abs(rc.recovery_sq - 0.5) <= 1e-10);
    CHECK(std::abs(rc.residual_at_step - rc.lambda_over_sqrt2) <= 1e-9);
    CHECK(rc.residual_full <= rc.residual_at_step + 1e-9);
    CHECK(rc.residual_full <= std::sqrt(0.5) + 1e-9);
  }

  CHECK(report.certificate.pass);
  CHECK(report.certificate.alpha == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(report.bari.max_increment_error <= 1e-9);

  for (const char* name :
       {"system_orthonormality", "perturbation_closed_form",
        "perturbation_strict_bound", "corrective_recovery",
        "probe_residual_identity", "probe_residual_bound", "certificate",
        "bari_increments", "decay"}) {
    const CheckLine* line = find_check(report, name);
    REQUIRE_MESSAGE(line != nullptr, name);
    CHECK_MESSAGE(line->pass, name);
  }
  CHECK(find_check(report, "epsilon") == nullptr);
}

TEST_CASE("an epsilon run adds the epsilon verdict line") {
  RunConfig config = even_run_config(2);
  config.schedule.first.reset();
  config.schedule.steps = 1;
  config.epsilon = 1.0;

  const CompletionReport report = build_report(run(config));
  REQUIRE(report.epsilon.has_value());
  const CheckLine* line = find_check(report, "epsilon");
  REQUIRE(line != nullptr);
  CHECK(line->pass);
}

TEST_CASE("tampered output vectors make the report fail") {
  CompletionResult result = run(even_run_config(6));
  result.steps[0].perturbed[0] = scale(1.02, result.steps[0].perturbed[0]);

  const CompletionReport report = build_report(result);
  CHECK(!report.pass);
  const CheckLine* line = find_check(report, "system_orthonormality");
  REQUIRE(line != nullptr);
  CHECK(!line->pass);
}

TEST_CASE("report rejects results that disagree with their schedule") {
  CompletionResult result = run(even_run_config(6));
  result.steps[1].n = 3;
  CHECK_THROWS_AS(build_report(result), ConfigError);
}

}  // TEST_SUITE
