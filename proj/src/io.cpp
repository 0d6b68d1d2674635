#include "basisforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "basisforge/errors.hpp"

namespace basisforge {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

const ojson& require_field(const ojson& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(ctx + ": missing required field \"" + key + "\"");
  }
  return *it;
}

void reject_unknown(const ojson& j, std::initializer_list<const char*> allowed,
                    const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(ctx + ": unknown field \"" + item.key() + "\"");
  }
}

std::uint64_t as_unsigned(const ojson& v, const std::string& ctx) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(ctx + ": expected a nonnegative integer");
}

std::uint32_t as_u32(const ojson& v, const std::string& ctx) {
  const std::uint64_t wide = as_unsigned(v, ctx);
  if (wide > UINT32_MAX) throw ConfigError(ctx + ": value too large");
  return static_cast<std::uint32_t>(wide);
}

double as_double(const ojson& v, const std::string& ctx) {
  if (!v.is_number()) throw ConfigError(ctx + ": expected a number");
  return v.get<double>();
}

bool as_bool(const ojson& v, const std::string& ctx) {
  if (!v.is_boolean()) throw ConfigError(ctx + ": expected a boolean");
  return v.get<bool>();
}

std::vector<SparseL2Vector> vectors_from_json(const ojson& arr,
                                              const std::string& ctx) {
  if (!arr.is_array()) throw ConfigError(ctx + ": expected an array of vectors");
  std::vector<SparseL2Vector> out;
  out.reserve(arr.size());
  for (const auto& item : arr) out.push_back(vector_from_json(item));
  return out;
}

ojson vectors_to_json(const std::vector<SparseL2Vector>& vectors) {
  ojson arr = ojson::array();
  for (const auto& v : vectors) arr.push_back(vector_to_json(v));
  return arr;
}

}  // namespace

ojson vector_to_json(const SparseL2Vector& v) {
  ojson coords = ojson::object();
  for (const auto& e : v.entries()) coords[std::to_string(e.index)] = e.coef;
  ojson j = ojson::object();
  j["coords"] = std::move(coords);
  return j;
}

SparseL2Vector vector_from_json(const ojson& j) {
  if (!j.is_object()) throw ConfigError("vector: expected an object");
  reject_unknown(j, {"coords"}, "vector");
  const ojson& coords = require_field(j, "coords", "vector");
  if (!coords.is_object()) throw ConfigError("vector: \"coords\" must be an object");
  std::vector<SparseL2Vector::Entry> entries;
  entries.reserve(coords.size());
  for (const auto& item : coords.items()) {
    const std::string& key = item.key();
    if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("vector: coordinate \"" + key +
                        "\" is not a nonnegative integer");
    }
    std::uint64_t index = 0;
    try {
      index = std::stoull(key);
    } catch (const std::exception&) {
      throw ConfigError("vector: coordinate \"" + key + "\" is out of range");
    }
    if (index > UINT32_MAX) {
      throw ConfigError("vector: coordinate \"" + key + "\" is out of range");
    }
    entries.push_back({static_cast<std::uint32_t>(index),
                       as_double(item.value(), "vector coordinate " + key)});
  }
  return SparseL2Vector::from_entries(std::move(entries));
}

RunConfig parse_run_config(const ojson& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j,
                 {"system", "schedule", "family", "epsilon", "max_steps",
                  "verify_steps", "alpha", "tolerances", "threads"},
                 "config");
  RunConfig config;

  const ojson& system = require_field(j, "system", "config");
  if (!system.is_object()) throw ConfigError("config.system: expected an object");
  const std::string system_type =
      require_field(system, "type", "config.system").get<std::string>();
  if (system_type == "reference_subset") {
    reject_unknown(system, {"type", "indices", "ambient_guard"}, "config.system");
    config.system.kind = SystemSpec::Kind::ReferenceSubset;
    const ojson& indices = require_field(system, "indices", "config.system");
    if (!indices.is_array()) {
      throw ConfigError("config.system.indices: expected an array");
    }
    for (const auto& idx : indices) {
      config.system.indices.push_back(as_u32(idx, "config.system.indices"));
    }
  } else if (system_type == "explicit") {
    reject_unknown(system, {"type", "vectors", "ambient_guard"}, "config.system");
    config.system.kind = SystemSpec::Kind::Explicit;
    config.system.vectors = vectors_from_json(
        require_field(system, "vectors", "config.system"), "config.system.vectors");
  } else {
    throw ConfigError("config.system.type: expected \"reference_subset\" or "
                      "\"explicit\"");
  }
  if (system.contains("ambient_guard")) {
    config.system.ambient_guard =
        as_u32(system["ambient_guard"], "config.system.ambient_guard");
  }

  const ojson& schedule = require_field(j, "schedule", "config");
  if (!schedule.is_object()) throw ConfigError("config.schedule: expected an object");
  const std::string schedule_type =
      require_field(schedule, "type", "config.schedule").get<std::string>();
  if (schedule_type == "explicit") {
    reject_unknown(schedule, {"type", "values"}, "config.schedule");
    config.schedule.kind = ScheduleSpec::Kind::Explicit;
    const ojson& values = require_field(schedule, "values", "config.schedule");
    if (!values.is_array()) {
      throw ConfigError("config.schedule.values: expected an array");
    }
    for (const auto& v : values) {
      config.schedule.values.push_back(as_u32(v, "config.schedule.values"));
    }
  } else if (schedule_type == "geometric") {
    reject_unknown(schedule, {"type", "n1", "base", "steps"}, "config.schedule");
    config.schedule.kind = ScheduleSpec::Kind::Geometric;
    if (schedule.contains("n1")) {
      config.schedule.first = as_u32(schedule["n1"], "config.schedule.n1");
    }
    config.schedule.base = as_u32(require_field(schedule, "base", "config.schedule"),
                                  "config.schedule.base");
    config.schedule.steps = as_u32(
        require_field(schedule, "steps", "config.schedule"), "config.schedule.steps");
  } else {
    throw ConfigError("config.schedule.type: expected \"explicit\" or \"geometric\"");
  }

  if (j.contains("family")) {
    const ojson& family = j["family"];
    if (!family.is_object()) throw ConfigError("config.family: expected an object");
    const std::string family_type =
        require_field(family, "type", "config.family").get<std::string>();
    if (family_type == "generated") {
      reject_unknown(family, {"type", "seed", "window_growth", "grid_refine_cap"},
                     "config.family");
      config.family.mode = DenseFamilySpec::Mode::Generated;
      if (family.contains("seed")) {
        config.family.seed = as_unsigned(family["seed"], "config.family.seed");
      }
      if (family.contains("window_growth")) {
        config.family.window_growth =
            as_u32(family["window_growth"], "config.family.window_growth");
      }
      if (family.contains("grid_refine_cap")) {
        config.family.grid_refine_cap =
            as_u32(family["grid_refine_cap"], "config.family.grid_refine_cap");
      }
    } else if (family_type == "explicit") {
      reject_unknown(family, {"type", "vectors"}, "config.family");
      config.family.mode = DenseFamilySpec::Mode::Explicit;
      config.family.probes = vectors_from_json(
          require_field(family, "vectors", "config.family"), "config.family.vectors");
    } else {
      throw ConfigError("config.family.type: expected \"generated\" or \"explicit\"");
    }
  }

  if (j.contains("epsilon")) {
    config.epsilon = as_double(j["epsilon"], "config.epsilon");
  }
  if (j.contains("max_steps")) {
    config.max_steps = as_u32(j["max_steps"], "config.max_steps");
  }
  if (j.contains("verify_steps")) {
    config.verify_steps = as_bool(j["verify_steps"], "config.verify_steps");
  }
  if (j.contains("alpha")) {
    config.alpha = as_double(j["alpha"], "config.alpha");
    if (config.alpha <= 0.0) throw ConfigError("config.alpha must be positive");
  }
  if (j.contains("tolerances")) {
    const ojson& tol = j["tolerances"];
    if (!tol.is_object()) throw ConfigError("config.tolerances: expected an object");
    reject_unknown(tol, {"ortho_tol", "lambda_min"}, "config.tolerances");
    if (tol.contains("ortho_tol")) {
      config.tolerances.ortho_tol =
          as_double(tol["ortho_tol"], "config.tolerances.ortho_tol");
    }
    if (tol.contains("lambda_min")) {
      config.tolerances.lambda_min =
          as_double(tol["lambda_min"], "config.tolerances.lambda_min");
    }
  }
  if (j.contains("threads")) {
    const std::uint32_t t = as_u32(j["threads"], "config.threads");
    if (t < 1) throw ConfigError("config.threads must be >= 1");
    config.threads = t;
  }
  return config;
}

ojson canonical_config_json(const RunConfig& config) {
  ojson j = ojson::object();

  ojson system = ojson::object();
  if (config.system.kind == SystemSpec::Kind::ReferenceSubset) {
    system["type"] = "reference_subset";
    system["indices"] = config.system.indices;
  } else {
    system["type"] = "explicit";
    system["vectors"] = vectors_to_json(config.system.vectors);
  }
  if (config.system.ambient_guard) {
    system["ambient_guard"] = *config.system.ambient_guard;
  }
  j["system"] = std::move(system);

  ojson schedule = ojson::object();
  if (config.schedule.kind == ScheduleSpec::Kind::Explicit) {
    schedule["type"] = "explicit";
    schedule["values"] = config.schedule.values;
  } else {
    schedule["type"] = "geometric";
    if (config.schedule.first) schedule["n1"] = *config.schedule.first;
    schedule["base"] = config.schedule.base;
    schedule["steps"] = config.schedule.steps;
  }
  j["schedule"] = std::move(schedule);

  ojson family = ojson::object();
  if (config.family.mode == DenseFamilySpec::Mode::Generated) {
    family["type"] = "generated";
    family["seed"] = config.family.seed;
    family["window_growth"] = config.family.window_growth;
    family["grid_refine_cap"] = config.family.grid_refine_cap;
  } else {
    family["type"] = "explicit";
    family["vectors"] = vectors_to_json(config.family.probes);
  }
  j["family"] = std::move(family);

  if (config.epsilon) j["epsilon"] = *config.epsilon;
  if (config.max_steps) j["max_steps"] = *config.max_steps;
  j["verify_steps"] = config.verify_steps;
  j["alpha"] = config.alpha;
  ojson tol = ojson::object();
  tol["ortho_tol"] = config.tolerances.ortho_tol;
  tol["lambda_min"] = config.tolerances.lambda_min;
  j["tolerances"] = std::move(tol);
  j["threads"] = config.threads;
  return j;
}

ojson result_to_json(const CompletionResult& result, bool include_vectors) {
  ojson j = ojson::object();
  j["step_count"] = result.steps.size();
  j["vector_payloads"] = include_vectors;
  ojson steps = ojson::array();
  for (const auto& step : result.steps) {
    ojson s = ojson::object();
    s["k"] = step.k;
    s["n"] = step.n;
    s["lambda"] = step.lambda;
    s["fallback_used"] = step.fallback_used;
    s["prior_coefficients"] = step.prior_coefficients;
    if (include_vectors) {
      s["probe"] = vector_to_json(step.probe);
      s["corrective"] = vector_to_json(step.corrective);
      ojson perturbed = ojson::array();
      for (const auto& v : step.perturbed) perturbed.push_back(vector_to_json(v));
      s["perturbed"] = std::move(perturbed);
      s["leftover"] = vector_to_json(step.leftover);
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  return j;
}

CompletionResult result_from_json(const ojson& j) {
  if (!j.is_object()) throw ConfigError("result: expected an object");
  reject_unknown(j, {"step_count", "vector_payloads", "steps"}, "result");
  CompletionResult result;
  const ojson& payloads = require_field(j, "vector_payloads", "result");
  if (!as_bool(payloads, "result.vector_payloads")) {
    throw ConfigError("result has no vector payloads (saved with --no-vectors); "
                      "it cannot be re-verified");
  }
  const ojson& steps = require_field(j, "steps", "result");
  if (!steps.is_array()) throw ConfigError("result.steps: expected an array");
  for (const auto& s : steps) {
    reject_unknown(s,
                   {"k", "n", "lambda", "fallback_used", "prior_coefficients",
                    "probe", "corrective", "perturbed", "leftover"},
                   "result.steps[]");
    StepRecord rec;
    rec.k = as_u32(require_field(s, "k", "result step"), "result step k");
    rec.n = as_u32(require_field(s, "n", "result step"), "result step n");
    rec.lambda = as_double(require_field(s, "lambda", "result step"), "lambda");
    rec.fallback_used =
        as_bool(require_field(s, "fallback_used", "result step"), "fallback_used");
    for (const auto& c : require_field(s, "prior_coefficients", "result step")) {
      rec.prior_coefficients.push_back(as_double(c, "prior_coefficients"));
    }
    rec.probe = vector_from_json(require_field(s, "probe", "result step"));
    rec.corrective = vector_from_json(require_field(s, "corrective", "result step"));
    for (const auto& v : require_field(s, "perturbed", "result step")) {
      rec.perturbed.push_back(vector_from_json(v));
    }
    rec.leftover = vector_from_json(require_field(s, "leftover", "result step"));
    result.steps.push_back(std::move(rec));
  }
  return result;
}

ojson report_to_json(const CompletionReport& report) {
  ojson j = ojson::object();
  j["orthonormality_defect"] = report.orthonormality_defect;

  ojson perturbation = ojson::object();
  perturbation["count"] = report.perturbations.size();
  perturbation["closed_form_max_error"] = report.closed_form_max_error;
  perturbation["strict_bound_ok"] = report.strict_bound_ok;
  ojson entries = ojson::array();
  for (const auto& p : report.perturbations) {
    ojson e = ojson::object();
    e["position"] = p.global_index;
    e["block"] = p.block;
    e["norm"] = p.norm;
    e["strict_bound"] = p.strict_bound;
    entries.push_back(std::move(e));
  }
  perturbation["entries"] = std::move(entries);
  j["perturbation"] = std::move(perturbation);

  ojson residuals = ojson::array();
  for (const auto& r : report.residual_checks) {
    ojson e = ojson::object();
    e["k"] = r.k;
    e["recovery_sq"] = r.recovery_sq;
    e["lambda_over_sqrt2"] = r.lambda_over_sqrt2;
    e["residual_at_step"] = r.residual_at_step;
    e["residual_full"] = r.residual_full;
    e["fallback_used"] = r.fallback_used;
    residuals.push_back(std::move(e));
  }
  j["residual_checks"] = std::move(residuals);

  ojson certificate = ojson::object();
  certificate["alpha"] = report.certificate.alpha;
  ojson cert_entries = ojson::array();
  for (const auto& e : report.certificate.entries) {
    ojson c = ojson::object();
    c["k"] = e.k;
    c["residual"] = e.residual;
    cert_entries.push_back(std::move(c));
  }
  certificate["residuals"] = std::move(cert_entries);
  certificate["verdict"] = report.certificate.pass ? "PASS" : "FAIL";
  certificate["scope"] = "finite sample: certifies the probes this run consumed";
  j["certificate"] = std::move(certificate);

  ojson bari = ojson::object();
  bari["increments"] = report.bari.increments;
  bari["partial_sums"] = report.bari.partial_sums;
  bari["max_increment_error"] = report.bari.max_increment_error;
  j["bari"] = std::move(bari);

  ojson decay = ojson::object();
  decay["applicable"] = report.decay.applicable;
  if (report.decay.applicable) {
    decay["sup_scaled"] = report.decay.sup_scaled;
    decay["bound"] = report.decay.bound;
    decay["within"] = report.decay.within;
  }
  j["decay"] = std::move(decay);

  if (report.epsilon) {
    ojson eps = ojson::object();
    eps["epsilon"] = report.epsilon->epsilon;
    eps["max_norm"] = report.epsilon->max_norm;
    eps["verdict"] = report.epsilon->pass ? "PASS" : "FAIL";
    j["epsilon"] = std::move(eps);
  }

  ojson checks = ojson::array();
  for (const auto& c : report.checks) {
    ojson line = ojson::object();
    line["name"] = c.name;
    line["pass"] = c.pass;
    line["detail"] = c.detail;
    checks.push_back(std::move(line));
  }
  j["checks"] = std::move(checks);
  j["verdict"] = report.pass ? "PASS" : "FAIL";
  return j;
}

std::string report_to_text(const CompletionReport& report) {
  std::size_t width = 8;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << c.name << std::string(width - c.name.size() + 2, ' ')
        << (c.pass ? "PASS" : "FAIL") << "  " << c.detail << "\n";
  }
  out << "overall" << std::string(width - 7 + 2, ' ')
      << (report.pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::string perturbations_to_csv(const CompletionReport& report) {
  std::string out = "position,block,norm,strict_bound\n";
  for (const auto& p : report.perturbations) {
    out += std::to_string(p.global_index);
    out += ',';
    out += std::to_string(p.block);
    out += ',';
    out += fmt17(p.norm);
    out += ',';
    out += fmt17(p.strict_bound);
    out += '\n';
  }
  return out;
}

std::string matrix_to_csv(const CompletionMatrix& m) {
  const Eigen::MatrixXd a = materialize(m);
  std::string out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out += ',';
      out += fmt17(a(i, j));
    }
    out += '\n';
  }
  return out;
}

ojson document_to_json(const CompletionResult& result,
                       const CompletionReport& report, bool include_vectors) {
  ojson j = ojson::object();
  j["config"] = canonical_config_json(result.config);
  j["result"] = result_to_json(result, include_vectors);
  j["report"] = report_to_json(report);
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open \"" + path + "\" for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out.good()) throw ConfigError("failed writing \"" + path + "\"");
}

ojson parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error: " + e.what());
  }
}

}  // namespace basisforge
