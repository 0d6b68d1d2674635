#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "basisforge/completion_matrix.hpp"
#include "basisforge/config.hpp"
#include "basisforge/driver.hpp"
#include "basisforge/verify.hpp"

namespace basisforge {

/// All documents use insertion-ordered JSON so a given run serializes to
/// byte-identical output every time.
using ojson = nlohmann::ordered_json;

/// {"coords": {"<index>": coefficient, ...}} with indices ascending.
ojson vector_to_json(const SparseL2Vector& v);
SparseL2Vector vector_from_json(const ojson& j);

/// Parses a run configuration, rejecting unknown keys. Throws ConfigError.
RunConfig parse_run_config(const ojson& j);

/// Canonical echo: fixed key order, defaults filled in, optionals omitted
/// when unset. parse(canonical(c)) == c and the bytes are reproducible.
ojson canonical_config_json(const RunConfig& config);

/// Step-by-step construction output. include_vectors=false drops the vector
/// payloads (probe, corrective, perturbed, leftover) from each step.
ojson result_to_json(const CompletionResult& result, bool include_vectors);

/// Rebuilds a result from a saved document. Requires vector payloads.
CompletionResult result_from_json(const ojson& j);

ojson report_to_json(const CompletionReport& report);

/// Human-readable verdict table, one aligned line per check.
std::string report_to_text(const CompletionReport& report);

/// "position,block,norm,strict_bound" rows, 17 significant digits.
std::string perturbations_to_csv(const CompletionReport& report);

/// Dense rows of the mixing matrix, comma-separated, 17 significant digits.
std::string matrix_to_csv(const CompletionMatrix& m);

/// Full run document: {"config": ..., "result": ..., "report": ...}.
ojson document_to_json(const CompletionResult& result,
                       const CompletionReport& report, bool include_vectors);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Parses text as JSON, wrapping parse failures in ConfigError.
ojson parse_json_text(const std::string& text, const std::string& origin);

}  // namespace basisforge
