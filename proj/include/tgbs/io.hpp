#pragma once

// JSON file formats. Every double is written as its shortest round-trip
// decimal, so re-reading a file gives back the same bits. hbar = 2.
//
//   state         {"hbar": 2, "ordering": "xxpp", "modes": l, "V": [[...]], "r": [...]}
//   matrix        {"re": [[...]], "im": [[...]]}, or a plain real [[...]]
//   distribution  [{"pattern": [...], "p": ...}, ...]
//   samples       one {"pattern": [...], "seed": s, "substream": i} per line
//
// Readers throw FormatError on anything malformed.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tgbs/cv.hpp"
#include "tgbs/gaussian.hpp"
#include "tgbs/probabilities.hpp"
#include "tgbs/sampler.hpp"

namespace tgbs::io {

using Json = nlohmann::ordered_json;

Json to_json(const QuadratureState& state);
QuadratureState state_from_json(const Json& j);

Json to_json(const ComplexMatrix& M);
ComplexMatrix complex_matrix_from_json(const Json& j);

Json to_json(const ClickPattern& pattern);
Json to_json(const ValidationReport& report);
Json to_json(const ThresholdDistribution& dist);
Json to_json(const CollisionReport& report);
Json to_json(const HaarCollisionResult& result);
/// The trace adds order, per-step no-click probabilities and branch counts.
Json to_json(const SampleRecord& record, bool trace = false);
Json to_json(const PipelineRecord& record);
Json to_json(const GaussianMixture& mixture);

Json read_json(const std::filesystem::path& path);
QuadratureState read_state(const std::filesystem::path& path);
ComplexMatrix read_complex_matrix(const std::filesystem::path& path);

/// Writes text to a file, or to stdout when path is empty or "-".
void write_text(const std::filesystem::path& path, const std::string& text);

/// Compact single-line JSON followed by a newline.
std::string line(const Json& j);
/// A JSON array with one compact element per line.
std::string array_lines(const Json& array);

}  // namespace tgbs::io
