#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cxls/dist.hpp"
#include "cxls/dual.hpp"
#include "cxls/extended_real.hpp"
#include "cxls/loss.hpp"
#include "cxls/measures.hpp"

namespace cxls::io {

using nlohmann::json;

/// Reads and parses a JSON document. ParseError on I/O or syntax failure.
json read_json(const std::filesystem::path& path);

/// {"points": [...], "probs": [...]}: points strictly increasing, probs
/// positive, all values finite.
DiscreteDistribution parse_distribution(const json& doc);
json to_json(const DiscreteDistribution& f);

/// A number or the string "-inf".
ExtendedReal parse_extended(const json& value, const char* field);
json to_json(const ExtendedReal& x);

/// {"kind": "linear" | "expectile" | "log_shift" | "sqrt_shift" |
///           "zero_above_linear_below" | "piecewise", ...}
/// with "alpha" for expectile, "knots": [[x, y], ...] for piecewise and an
/// optional "K" (number or "-inf"; required for log_shift and sqrt_shift).
ExtendedLossFunction parse_loss(const json& doc);

/// {"components": [{"levels": [...], "weights": [...], "penalty": c}, ...]}
KusuokaSpec parse_kusuoka(const json& doc);

/// {"probs": [...], "variables": {"name": [...], ...}}
struct FiniteSpaceDocument {
    FiniteSpace space;
    std::map<std::string, RandomVariable> variables;
};
FiniteSpaceDocument parse_finite_space(const json& doc);

/// Array of q-vectors on `space`.
std::vector<Density> parse_density_family(const json& doc, const FiniteSpace& space);

/// One number per line; blank lines are skipped.
std::vector<double> read_number_stream(const std::filesystem::path& path);

/// "start:stop:step", inclusive of stop within half a step.
std::vector<double> parse_grid(std::string_view text);

/// "0,1;2,3" -> {{0,1},{2,3}}.
Partition parse_partition(std::string_view text, std::size_t states);

}  // namespace cxls::io
