#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sisr/coalition.hpp"
#include "sisr/engine.hpp"
#include "sisr/payoff_lab.hpp"
#include "sisr/shapley.hpp"

namespace sisr::io {

using Json = nlohmann::json;

/// "%.17g": enough digits for a lossless round trip of any double.
std::string format_double(double v);

/// Payoff CSV: header `mask,value`, one row per coalition, mask 0 mandatory.
/// p is the bit width of the largest mask, which must be the grand coalition.
/// `source` names the input in error messages.
PayoffTable parse_payoff_csv(std::istream& in, std::string_view source = "<input>");
PayoffTable read_payoff_csv(const std::filesystem::path& path);
std::string payoff_csv(const PayoffTable& table);

/// Two-column `value,weight` rows for the standalone isotonic command. A
/// missing weight column means unit weights.
struct WeightedSeries {
  std::vector<double> values;
  std::vector<double> weights;
};
WeightedSeries parse_weighted_csv(std::istream& in, std::string_view source = "<input>");

std::string shapley_csv(const ShapleyVector& v);

/// Solution document; `ric` adds the score curve and its formula.
Json solution_json(const SisrSolution& sol, int p, const RicResult* ric = nullptr);
/// `nu<TAB>t_hat` sorted by nu.
std::string transform_tsv(const SisrSolution& sol);

std::string design_csv(const RegressionDesign& design);
Json truth_json(const GeneratorTruth& truth);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace sisr::io
