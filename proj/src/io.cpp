#include "sisr/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sisr/error.hpp"

namespace sisr::io {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::string_view source, std::size_t line,
                              const std::string& what) {
  fail(ErrorKind::kData,
       std::string(source) + ":" + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view field, std::string_view source, std::size_t line) {
  // strtod accepts forms (inf, hex) that from_chars on older libstdc++ may
  // not; the whole field must be consumed either way.
  const std::string buf(field);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    parse_error(source, line, "cannot parse '" + buf + "' as a number");
  }
  return v;
}

std::uint64_t parse_mask(std::string_view field, std::string_view source,
                         std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    parse_error(source, line,
                "mask '" + std::string(field) + "' is not a non-negative integer");
  }
  return v;
}

template <class Row>
void for_each_row(std::istream& in, std::string_view source,
                  std::string_view expected_header, Row&& row) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!header) {
      header = true;
      if (view.rfind(expected_header, 0) == 0) continue;
      // Headerless files are accepted when the first row is numeric.
    }
    row(split_commas(view), lineno);
  }
  if (!header) {
    fail(ErrorKind::kData, std::string(source) + ": no rows");
  }
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json options_json(const SolveOptions& o) {
  return {{"sparsity", o.sparsity},
          {"outer_tol", o.outer_tol},
          {"max_outer", o.max_outer},
          {"inner_tol", o.inner_tol},
          {"inner_max_iter", o.inner_max_iter},
          {"infinite_multiplier", o.infinite_multiplier},
          {"rho_inflation", o.rho_inflation},
          {"init_scale", o.init_scale}};
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

PayoffTable parse_payoff_csv(std::istream& in, std::string_view source) {
  std::vector<PayoffEntry> entries;
  std::uint64_t largest = 0;
  for_each_row(in, source, "mask", [&](const auto& fields, std::size_t line) {
    if (fields.size() != 2) {
      parse_error(source, line,
                  "expected 2 fields (mask,value), found " +
                      std::to_string(fields.size()));
    }
    const std::uint64_t mask = parse_mask(fields[0], source, line);
    if (mask >= (std::uint64_t{1} << kMaxFeatures)) {
      parse_error(source, line,
                  "mask " + std::to_string(mask) + " needs more than " +
                      std::to_string(kMaxFeatures) + " features");
    }
    const double value = parse_real(fields[1], source, line);
    largest = std::max(largest, mask);
    entries.push_back({CoalitionMask{static_cast<std::uint32_t>(mask), 0}, value});
  });
  if (entries.empty()) {
    fail(ErrorKind::kData, std::string(source) + ": no payoff rows");
  }
  const int p = std::max(1, static_cast<int>(std::bit_width(largest)));
  for (auto& e : entries) e.mask.p = p;
  try {
    return PayoffTable::from_entries(p, std::move(entries), false);
  } catch (const Error& e) {
    fail(ErrorKind::kData, std::string(source) + ": " + e.what());
  }
}

PayoffTable read_payoff_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kData, "cannot open " + path.string());
  return parse_payoff_csv(in, path.string());
}

std::string payoff_csv(const PayoffTable& table) {
  std::string out = "mask,value\n";
  for (const auto& e : table.entries()) {
    out += std::to_string(e.mask.bits);
    out += ',';
    out += format_double(e.value);
    out += '\n';
  }
  return out;
}

WeightedSeries parse_weighted_csv(std::istream& in, std::string_view source) {
  WeightedSeries s;
  for_each_row(in, source, "value", [&](const auto& fields, std::size_t line) {
    if (fields.empty() || fields.size() > 2) {
      parse_error(source, line, "expected value[,weight]");
    }
    s.values.push_back(parse_real(fields[0], source, line));
    s.weights.push_back(fields.size() == 2 ? parse_real(fields[1], source, line) : 1.0);
  });
  return s;
}

std::string shapley_csv(const ShapleyVector& v) {
  std::string out = "feature,value\n";
  for (Eigen::Index j = 0; j < v.beta.size(); ++j) {
    out += std::to_string(j + 1) + "," + format_double(v.beta[j]) + "\n";
  }
  out += "baseline," + format_double(v.baseline) + "\n";
  return out;
}

Json solution_json(const SisrSolution& sol, int p, const RicResult* ric) {
  Json support = Json::array();
  for (Eigen::Index j = 0; j < sol.gamma.gamma.size(); ++j) {
    if (sol.gamma.gamma[j] != 0.0) support.push_back(j + 1);
  }
  Json nu = Json::array();
  Json t = Json::array();
  for (const auto& s : sol.transform_samples) {
    nu.push_back(s.nu);
    t.push_back(s.t_hat);
  }
  Json doc = {{"p", p},
              {"s", sol.options.sparsity},
              {"gamma", vector_json(sol.gamma.gamma)},
              {"support", support},
              {"beta", vector_json(sol.beta)},
              {"transform", {{"nu", nu}, {"t", t}}},
              {"objective", sol.objective},
              {"baseline", sol.baseline},
              {"outer_iterations", sol.outer_iterations},
              {"inner_iterations", sol.inner_iterations},
              {"inner_nonconverged", sol.inner_nonconverged},
              {"degenerate_steps", sol.degenerate_steps},
              {"converged", sol.converged},
              {"options", options_json(sol.options)}};
  if (ric != nullptr) {
    Json curve = Json::array();
    for (std::size_t k = 0; k < ric->scores.size(); ++k) {
      curve.push_back({{"s", ric->s_min + static_cast<int>(k)},
                       {"objective", ric->objectives[k]},
                       {"score", ric->scores[k]}});
    }
    doc["ric"] = {{"selected", ric->selected},
                  {"sigma2", ric->sigma2},
                  {"formula", RicResult::kFormula},
                  {"curve", curve}};
  }
  return doc;
}

std::string transform_tsv(const SisrSolution& sol) {
  std::string out = "nu\tt_hat\n";
  for (const auto& s : sol.transform_samples) {
    out += format_double(s.nu) + "\t" + format_double(s.t_hat) + "\n";
  }
  return out;
}

std::string design_csv(const RegressionDesign& design) {
  std::string out;
  for (Eigen::Index j = 0; j < design.x.cols(); ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  out += "y\n";
  for (Eigen::Index i = 0; i < design.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < design.x.cols(); ++j) {
      out += format_double(design.x(i, j)) + ",";
    }
    out += format_double(design.y[i]) + "\n";
  }
  return out;
}

Json truth_json(const GeneratorTruth& truth) {
  Json support = Json::array();
  for (int j : truth.support) support.push_back(j + 1);
  return {{"gamma_star", vector_json(truth.gamma_star)},
          {"support", support},
          {"transform_name", truth.transform_name},
          {"c0", truth.c0},
          {"c1", truth.c1},
          {"c2", truth.c2},
          {"sigma0", truth.sigma0},
          {"seed", truth.seed},
          {"clamped", truth.clamped}};
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    fail(ErrorKind::kNumerical, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kData, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kConfig, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      fail(ErrorKind::kConfig, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::kConfig, "cannot rename into " + path.string());
  }
}

}  // namespace sisr::io
