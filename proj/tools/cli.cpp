#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sisr/coalition.hpp"
#include "sisr/engine.hpp"
#include "sisr/io.hpp"
#include "sisr/isotonic.hpp"
#include "sisr/parallel.hpp"
#include "sisr/payoff_lab.hpp"
#include "sisr/shapley.hpp"

namespace sisr::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;
using io::format_double;

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
};

class Manifest {
 public:
  Manifest(std::string command, const Common& common)
      : command_(std::move(command)),
        seed_(common.seed),
        start_(std::chrono::steady_clock::now()) {}

  template <class T>
  void option(const std::string& key, const T& value) {
    options_[key] = value;
  }

  void input(const std::string& role, const fs::path& path) {
    inputs_[role] = {{"path", path.string()}, {"sha256", io::sha256_file(path)}};
  }

  Json json() const {
    const std::chrono::duration<double> wall =
        std::chrono::steady_clock::now() - start_;
    return {{"command", command_}, {"options", options_}, {"inputs", inputs_},
            {"seed", seed_},       {"version", kVersion}, {"wall_time_seconds", wall.count()}};
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  Json options_ = Json::object();
  Json inputs_ = Json::object();
  std::chrono::steady_clock::time_point start_;
};

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void add_solver_flags(CLI::App* sub, SolveOptions& o) {
  sub->add_option("--outer-tol", o.outer_tol, "relative objective change to stop")
      ->capture_default_str();
  sub->add_option("--max-outer", o.max_outer)->capture_default_str();
  sub->add_option("--inner-tol", o.inner_tol)->capture_default_str();
  sub->add_option("--inner-max-iter", o.inner_max_iter)->capture_default_str();
  sub->add_option("--multiplier", o.infinite_multiplier,
                  "weight of the empty and grand coalitions, in max finite weights")
      ->capture_default_str();
  sub->add_option("--rho-inflation", o.rho_inflation)->capture_default_str();
  sub->add_option("--init-scale", o.init_scale)->capture_default_str();
}

void record_solver(Manifest& m, const SolveOptions& o) {
  m.option("outer_tol", o.outer_tol);
  m.option("max_outer", o.max_outer);
  m.option("inner_tol", o.inner_tol);
  m.option("inner_max_iter", o.inner_max_iter);
  m.option("multiplier", o.infinite_multiplier);
  m.option("rho_inflation", o.rho_inflation);
  m.option("init_scale", o.init_scale);
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  int lo = 0;
  int hi = 0;
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    lo = std::stoi(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(text);
    const std::string rest = text.substr(colon + 1);
    hi = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    fail(ErrorKind::kConfig, "--ric expects smin:smax, got '" + text + "'");
  }
  return {lo, hi};
}

/// t_hat rises strictly from one distinct nu to the next.
bool strictly_increasing(const SisrSolution& sol) {
  const auto& s = sol.transform_samples;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k].nu != s[k - 1].nu && !(s[k].t_hat > s[k - 1].t_hat)) return false;
  }
  return true;
}

// alpha* = [3, 0, 3, 0, ...] with `nonzeros` entries; nonzeros = p is dense.
Eigen::VectorXd alternating_alpha(int p, int nonzeros, double magnitude) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
  if (nonzeros == p) {
    a.setConstant(magnitude);
    return a;
  }
  if (nonzeros < 1 || 2 * nonzeros - 1 > p) {
    fail(ErrorKind::kConfig, "alternating alpha* with " + std::to_string(nonzeros) +
                                 " nonzeros does not fit p = " + std::to_string(p));
  }
  for (int k = 0; k < nonzeros; ++k) a[2 * k] = magnitude;
  return a;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

bool is_transform_scheme(const std::string& name) {
  const auto& all = all_transform_schemes();
  return std::any_of(all.begin(), all.end(),
                     [&](TransformScheme s) { return scheme_name(s) == name; });
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string payoffs;
  std::string out = "solution.json";
  std::string tsv;
  int sparsity = 0;
  std::string ric;
  SolveOptions options;
};

int cmd_solve(const SolveArgs& a, const Common& common, std::ostream& out) {
  if (a.sparsity == 0 && a.ric.empty()) {
    fail(ErrorKind::kConfig, "solve needs --sparsity or --ric");
  }
  const PayoffTable table = io::read_payoff_csv(a.payoffs);
  Manifest m("solve", common);
  m.input("payoffs", a.payoffs);
  SolveOptions o = a.options;
  record_solver(m, o);

  SisrSolution sol;
  Json doc;
  if (!a.ric.empty()) {
    const auto [lo, hi] = parse_range(a.ric);
    m.option("ric", a.ric);
    RicResult r = ric_select(table, lo, hi, o);
    sol = r.solutions[static_cast<std::size_t>(r.selected - r.s_min)];
    doc = io::solution_json(sol, table.p(), &r);
  } else {
    if (a.sparsity < 1 || a.sparsity > table.p()) {
      fail(ErrorKind::kConfig, "--sparsity " + std::to_string(a.sparsity) +
                                   " outside [1, " + std::to_string(table.p()) + "]");
    }
    o.sparsity = a.sparsity;
    m.option("sparsity", a.sparsity);
    sol = solve(table, o);
    doc = io::solution_json(sol, table.p());
  }
  doc["manifest"] = m.json();

  fs::path tsv = a.tsv;
  if (tsv.empty()) tsv = fs::path(a.out).replace_extension(".tsv");
  io::write_atomic(a.out, dump(doc));
  io::write_atomic(tsv, io::transform_tsv(sol));
  out << "s=" << sol.options.sparsity << " objective=" << format_double(sol.objective)
      << " support=" << sol.gamma.nonzeros()
      << " converged=" << (sol.converged ? "yes" : "no")
      << " outer_iterations=" << sol.outer_iterations << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// shapley

struct ShapleyArgs {
  std::string payoffs;
  std::string out = "shapley.csv";
  bool check_wls = false;
};

int cmd_shapley(const ShapleyArgs& a, std::ostream& out) {
  const PayoffTable table = io::read_payoff_csv(a.payoffs);
  if (!table.full_enumeration()) {
    fail(ErrorKind::kUnsupported,
         "exact Shapley values need all 2^p coalitions; the table has " +
             std::to_string(table.size()));
  }
  const ShapleyVector exact = exact_shapley(table);
  io::write_atomic(a.out, io::shapley_csv(exact));
  if (a.check_wls) {
    const ShapleyVector wls = wls_shapley(table);
    const double gap = (exact.beta - wls.beta).cwiseAbs().maxCoeff();
    out << "wls max abs discrepancy " << format_double(gap) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string scheme;
  int p = 10;
  double sigma0 = 1e-3;
  std::string transform = "cube-root";
  double theta = 0.5;
  int n = 0;  // 0 means 5p
  double alpha = 3.0;
  int alpha_nonzeros = 0;  // 0 means dense
  std::string out = "payoffs.csv";
  std::string truth = "truth.json";
  std::string design;
};

int cmd_gen(const GenArgs& a, const Common& common, std::ostream& out) {
  Manifest m("gen", common);
  m.option("scheme", a.scheme);
  m.option("p", a.p);
  Json truth;
  PayoffTable table;

  if (is_transform_scheme(a.scheme)) {
    GeneratedPayoffs g =
        gen_transform_payoffs(a.p, parse_transform_scheme(a.scheme), common.seed);
    table = std::move(g.table);
    truth = io::truth_json(g.truth);
  } else if (a.scheme == "sparse") {
    m.option("sigma0", a.sigma0);
    m.option("transform", a.transform);
    GeneratedPayoffs g = gen_sparse_payoffs(a.p, three_sparse_gamma(a.p),
                                            transform_by_name(a.transform), a.sigma0,
                                            common.seed);
    table = std::move(g.table);
    truth = io::truth_json(g.truth);
  } else if (a.scheme == "max") {
    const Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(a.p, 1.0, a.p);
    table = gen_max_payoffs(a.p, beta);
    truth = {{"beta_star", vector_json(beta)}, {"transform_name", "max"}};
  } else if (a.scheme == "r2" || a.scheme == "pseudo-r2") {
    const int n = a.n == 0 ? 5 * a.p : a.n;
    const int nonzeros = a.alpha_nonzeros == 0 ? a.p : a.alpha_nonzeros;
    m.option("theta", a.theta);
    m.option("n", n);
    m.option("alpha", a.alpha);
    m.option("alpha_nonzeros", nonzeros);
    const auto task =
        a.scheme == "r2" ? RegressionTask::kContinuous : RegressionTask::kBinary;
    const RegressionDesign design =
        gen_gaussian_design(n, a.p, a.theta, alternating_alpha(a.p, nonzeros, a.alpha),
                            task, common.seed);
    RegressionPayoffs r = task == RegressionTask::kContinuous
                              ? r2_payoffs(design, common.threads)
                              : pseudo_r2_payoffs(design, common.threads);
    table = std::move(r.table);
    truth = {{"alpha_star", vector_json(design.alpha_star)},
             {"theta", a.theta},
             {"n", n},
             {"task", a.scheme},
             {"seed", common.seed},
             {"flagged", r.flagged}};
    if (!a.design.empty()) io::write_atomic(a.design, io::design_csv(design));
    if (!r.flagged.empty()) {
      out << r.flagged.size() << " subset fits flagged (rank deficient or IRLS"
          << " not converged)\n";
    }
  } else {
    fail(ErrorKind::kConfig, "unknown scheme '" + a.scheme + "'");
  }

  truth["manifest"] = m.json();
  io::write_atomic(a.out, io::payoff_csv(table));
  if (!a.truth.empty()) io::write_atomic(a.truth, dump(truth));
  out << "wrote " << table.size() << " coalitions to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// isotonic

struct IsotonicArgs {
  std::string input;
  std::string out = "isotonic.csv";
};

int cmd_isotonic(const IsotonicArgs& a, std::ostream& out) {
  std::ifstream in(a.input);
  if (!in) fail(ErrorKind::kData, "cannot open " + a.input);
  const io::WeightedSeries s = io::parse_weighted_csv(in, a.input);
  const auto n = static_cast<Eigen::Index>(s.values.size());
  const Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(s.values.data(), n);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(s.weights.data(), n);
  // Rows are taken in file order.
  const IsotonicFit fit = isotonic_fit(delta, w, build_order(Eigen::VectorXd::LinSpaced(n, 0, n - 1)));
  std::string csv = "value,weight,fit\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    csv += format_double(delta[i]) + "," + format_double(w[i]) + "," +
           format_double(fit.t[i]) + "\n";
  }
  io::write_atomic(a.out, csv);
  out << "blocks=" << fit.block_starts.size() << " objective="
      << format_double(fit.objective) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
  std::string experiment;
  std::vector<int> p_list;
  int runs = 0;  // 0 means the experiment's default
  std::vector<std::string> schemes;
  std::vector<double> sigma0;
  std::vector<int> s_list;
  std::vector<double> theta;
  std::vector<int> s_star;
  int sparsity = 0;
  int repeats = 3;
  std::string task = "r2";
  std::string out = "results.tsv";
  std::string curves_dir;
  SolveOptions options;
};

int first_p(const ReproduceArgs& a, int fallback) {
  return a.p_list.empty() ? fallback : a.p_list.front();
}

void write_curve(const ReproduceArgs& a, const std::string& name, const std::string& body) {
  if (a.curves_dir.empty()) return;
  fs::create_directories(a.curves_dir);
  io::write_atomic(fs::path(a.curves_dir) / (name + ".tsv"), body);
}

std::string reproduce_transforms(const ReproduceArgs& a, const Common& c,
                                 std::ostream& out) {
  std::vector<std::string> schemes = a.schemes;
  if (schemes.empty()) {
    for (TransformScheme s : all_transform_schemes()) schemes.emplace_back(scheme_name(s));
    schemes.emplace_back("max");
  }
  const int p = first_p(a, 10);
  const int runs = a.runs == 0 ? 1 : a.runs;
  std::string tsv =
      "scheme\tp\tseed\tcorrelation\tstrictly_increasing\tobjective\touter_iterations\tconverged\n";
  for (const std::string& name : schemes) {
    for (int r = 0; r < runs; ++r) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
      SolveOptions o = a.options;
      o.sparsity = p;
      double corr = 0.0;
      SisrSolution sol;
      std::string curve = "nu\tt_hat\tt_star\n";
      if (name == "max") {
        const PayoffTable table = gen_max_payoffs(p, Eigen::VectorXd::LinSpaced(p, 1.0, p));
        sol = solve(table, o);
        // Fitted transform at each feature's own contribution beta*_j = j,
        // read off the singleton coalition {j}.
        Eigen::VectorXd t_at_beta(p);
        for (int j = 0; j < p; ++j) t_at_beta[j] = sol.t_hat[std::size_t{1} << j];
        corr = pearson(sol.gamma.gamma, t_at_beta);
        curve = "nu\tt_hat\n";
        for (const auto& s : sol.transform_samples) {
          curve += format_double(s.nu) + "\t" + format_double(s.t_hat) + "\n";
        }
      } else {
        const GeneratedPayoffs g =
            gen_transform_payoffs(p, parse_transform_scheme(name), seed);
        sol = solve(g.table, o);
        Eigen::VectorXd t_star(g.table.size());
        for (std::size_t i = 0; i < g.table.size(); ++i) {
          t_star[static_cast<Eigen::Index>(i)] = g.truth.forward(g.table[i].value);
        }
        corr = pearson(sol.t_hat, t_star);
        std::vector<std::size_t> order(g.table.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return g.table[x].value < g.table[y].value;
        });
        for (std::size_t i : order) {
          curve += format_double(g.table[i].value - g.table.empty_value()) + "\t" +
                   format_double(sol.t_hat[static_cast<Eigen::Index>(i)]) + "\t" +
                   format_double(t_star[static_cast<Eigen::Index>(i)]) + "\n";
        }
      }
      write_curve(a, name + "_p" + std::to_string(p) + "_seed" + std::to_string(seed), curve);
      tsv += name + "\t" + std::to_string(p) + "\t" + std::to_string(seed) + "\t" +
             format_double(corr) + "\t" + (strictly_increasing(sol) ? "1" : "0") + "\t" +
             format_double(sol.objective) + "\t" + std::to_string(sol.outer_iterations) +
             "\t" + (sol.converged ? "1" : "0") + "\n";
      out << name << " seed=" << seed << " correlation=" << format_double(corr) << "\n";
    }
  }
  return tsv;
}

std::string reproduce_table1(const ReproduceArgs& a, const Common& c, std::ostream& out) {
  const std::vector<int> ps = a.p_list.empty() ? std::vector<int>{10} : a.p_list;
  const std::vector<double> sigmas =
      a.sigma0.empty() ? std::vector<double>{1e-3, 1e-2, 2e-1} : a.sigma0;
  const int runs = a.runs == 0 ? 20 : a.runs;
  const int s_star = 3;
  const int s = a.sparsity == 0 ? static_cast<int>(std::ceil(1.5 * s_star)) : a.sparsity;
  const MonotoneTransform cube = cube_root_transform();

  std::string tsv =
      "p\tsigma0\truns\ts\taffn_mean\taffn_sd\tsupp_mean\tsupp_min\tclamped\n";
  for (int p : ps) {
    for (double sigma : sigmas) {
      std::vector<double> affn(runs), supp(runs);
      std::vector<std::size_t> clamped(runs);
      detail::parallel_for(static_cast<std::size_t>(runs), c.threads, [&](std::size_t r) {
        const GeneratedPayoffs g = gen_sparse_payoffs(
            p, three_sparse_gamma(p), cube, sigma, c.seed + r);
        SolveOptions o = a.options;
        o.sparsity = s;
        const SisrSolution sol = solve(g.table, o);
        affn[r] = affinity(sol.gamma.gamma, g.truth.gamma_star);
        supp[r] = support_recovery(sol.gamma.gamma, g.truth.support);
        clamped[r] = g.truth.clamped;
      });
      const double mean = std::accumulate(affn.begin(), affn.end(), 0.0) / runs;
      double var = 0.0;
      for (double v : affn) var += (v - mean) * (v - mean);
      const double sd = runs > 1 ? std::sqrt(var / (runs - 1)) : 0.0;
      const double supp_mean = std::accumulate(supp.begin(), supp.end(), 0.0) / runs;
      const double supp_min = *std::min_element(supp.begin(), supp.end());
      const std::size_t n_clamped = std::accumulate(clamped.begin(), clamped.end(), std::size_t{0});
      tsv += std::to_string(p) + "\t" + format_double(sigma) + "\t" + std::to_string(runs) +
             "\t" + std::to_string(s) + "\t" + format_double(mean) + "\t" +
             format_double(sd) + "\t" + format_double(supp_mean) + "\t" +
             format_double(supp_min) + "\t" + std::to_string(n_clamped) + "\n";
      out << "p=" << p << " sigma0=" << sigma << " Affn=" << mean << " Supp=" << supp_mean
          << "\n";
    }
  }
  return tsv;
}

std::string reproduce_timing(const ReproduceArgs& a, const Common& c, std::ostream& out) {
  const int p = first_p(a, 15);
  const int s_star = 3;
  std::vector<int> s_values = a.s_list;
  if (s_values.empty()) {
    s_values.resize(p);
    std::iota(s_values.begin(), s_values.end(), 1);
  }
  const double sigma = a.sigma0.empty() ? 1e-3 : a.sigma0.front();
  const GeneratedPayoffs g =
      gen_sparse_payoffs(p, three_sparse_gamma(p), cube_root_transform(), sigma, c.seed);
  const std::vector<TimingRow> rows = timing_sweep(g.table, s_values, a.options, a.repeats);

  const auto full = std::find_if(rows.begin(), rows.end(),
                                 [&](const TimingRow& r) { return r.s == p; });
  std::string tsv = "s\tmedian_seconds\touter_iterations\tno_slower_than_full\n";
  for (const TimingRow& r : rows) {
    const bool faster = full == rows.end() || r.median_seconds <= full->median_seconds;
    tsv += std::to_string(r.s) + "\t" + format_double(r.median_seconds) + "\t" +
           std::to_string(r.outer_iterations) + "\t" + (faster ? "1" : "0") + "\n";
  }
  const auto at_star = std::find_if(rows.begin(), rows.end(),
                                    [&](const TimingRow& r) { return r.s == s_star; });
  if (full != rows.end() && at_star != rows.end()) {
    out << "trend: time(s=" << s_star << ")=" << at_star->median_seconds << "s, time(s="
        << p << ")=" << full->median_seconds << "s, "
        << (at_star->median_seconds <= full->median_seconds ? "sparser is faster"
                                                            : "sparser is slower")
        << "\n";
  }
  return tsv;
}

std::string reproduce_r2_grid(const ReproduceArgs& a, const Common& c, std::ostream& out) {
  const int p = first_p(a, 8);
  const std::vector<double> thetas =
      a.theta.empty() ? std::vector<double>{0.0, 0.5, 0.9} : a.theta;
  std::vector<int> stars = a.s_star;
  if (stars.empty()) stars = {2, (p + 1) / 2, p};
  const auto task = a.task == "r2" ? RegressionTask::kContinuous : RegressionTask::kBinary;
  if (a.task != "r2" && a.task != "pseudo-r2") {
    fail(ErrorKind::kConfig, "--task must be r2 or pseudo-r2");
  }

  std::string tsv = "theta\ts_star\tnu\tt_hat\n";
  for (double theta : thetas) {
    for (int star : stars) {
      const RegressionDesign design = gen_gaussian_design(
          5 * p, p, theta, alternating_alpha(p, star, 3.0), task, c.seed);
      const RegressionPayoffs r = task == RegressionTask::kContinuous
                                      ? r2_payoffs(design, c.threads)
                                      : pseudo_r2_payoffs(design, c.threads);
      SolveOptions o = a.options;
      o.sparsity = a.sparsity == 0 ? p : a.sparsity;
      const SisrSolution sol = solve(r.table, o);
      for (const auto& s : sol.transform_samples) {
        tsv += format_double(theta) + "\t" + std::to_string(star) + "\t" +
               format_double(s.nu) + "\t" + format_double(s.t_hat) + "\n";
      }
      const LinearityCheck lc = linearity_check(r.table, sol);
      out << "theta=" << theta << " s*=" << star
          << " linear_residual=" << lc.linear_residual
          << " monotone_residual=" << lc.monotone_residual << "\n";
    }
  }
  return tsv;
}

int cmd_reproduce(const ReproduceArgs& a, const Common& c, std::ostream& out) {
  Manifest m("reproduce", c);
  m.option("experiment", a.experiment);
  m.option("p_list", a.p_list);
  m.option("runs", a.runs);
  m.option("schemes", a.schemes);
  m.option("sigma0", a.sigma0);
  m.option("s_list", a.s_list);
  m.option("theta", a.theta);
  m.option("s_star", a.s_star);
  m.option("sparsity", a.sparsity);
  m.option("repeats", a.repeats);
  m.option("task", a.task);
  record_solver(m, a.options);

  std::string tsv;
  if (a.experiment == "transforms") {
    tsv = reproduce_transforms(a, c, out);
  } else if (a.experiment == "table1") {
    tsv = reproduce_table1(a, c, out);
  } else if (a.experiment == "timing") {
    tsv = reproduce_timing(a, c, out);
  } else {
    tsv = reproduce_r2_grid(a, c, out);
  }
  io::write_atomic(a.out, tsv);
  fs::path manifest = a.out;
  manifest += ".manifest.json";
  io::write_atomic(manifest, dump(m.json()));
  return kExitOk;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kData:
    case ErrorKind::kStructural:
    case ErrorKind::kUnsupported:
    case ErrorKind::kFlatPayoff:
      return kExitData;
    case ErrorKind::kCapacity:
    case ErrorKind::kDomain:
    case ErrorKind::kConfig:
      return kExitUsage;
    case ErrorKind::kNonInvertible:
    case ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley values and sparse isotonic Shapley regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  app.add_option("--seed", common.seed, "generator seed")->capture_default_str();
  app.add_option("--threads", common.threads, "worker cap; 0 uses all cores")
      ->capture_default_str();
  app.fallthrough();

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "fit SISR to a payoff table");
  solve_cmd->add_option("--payoffs", solve_args.payoffs, "payoff CSV (mask,value)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sp = solve_cmd->add_option("--sparsity", solve_args.sparsity, "sparsity level s");
  solve_cmd->add_option("--ric", solve_args.ric, "select s by RIC over smin:smax")
      ->excludes(sp);
  solve_cmd->add_option("--out", solve_args.out, "solution JSON")->capture_default_str();
  solve_cmd->add_option("--tsv", solve_args.tsv, "nu/t_hat curve; default next to --out");
  add_solver_flags(solve_cmd, solve_args.options);

  ShapleyArgs shapley_args;
  auto* shapley_cmd = app.add_subcommand("shapley", "exact Shapley values");
  shapley_cmd->add_option("--payoffs", shapley_args.payoffs)
      ->required()
      ->check(CLI::ExistingFile);
  shapley_cmd->add_option("--out", shapley_args.out)->capture_default_str();
  shapley_cmd->add_flag("--check-wls", shapley_args.check_wls,
                        "also solve the weighted least squares form and compare");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic payoff table");
  gen_cmd->add_option("--scheme", gen_args.scheme,
                      "fifth-root, square-root, exponential, logarithmic, tangent, "
                      "normal-cdf, sparse, max, r2 or pseudo-r2")
      ->required();
  gen_cmd->add_option("--p", gen_args.p)->capture_default_str();
  gen_cmd->add_option("--sigma0", gen_args.sigma0)->capture_default_str();
  gen_cmd->add_option("--transform", gen_args.transform, "sparse scheme T*")
      ->capture_default_str();
  gen_cmd->add_option("--theta", gen_args.theta)->capture_default_str();
  gen_cmd->add_option("--n", gen_args.n, "design rows; default 5p");
  gen_cmd->add_option("--alpha", gen_args.alpha)->capture_default_str();
  gen_cmd->add_option("--alpha-nonzeros", gen_args.alpha_nonzeros,
                      "nonzeros of alpha* = [a,0,a,0,...]; default dense");
  gen_cmd->add_option("--out", gen_args.out)->capture_default_str();
  gen_cmd->add_option("--truth", gen_args.truth)->capture_default_str();
  gen_cmd->add_option("--design", gen_args.design, "also write the design CSV");

  IsotonicArgs iso_args;
  auto* iso_cmd = app.add_subcommand("isotonic", "weighted isotonic fit in row order");
  iso_cmd->add_option("--input", iso_args.input, "CSV value[,weight]")
      ->required()
      ->check(CLI::ExistingFile);
  iso_cmd->add_option("--out", iso_args.out)->capture_default_str();

  ReproduceArgs rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "run a scaled experiment");
  rep_cmd->add_option("experiment", rep.experiment)
      ->required()
      ->check(CLI::IsMember({"transforms", "table1", "timing", "r2-grid"}));
  rep_cmd->add_option("--p,--p-list", rep.p_list)->delimiter(',');
  rep_cmd->add_option("--runs", rep.runs);
  rep_cmd->add_option("--scheme", rep.schemes)->delimiter(',');
  rep_cmd->add_option("--sigma0", rep.sigma0)->delimiter(',');
  rep_cmd->add_option("--s-list", rep.s_list)->delimiter(',');
  rep_cmd->add_option("--theta", rep.theta)->delimiter(',');
  rep_cmd->add_option("--s-star", rep.s_star)->delimiter(',');
  rep_cmd->add_option("--sparsity", rep.sparsity);
  rep_cmd->add_option("--repeats", rep.repeats)->capture_default_str();
  rep_cmd->add_option("--task", rep.task, "r2-grid payoffs: r2 or pseudo-r2")
      ->capture_default_str();
  rep_cmd->add_option("--out", rep.out)->capture_default_str();
  rep_cmd->add_option("--curves-dir", rep.curves_dir, "per-run curve TSVs");
  add_solver_flags(rep_cmd, rep.options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, common, out);
    if (*shapley_cmd) return cmd_shapley(shapley_args, out);
    if (*gen_cmd) return cmd_gen(gen_args, common, out);
    if (*iso_cmd) return cmd_isotonic(iso_args, out);
    return cmd_reproduce(rep, common, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace sisr::cli
