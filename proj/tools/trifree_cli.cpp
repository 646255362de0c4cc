#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trifree/counts.hpp"
#include "trifree/csvio.hpp"
#include "trifree/errors.hpp"
#include "trifree/expect.hpp"
#include "trifree/fisher.hpp"
#include "trifree/infer.hpp"
#include "trifree/rng.hpp"
#include "trifree/specfun.hpp"
#include "trifree/studies.hpp"

// Command-line front end: single-value expectations, truncation-error
// studies, information-matrix simulations, benchmarks, and regression
// fits, all emitted as CSV/JSON with seed and config provenance.
//
// Exit codes: 0 success; 2 usage or argument errors; 3 numeric domain or
// resource errors; 4 when non-convergence dominates a study.

namespace {

using nlohmann::ordered_json;
using trifree::counts::CountModel;

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitNonConvergence = 4;

int env_workers() {
  const char* env = std::getenv("TRIFREE_WORKERS");
  if (!env) return 1;
  int w = std::atoi(env);
  return w >= 1 ? w : 1;
}

int resolve_workers(int flag_value) {
  return flag_value >= 1 ? flag_value : env_workers();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<long> parse_grid(const std::string& text) {
  std::vector<long> grid;
  for (const std::string& item : split_list(text)) {
    std::size_t used = 0;
    long v = std::stol(item, &used);
    if (used != item.size()) {
      throw std::invalid_argument("bad grid entry '" + item + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("empty M grid");
  return grid;
}

// Model parameters shared by every subcommand that names a distribution.
struct ModelArgs {
  std::string family = "nb";
  double phi = 0.1;
  double nu = 1.0;
  double p = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  long trials = 1;
};

void add_model_flags(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--family", args.family,
                  "nb, bnb, binomial, beta-binomial, zinb, zibnb, zanb, zabnb")
      ->capture_default_str();
  cmd->add_option("--phi", args.phi,
                  "zero-model weight (zero-inflated / hurdle families)");
  cmd->add_option("--nu", args.nu, "size parameter");
  cmd->add_option("--p", args.p, "success probability");
  cmd->add_option("--alpha", args.alpha, "beta shape alpha");
  cmd->add_option("--beta", args.beta, "beta shape beta");
  cmd->add_option("--n-trials", args.trials, "trial count (binomial families)");
}

CountModel build_model(const ModelArgs& a) {
  const trifree::counts::NegBinomial nb{a.nu, a.p};
  const trifree::counts::BetaNegBinomial bnb{a.nu, a.alpha, a.beta};
  CountModel model;
  if (a.family == "nb") {
    model = nb;
  } else if (a.family == "bnb") {
    model = bnb;
  } else if (a.family == "binomial") {
    model = trifree::counts::Binomial{a.trials, a.p};
  } else if (a.family == "beta-binomial") {
    model = trifree::counts::BetaBinomial{a.trials, a.alpha, a.beta};
  } else if (a.family == "zinb") {
    model = trifree::counts::ZeroInflated{a.phi, nb};
  } else if (a.family == "zibnb") {
    model = trifree::counts::ZeroInflated{a.phi, bnb};
  } else if (a.family == "zanb") {
    model = trifree::counts::Hurdle{a.phi, nb};
  } else if (a.family == "zabnb") {
    model = trifree::counts::Hurdle{a.phi, bnb};
  } else {
    throw std::invalid_argument("unknown family '" + a.family + "'");
  }
  trifree::counts::validate(model);
  return model;
}

bool family_has_nu(const std::string& family) {
  return family != "binomial" && family != "beta-binomial";
}

trifree::infer::Family fit_family(const std::string& name) {
  auto f = trifree::infer::family_from_name(name);
  if (!f) {
    throw std::invalid_argument("family '" + name +
                                "' is not fittable (nb, bnb, zinb, zibnb, "
                                "zanb, zabnb)");
  }
  return *f;
}

std::vector<double> truth_params(const ModelArgs& a,
                                 trifree::infer::Family family) {
  using trifree::infer::Family;
  switch (family) {
    case Family::nb:
      return {a.nu, a.p};
    case Family::bnb:
      return {a.nu, a.alpha, a.beta};
    case Family::zinb:
    case Family::zanb:
      return {a.phi, a.nu, a.p};
    case Family::zibnb:
    case Family::zabnb:
      return {a.phi, a.nu, a.alpha, a.beta};
  }
  throw std::invalid_argument("unknown family");
}

// --M accepts a plain integer, "policy:default", or "policy:tolerance:<t>".
struct MSpec {
  bool use_policy = false;
  trifree::expect::TruncationPolicy policy =
      trifree::expect::TruncationPolicy::default_rule();
  long m = 0;
};

MSpec parse_m(const std::string& text) {
  MSpec spec;
  if (text.rfind("policy:", 0) == 0) {
    spec.use_policy = true;
    const std::string rest = text.substr(7);
    if (rest == "default") {
      spec.policy = trifree::expect::TruncationPolicy::default_rule();
    } else if (rest.rfind("tolerance:", 0) == 0) {
      spec.policy = trifree::expect::TruncationPolicy::tolerance(
          std::stod(rest.substr(10)));
    } else {
      throw std::invalid_argument(
          "--M policy form must be policy:default or policy:tolerance:<t>");
    }
    return spec;
  }
  std::size_t used = 0;
  spec.m = std::stol(text, &used);
  if (used != text.size() || spec.m < 0) {
    throw std::invalid_argument("--M must be a non-negative integer or a "
                                "policy:... form");
  }
  return spec;
}

ordered_json ci_json(const trifree::fisher::CiSet& ci) {
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < ci.labels.size(); ++k) {
    const bool significant = ci.lower[k] > 0.0 || ci.upper[k] < 0.0;
    rows.push_back({{"name", ci.labels[k]},
                    {"estimate", ci.estimate[k]},
                    {"lower", ci.lower[k]},
                    {"upper", ci.upper[k]},
                    {"significant", significant}});
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Series expectations of polygamma functions over count models, "
      "information matrices, and reproducible simulation studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", trifree::studies::kVersion);
  int exit_code = 0;

  // ---- expect ------------------------------------------------------------
  auto* cmd_expect = app.add_subcommand(
      "expect", "One expectation value with its truncation bound");
  ModelArgs expect_model;
  add_model_flags(cmd_expect, expect_model);
  std::string expect_m = "policy:default";
  std::string expect_method = "trigamma-free";
  double expect_offset = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::uint64_t> expect_seed;
  std::string expect_out;
  cmd_expect->add_option("--M", expect_m,
                         "truncation: integer, policy:default, or "
                         "policy:tolerance:<t>")
      ->capture_default_str();
  cmd_expect->add_option("--method", expect_method,
                         "trigamma-free, calibrated, gfwl, monte-carlo, "
                         "exact-finite")
      ->capture_default_str();
  cmd_expect->add_option("--offset", expect_offset,
                         "polygamma offset; defaults to the family's nu");
  cmd_expect->add_option("--seed", expect_seed, "rng seed (monte-carlo)");
  cmd_expect->add_option("--out", expect_out, "output path (default stdout)");
  cmd_expect->callback([&]() {
    const CountModel model = build_model(expect_model);
    double offset = expect_offset;
    if (std::isnan(offset)) {
      if (!family_has_nu(expect_model.family)) {
        throw std::invalid_argument(
            "--offset is required for binomial families");
      }
      offset = expect_model.nu;
    }
    const MSpec mspec = parse_m(expect_m);
    namespace ex = trifree::expect;
    ex::ExpectationResult res;
    if (expect_method == "exact-finite") {
      res = ex::psi1_exact_finite(offset, model);
    } else {
      const long m = mspec.use_policy
                         ? ex::choose_m(offset, model, mspec.policy)
                         : mspec.m;
      if (expect_method == "trigamma-free") {
        res = ex::psi1_trigamma_free(offset, model, m);
      } else if (expect_method == "calibrated") {
        res = ex::psi1_calibrated(offset, model, m);
      } else if (expect_method == "gfwl") {
        res = ex::psi1_gfwl(offset, model, m);
      } else if (expect_method == "monte-carlo") {
        if (!expect_seed) {
          throw std::invalid_argument("--method monte-carlo needs --seed");
        }
        trifree::rng::Stream stream(*expect_seed, 0);
        res = ex::psi1_monte_carlo(offset, model, m, stream);
      } else {
        throw std::invalid_argument("unknown method '" + expect_method + "'");
      }
    }
    ordered_json j{{"family", expect_model.family},
                   {"offset", offset},
                   {"method", ex::method_name(res.method)},
                   {"M", res.m},
                   {"value", res.value},
                   {"bound", res.bound ? ordered_json(*res.bound)
                                       : ordered_json(nullptr)},
                   {"trigamma_evals", res.trigamma_evals}};
    write_json(expect_out, j);
  });

  // ---- compare -----------------------------------------------------------
  auto* cmd_compare = app.add_subcommand(
      "compare", "Truncation errors of every method over an M grid");
  ModelArgs compare_model;
  add_model_flags(cmd_compare, compare_model);
  std::string compare_grid;
  long compare_b = 200;
  long compare_m_ref = trifree::expect::kDefaultMRef;
  std::optional<std::uint64_t> compare_seed;
  int compare_workers = 0;
  std::string compare_out;
  cmd_compare->add_option("--m-grid", compare_grid,
                          "comma-separated M values (default 10,20,...,200)");
  cmd_compare->add_option("--B", compare_b, "monte-carlo replicates per M")
      ->capture_default_str();
  cmd_compare->add_option("--m-ref", compare_m_ref, "reference truncation")
      ->capture_default_str();
  cmd_compare->add_option("--seed", compare_seed,
                          "rng seed; omit to skip monte-carlo rows");
  cmd_compare->add_option("--workers", compare_workers,
                          "worker threads (default TRIFREE_WORKERS or 1)");
  cmd_compare->add_option("--out", compare_out, "CSV path (default stdout)");
  cmd_compare->callback([&]() {
    trifree::studies::StudyConfig cfg;
    cfg.family = fit_family(compare_model.family);
    cfg.params = truth_params(compare_model, cfg.family);
    cfg.m_grid = compare_grid.empty()
                     ? std::vector<long>{10,  20,  30,  40,  50,  60,  70,
                                         80,  90,  100, 110, 120, 130, 140,
                                         150, 160, 170, 180, 190, 200}
                     : parse_grid(compare_grid);
    cfg.mc_replicates = compare_b;
    cfg.m_ref = compare_m_ref;
    cfg.seed = compare_seed;
    cfg.workers = resolve_workers(compare_workers);
    write_text(compare_out, trifree::studies::run_compare(cfg).csv);
  });

  // ---- sensitivity ---------------------------------------------------------
  auto* cmd_sens = app.add_subcommand(
      "sensitivity", "Method errors under fitted parameters, replicated");
  ModelArgs sens_model;
  add_model_flags(cmd_sens, sens_model);
  std::string sens_grid;
  long sens_b = 200;
  long sens_n = 1000;
  long sens_m_ref = trifree::expect::kDefaultMRef;
  std::optional<std::uint64_t> sens_seed;
  int sens_workers = 0;
  std::string sens_out;
  cmd_sens->add_option("--m-grid", sens_grid,
                       "comma-separated M values (default 10,20,...,200)");
  cmd_sens->add_option("--B", sens_b, "replicates")->capture_default_str();
  cmd_sens->add_option("--N", sens_n, "sample size per replicate")
      ->capture_default_str();
  cmd_sens->add_option("--m-ref", sens_m_ref, "reference truncation")
      ->capture_default_str();
  cmd_sens->add_option("--seed", sens_seed, "rng seed (required)");
  cmd_sens->add_option("--workers", sens_workers,
                       "worker threads (default TRIFREE_WORKERS or 1)");
  cmd_sens->add_option("--out", sens_out, "CSV path (default stdout)");
  cmd_sens->callback([&]() {
    trifree::studies::StudyConfig cfg;
    cfg.family = fit_family(sens_model.family);
    cfg.params = truth_params(sens_model, cfg.family);
    cfg.m_grid = sens_grid.empty()
                     ? std::vector<long>{10,  20,  30,  40,  50,  60,  70,
                                         80,  90,  100, 110, 120, 130, 140,
                                         150, 160, 170, 180, 190, 200}
                     : parse_grid(sens_grid);
    cfg.replicates = sens_b;
    cfg.sample_size = sens_n;
    cfg.m_ref = sens_m_ref;
    cfg.seed = sens_seed;
    cfg.workers = resolve_workers(sens_workers);
    const auto result = trifree::studies::run_sensitivity(cfg);
    write_text(sens_out, result.csv);
    if (result.excluded * 5 > cfg.replicates) {
      std::cerr << "warning: " << result.excluded << " of " << cfg.replicates
                << " replicates failed to converge\n";
      exit_code = kExitNonConvergence;
    }
  });

  // ---- fim-sim --------------------------------------------------------------
  auto* cmd_fim = app.add_subcommand(
      "fim-sim", "Information-matrix stability and CI coverage simulation");
  ModelArgs fim_model;
  fim_model.family = "zinb";
  add_model_flags(cmd_fim, fim_model);
  std::string fim_grid;
  long fim_b = 200;
  long fim_n = 1000;
  long fim_m_ref = trifree::expect::kDefaultMRef;
  double fim_level = 0.95;
  std::optional<std::uint64_t> fim_seed;
  int fim_workers = 0;
  std::string fim_out;
  std::string fim_json;
  cmd_fim->add_option("--m-grid", fim_grid,
                      "comma-separated M values (default 150,1000,5000,20000)");
  cmd_fim->add_option("--B", fim_b, "replicates")->capture_default_str();
  cmd_fim->add_option("--N", fim_n, "sample size per replicate")
      ->capture_default_str();
  cmd_fim->add_option("--m-ref", fim_m_ref, "reference truncation")
      ->capture_default_str();
  cmd_fim->add_option("--level", fim_level, "CI level")->capture_default_str();
  cmd_fim->add_option("--seed", fim_seed, "rng seed (required)");
  cmd_fim->add_option("--workers", fim_workers,
                      "worker threads (default TRIFREE_WORKERS or 1)");
  cmd_fim->add_option("--out", fim_out, "per-replicate CSV path");
  cmd_fim->add_option("--json", fim_json, "aggregate JSON path");
  cmd_fim->callback([&]() {
    trifree::studies::StudyConfig cfg;
    cfg.family = fit_family(fim_model.family);
    cfg.params = truth_params(fim_model, cfg.family);
    cfg.m_grid = fim_grid.empty() ? std::vector<long>{150, 1000, 5000, 20000}
                                  : parse_grid(fim_grid);
    cfg.replicates = fim_b;
    cfg.sample_size = fim_n;
    cfg.m_ref = fim_m_ref;
    cfg.level = fim_level;
    cfg.seed = fim_seed;
    cfg.workers = resolve_workers(fim_workers);
    const auto result = trifree::studies::run_fim_sim(cfg);
    write_text(fim_out, result.csv);

    ordered_json aggregates = ordered_json::array();
    for (const auto& agg : result.aggregates) {
      ordered_json coverage;
      for (std::size_t k = 0; k < result.labels.size(); ++k) {
        coverage[result.labels[k]] = agg.coverage[k];
      }
      aggregates.push_back(
          {{"method", agg.method},
           {"M", agg.m},
           {"mean_frobenius", agg.mean_frobenius},
           {"mean_max_ci_length_change", agg.mean_max_ci_length_change},
           {"coverage", coverage}});
    }
    ordered_json j{{"family", fim_model.family},
                   {"labels", result.labels},
                   {"B", cfg.replicates},
                   {"N", cfg.sample_size},
                   {"converged", result.converged},
                   {"excluded", result.excluded},
                   {"aggregates", aggregates}};
    if (!fim_json.empty() || fim_out.empty()) write_json(fim_json, j);
    if (result.excluded * 5 > cfg.replicates) {
      std::cerr << "warning: " << result.excluded << " of " << cfg.replicates
                << " replicates failed to converge\n";
      exit_code = kExitNonConvergence;
    }
  });

  // ---- bench ------------------------------------------------------------------
  auto* cmd_bench = app.add_subcommand(
      "bench", "Wall-clock means and exact trigamma evaluation counts");
  ModelArgs bench_model;
  add_model_flags(cmd_bench, bench_model);
  std::string bench_grid;
  long bench_reps = 5;
  std::optional<std::uint64_t> bench_seed;
  std::string bench_out;
  cmd_bench->add_option("--m-grid", bench_grid, "comma-separated M values")
      ->required();
  cmd_bench->add_option("--reps", bench_reps, "timing repetitions per cell")
      ->capture_default_str();
  cmd_bench->add_option("--seed", bench_seed,
                        "rng seed; adds monte-carlo timings");
  cmd_bench->add_option("--out", bench_out, "CSV path (default stdout)");
  cmd_bench->callback([&]() {
    trifree::studies::StudyConfig cfg;
    cfg.family = fit_family(bench_model.family);
    cfg.params = truth_params(bench_model, cfg.family);
    cfg.m_grid = parse_grid(bench_grid);
    cfg.bench_reps = bench_reps;
    cfg.seed = bench_seed;
    write_text(bench_out, trifree::studies::run_bench(cfg).csv);
  });

  // ---- regress -----------------------------------------------------------------
  auto* cmd_regress = app.add_subcommand(
      "regress", "Fit a zero-inflated or hurdle regression from a CSV");
  std::string reg_data;
  std::string reg_response;
  std::string reg_factors;
  std::string reg_family = "zinb";
  std::string reg_link = "probit";
  std::string reg_grid;
  double reg_level = 0.95;
  std::string reg_json;
  std::string reg_csv;
  cmd_regress->add_option("--data", reg_data, "input CSV path")->required();
  cmd_regress->add_option("--response", reg_response, "response column name")
      ->required();
  cmd_regress->add_option("--factors", reg_factors,
                          "comma-separated factor columns");
  cmd_regress->add_option("--family", reg_family,
                          "nb, bnb, zinb, zibnb, zanb, zabnb")
      ->capture_default_str();
  cmd_regress->add_option("--zero-link", reg_link, "logit or probit")
      ->capture_default_str();
  cmd_regress->add_option("--m-grid", reg_grid,
                          "M values for the CI stability report "
                          "(default 1000,5000,20000)");
  cmd_regress->add_option("--level", reg_level, "CI level")
      ->capture_default_str();
  cmd_regress->add_option("--json", reg_json, "JSON output path");
  cmd_regress->add_option("--out", reg_csv, "per-coefficient CI CSV path");
  cmd_regress->callback([&]() {
    namespace inf = trifree::infer;
    const trifree::csvio::IngestSpec ingest{reg_response,
                                            split_list(reg_factors)};
    const inf::Dataset data = trifree::csvio::csv_ingest(reg_data, ingest);
    const auto link = inf::link_from_name(reg_link);
    if (!link || *link == inf::Link::log) {
      throw std::invalid_argument("--zero-link must be logit or probit");
    }
    const inf::RegressionSpec spec{fit_family(reg_family), *link};
    const std::vector<long> grid =
        reg_grid.empty() ? std::vector<long>{1000, 5000, 20000}
                         : parse_grid(reg_grid);
    const inf::MleFit fit = inf::fit_regression(spec, data);
    if (!fit.converged) {
      std::cerr << "error: the fit did not converge (iterations "
                << fit.iterations << ", gradient norm " << fit.grad_norm
                << ")\n";
      exit_code = kExitNonConvergence;
      return;
    }
    const std::size_t n = data.responses.size();

    ordered_json intervals = ordered_json::array();
    std::vector<std::vector<bool>> significance;
    std::ostringstream csv;
    trifree::csvio::write_comment(
        csv, std::string("version=") + trifree::studies::kVersion);
    trifree::csvio::write_comment(csv, "data=" + reg_data);
    trifree::csvio::write_row(csv, {"M", "coefficient", "estimate", "se",
                                    "lower", "upper", "significant"});
    const double z =
        trifree::specfun::normal_quantile(0.5 * (1.0 + reg_level));
    for (long m : grid) {
      const trifree::fisher::FisherMatrix f =
          inf::regression_fim(spec, fit, data, m);
      const trifree::fisher::CiSet ci =
          trifree::fisher::wald_ci(fit.params, f, n, reg_level);
      intervals.push_back({{"M", m}, {"coefficients", ci_json(ci)}});
      std::vector<bool> sig;
      for (std::size_t k = 0; k < ci.labels.size(); ++k) {
        const bool s = ci.lower[k] > 0.0 || ci.upper[k] < 0.0;
        sig.push_back(s);
        const double se = 0.5 * (ci.upper[k] - ci.lower[k]);
        trifree::csvio::write_row(
            csv, {std::to_string(m), ci.labels[k],
                  trifree::csvio::format_double(ci.estimate[k]),
                  trifree::csvio::format_double(se / z),
                  trifree::csvio::format_double(ci.lower[k]),
                  trifree::csvio::format_double(ci.upper[k]),
                  s ? "1" : "0"});
      }
      significance.push_back(std::move(sig));
    }

    ordered_json stable_per = ordered_json::object();
    bool stable_all = true;
    for (std::size_t k = 0; k < fit.labels.size(); ++k) {
      bool stable = true;
      for (std::size_t gi = 1; gi < significance.size(); ++gi) {
        stable = stable && significance[gi][k] == significance[0][k];
      }
      stable_per[fit.labels[k]] = stable;
      stable_all = stable_all && stable;
    }

    ordered_json j{{"family", reg_family},
                   {"zero_link", reg_link},
                   {"n", n},
                   {"converged", fit.converged},
                   {"iterations", fit.iterations},
                   {"loglik", fit.loglik},
                   {"aic", inf::aic(fit)},
                   {"bic", inf::bic(fit, n)},
                   {"level", reg_level},
                   {"intervals", intervals},
                   {"significance_stable", stable_all},
                   {"significance_stable_per_coefficient", stable_per}};
    write_json(reg_json, j);
    if (!reg_csv.empty()) write_text(reg_csv, csv.str());
  });

  // ---- ingest-check -----------------------------------------------------------
  auto* cmd_ingest = app.add_subcommand(
      "ingest-check", "Validate and summarize a CSV dataset");
  std::string chk_data;
  std::string chk_response;
  std::string chk_factors;
  std::string chk_out;
  cmd_ingest->add_option("--data", chk_data, "input CSV path")->required();
  cmd_ingest->add_option("--response", chk_response, "response column name")
      ->required();
  cmd_ingest->add_option("--factors", chk_factors,
                         "comma-separated factor columns");
  cmd_ingest->add_option("--out", chk_out, "JSON path (default stdout)");
  cmd_ingest->callback([&]() {
    const trifree::csvio::IngestSpec ingest{chk_response,
                                            split_list(chk_factors)};
    const trifree::infer::Dataset data =
        trifree::csvio::csv_ingest(chk_data, ingest);
    long zeros = 0;
    long max_y = 0;
    for (long y : data.responses) {
      if (y == 0) ++zeros;
      max_y = std::max(max_y, y);
    }
    ordered_json j{
        {"n", data.responses.size()},
        {"response", chk_response},
        {"columns", data.column_names},
        {"zero_fraction", double(zeros) / double(data.responses.size())},
        {"max_response", max_y}};
    write_json(chk_out, j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const trifree::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
