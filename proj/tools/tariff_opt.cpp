#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <tariffopt/coeff_dist.hpp>
#include <tariffopt/config_io.hpp>
#include <tariffopt/data.hpp>
#include <tariffopt/error.hpp>
#include <tariffopt/experiments.hpp>
#include <tariffopt/optimizer.hpp>
#include <tariffopt/regression.hpp>
#include <tariffopt/report.hpp>
#include <tariffopt/scenarios.hpp>
#include <tariffopt/version.hpp>

using namespace tariffopt;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty list");
  return out;
}

Date parse_date_arg(const std::string& text) {
  const auto d = parse_date(text);
  if (!d) throw Error(ErrorCode::InvalidConfig, "bad date '" + text + "' (expected YYYY-MM-DD)");
  return *d;
}

void print_solution_summary(const optimizer::TariffSolution& sol) {
  std::printf("status %s after %d iterations\n", optimizer::to_string(sol.report.status).c_str(),
              sol.report.iterations);
  std::printf("expected profit %.4f GBP, CVaR %.4f GBP, objective %.4f\n", sol.expected_profit, sol.cvar,
              sol.objective);
  std::printf("forward %.4f kWh/slot, PPA %.4f kWh\n", sol.pB, sol.pC_ppa);
}

// Shared inputs of the experiment subcommands.
struct RunArgs {
  std::string spec;
  std::string scenarios;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--spec", spec, "Problem spec (TOML or JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--scenarios", scenarios, "Scenario file")->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir, "Run directory")->required();
    app->add_option("--seed", seed, "Seed recorded in the manifest and used for resampling");
    app->add_option("--threads", threads, "Worker threads (0: all cores)");
  }

  experiments::SolveSettings settings() const {
    experiments::SolveSettings s;
    s.threads = threads;
    return s;
  }

  // Canonical run description; hashed into the manifest.
  io::Json config(const std::string& command, const optimizer::ProblemSpec& p, io::Json extra) const {
    io::Json c;
    c["command"] = command;
    c["spec"] = io::to_json(p);
    c["scenarios_fnv1a"] = report::hex64(report::fnv1a(read_bytes(scenarios)));
    c["seed"] = seed;
    c["options"] = std::move(extra);
    return c;
  }
};

coeff::PriceCoeffDistribution distribution_from(const std::string& fit_path, double mean, double std) {
  if (!fit_path.empty()) {
    const auto fit = io::read_fit(fit_path);
    if (!fit.beta_distribution) {
      throw Error(ErrorCode::InvalidConfig, "fit file has no single price coefficient distribution");
    }
    auto d = *fit.beta_distribution;
    d.truncate_at_zero = true;
    return d;
  }
  if (!(std < 0.0) && mean < 0.0) return {mean, std, 0.0, true};
  throw Error(ErrorCode::InvalidConfig, "give --fit or a negative --beta-mean with --beta-std");
}

std::pair<double, double> break_even_prices(const scenarios::ScenarioSet& set) {
  double b = 0.0, num = 0.0, den = 0.0;
  for (const auto& sc : set.scenarios) {
    b += sc.probability * sc.pool.mean();
    num += sc.probability * sc.availability.dot(sc.pool);
    den += sc.probability * sc.availability.sum();
  }
  return {b, den > 0.0 ? num / den : b};
}

std::vector<double> around(double centre) {
  std::vector<double> out;
  for (double d : {-1.0, -0.5, 0.0, 0.5, 1.0}) out.push_back(std::round((centre + d) * 1000.0) / 1000.0);
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Time-of-use tariff and contract portfolio optimisation"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a meter CSV and write a snapshot");
  std::string in_path, out_path, holidays;
  int max_gap = -1, agg = 1;
  ingest->add_option("--input", in_path, "Meter CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", out_path, "Output (.bin snapshot or .csv)")->required();
  ingest->add_option("--interpolate-gaps", max_gap, "Interpolate gaps of at most this many slots");
  ingest->add_option("--aggregation-count", agg, "Number of households behind the series");
  ingest->add_option("--holidays", holidays, "File of holiday dates")->check(CLI::ExistingFile);
  ingest->callback([&] {
    data::IngestOptions opt;
    opt.aggregation_count = agg;
    if (max_gap >= 0) {
      opt.gap_policy = data::GapPolicy::Interpolate;
      opt.max_interpolated_gap = max_gap;
    }
    auto series = data::ingest_csv(in_path, {}, opt);
    if (!holidays.empty()) series = data::apply_holidays(series, data::read_holiday_file(holidays));
    if (fs::path(out_path).extension() == ".bin") {
      data::write_binary(series, out_path);
    } else {
      data::write_csv(series, out_path);
    }
    std::printf("%zu records (%zu imputed) from %s to %s\n", series.size(), series.imputed_rows().size(),
                series.first_timestamp().iso().c_str(), series.last_timestamp().iso().c_str());
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic meter series with planted coefficients");
  std::string synth_config;
  std::uint64_t seed = 0;
  synth->add_option("--config", synth_config, "Synthesis config (TOML or JSON)")->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "RNG seed")->required();
  synth->add_option("--out", out_path, "Output (.csv or .bin)")->required();
  synth->callback([&] {
    const auto cfg = synth_config.empty() ? data::SynthConfig::defaults() : data::read_synth_config(synth_config);
    const auto series = data::synthesize(cfg, seed);
    if (fs::path(out_path).extension() == ".bin") {
      data::write_binary(series, out_path);
    } else {
      data::write_csv(series, out_path);
    }
    std::printf("%zu records written to %s\n", series.size(), out_path.c_str());
  });

  // synth-paths
  auto* synth_paths = app.add_subcommand("synth-paths", "Generate a seasonal synthetic pool or solar path library");
  std::string role = "pool", first = "2010-01-01", last = "2019-12-31";
  synth_paths->add_option("--role", role, "pool or solar")->check(CLI::IsMember({"pool", "solar"}));
  synth_paths->add_option("--first", first, "First date");
  synth_paths->add_option("--last", last, "Last date");
  synth_paths->add_option("--seed", seed, "RNG seed")->required();
  synth_paths->add_option("--out", out_path, "Output CSV")->required();
  synth_paths->callback([&] {
    scenarios::SeasonalLibraryConfig cfg;
    cfg.first = parse_date_arg(first);
    cfg.last = parse_date_arg(last);
    const auto r = role == "pool" ? scenarios::PathRole::Pool : scenarios::PathRole::Solar;
    if (r == scenarios::PathRole::Solar) cfg.hourly = false;
    const auto lib = scenarios::synthesize_library(r, cfg, seed);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
    out << lib.to_csv();
    std::printf("%zu daily %s paths written to %s\n", lib.size(), role.c_str(), out_path.c_str());
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a demand model");
  std::string model = "large", data_path, split_path;
  fit->add_option("--model", model, "small, large or combined")->check(CLI::IsMember({"small", "large", "combined"}));
  fit->add_option("--data", data_path, "Meter series (.csv or .bin)")->required()->check(CLI::ExistingFile);
  fit->add_option("--split", split_path, "Train/validation/test split")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", out_path, "Output fit.json")->required();
  fit->callback([&] {
    const auto series = data::load_series(data_path);
    const auto split = io::read_split(split_path);
    io::FitArtifact art;
    art.kind = regression::parse_model_kind(model);
    const auto design = regression::build_features(series, regression::FeatureSpec::for_kind(art.kind), split);
    art.transform = design.transform;
    if (art.kind == regression::ModelKind::Combined) {
      const auto cf = regression::fit_combined(design.train);
      art.fits.assign(cf.slots.begin(), cf.slots.end());
      art.metrics = regression::evaluate(cf, design.train, design.test);
    } else {
      auto f = regression::fit_ols(design.train);
      art.metrics = regression::evaluate(f, design.test);
      art.beta_distribution = coeff::beta1_distribution(f, design.train);
      art.fits.push_back(std::move(f));
    }
    io::write_fit(out_path, art);
    const auto& m = art.metrics;
    std::printf("%s model, %zu columns, %lld training rows\n", model.c_str(), art.transform.column_names.size(),
                static_cast<long long>(design.train.rows()));
    std::printf("train MAE %.4f RMSE %.4f R2 %.4f | test MAE %.4f RMSE %.4f R2 %.4f\n", m.mae_train, m.rmse_train,
                m.r2, m.mae_test, m.rmse_test, m.r2_test);
    if (art.beta_distribution) {
      std::printf("price coefficient %.6f (std %.6f)\n", art.beta_distribution->mean, art.beta_distribution->std);
    }
  });

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Fill a problem spec's baseline demand from a fitted model");
  std::string fit_path, spec_path;
  baseline->add_option("--fit", fit_path, "fit.json")->required()->check(CLI::ExistingFile);
  baseline->add_option("--data", data_path, "Meter series covering the horizon")->required()->check(CLI::ExistingFile);
  baseline->add_option("--spec", spec_path, "Problem spec with horizon and start")->required()->check(CLI::ExistingFile);
  baseline->add_option("--out", out_path, "Output spec (.json)")->required();
  baseline->callback([&] {
    const auto art = io::read_fit(fit_path);
    const auto series = data::load_series(data_path);
    auto doc = io::read_document(spec_path);
    if (!doc.contains("start") || !doc.contains("horizon")) {
      throw Error(ErrorCode::InvalidConfig, "spec needs 'start' and 'horizon' to derive a baseline");
    }
    const auto start = Timestamp::parse(doc["start"].get<std::string>());
    const auto begin = start ? series.index_of(*start) : -1;
    const auto horizon = doc["horizon"].get<std::ptrdiff_t>();
    if (begin < 0 || begin + horizon > static_cast<std::ptrdiff_t>(series.size())) {
      throw Error(ErrorCode::InsufficientHistory, "series does not cover the spec horizon");
    }
    const auto dm = regression::apply_transform(series, art.transform, static_cast<std::size_t>(begin),
                                                static_cast<std::size_t>(begin + horizon - 1));
    if (dm.rows() != horizon) throw Error(ErrorCode::InsufficientHistory, "not enough history before the horizon");
    Eigen::VectorXd b(dm.rows());
    for (Eigen::Index i = 0; i < dm.rows(); ++i) {
      const auto& f = art.fits.size() == 1
                          ? art.fits.front()
                          : art.fits[static_cast<std::size_t>(dm.row_times[static_cast<std::size_t>(i)].slot_of_day())];
      b[i] = dm.X.row(i).dot(f.beta);
      if (f.price_index >= 0) b[i] -= f.beta[f.price_index] * dm.X(i, f.price_index);
    }
    doc["baseline_demand"] = std::vector<double>(b.data(), b.data() + b.size());
    io::write_json(out_path, io::to_json(io::problem_from_json(doc)));
    std::printf("baseline demand for %lld slots written to %s\n", static_cast<long long>(b.size()), out_path.c_str());
  });

  // diagnose-clt
  auto* clt = app.add_subcommand("diagnose-clt", "Check the design conditions behind the normal price coefficient");
  std::string sizes_text;
  double noether = 0.05;
  clt->add_option("--fit", fit_path, "fit.json")->required()->check(CLI::ExistingFile);
  clt->add_option("--data", data_path, "Meter series")->required()->check(CLI::ExistingFile);
  clt->add_option("--sizes", sizes_text, "Comma-separated sample sizes")->required();
  clt->add_option("--noether-threshold", noether, "Largest acceptable Noether ratio");
  clt->add_option("--seed", seed, "Bootstrap seed");
  clt->add_option("--out", out_path, "Output CSV")->required();
  clt->callback([&] {
    const auto art = io::read_fit(fit_path);
    const auto series = data::load_series(data_path);
    const auto dm = regression::apply_transform(series, art.transform);
    std::vector<std::size_t> sizes;
    for (double v : parse_list(sizes_text)) sizes.push_back(static_cast<std::size_t>(v));
    coeff::CltOptions opt;
    opt.noether_threshold = noether;
    const auto d = coeff::clt_diagnostic(dm, sizes, seed, opt);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
    out << "n,lambda_min,lambda_max,rank_deficient\n";
    char buf[128];
    for (std::size_t i = 0; i < d.sample_sizes.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d\n", d.sample_sizes[i], d.min_eigenvalues[i],
                    d.max_eigenvalues[i], d.rank_deficient[i] ? 1 : 0);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "# noether_ratio,%.17g\n", d.noether_ratio);
    out << buf;
    std::printf("noether ratio %.4g, %s\n", d.noether_ratio, d.pass ? "PASS" : "FAIL");
    for (const auto& f : d.failures) std::printf("  %s\n", f.c_str());
  });

  // gen-scenarios
  auto* gen = app.add_subcommand("gen-scenarios", "Resample pool and solar paths and draw price coefficients");
  std::string pool_path, solar_path, start_date;
  int days = 7;
  std::size_t count = 1000;
  double beta_mean = 0.0, beta_std = -1.0, shift = 0.0;
  gen->add_option("--pool", pool_path, "Pool price history CSV")->required()->check(CLI::ExistingFile);
  gen->add_option("--solar", solar_path, "Solar availability history CSV")->required()->check(CLI::ExistingFile);
  gen->add_option("--fit", fit_path, "fit.json supplying the price coefficient distribution")
      ->check(CLI::ExistingFile);
  gen->add_option("--beta-mean", beta_mean, "Price coefficient mean (without --fit)");
  gen->add_option("--beta-std", beta_std, "Price coefficient std (without --fit)");
  gen->add_option("--beta-shift", shift, "Elasticity shift subtracted from the mean");
  gen->add_option("--split", split_path, "Split defining training and comparison years")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--start", start_date, "First horizon date")->required();
  gen->add_option("--days", days, "Horizon length in days");
  gen->add_option("--count", count, "Number of scenarios");
  gen->add_option("--seed", seed, "RNG seed")->required();
  gen->add_option("--out", out_path, "Output scenario file")->required();
  gen->callback([&] {
    const auto split = io::read_split(split_path);
    const auto pool = scenarios::PathLibrary::from_csv(pool_path, scenarios::PathRole::Pool);
    const auto solar = scenarios::PathLibrary::from_csv(solar_path, scenarios::PathRole::Solar);
    std::vector<Date> dates;
    const Date d0 = parse_date_arg(start_date);
    for (int d = 0; d < days; ++d) dates.push_back(d0 + std::chrono::days(d));
    const auto dist = distribution_from(fit_path, beta_mean, beta_std).with_shift(shift);
    const auto pool_paths =
        scenarios::sample_paths(pool, scenarios::fit_date_distributions(pool, split), dates, count, seed);
    const auto solar_paths =
        scenarios::sample_paths(solar, scenarios::fit_date_distributions(solar, split), dates, count, seed);
    const auto betas = coeff::sample_beta(dist, count, seed);
    const auto set = scenarios::assemble(pool_paths, solar_paths, betas, Timestamp::from_date_slot(d0, 0));
    io::write_scenarios(out_path, set);
    std::printf("%zu scenarios over %lld slots written to %s\n", set.size(), static_cast<long long>(set.horizon()),
                out_path.c_str());
  });

  // reduce
  auto* red = app.add_subcommand("reduce", "Reduce a scenario set by mean-shift on deterministic objectives");
  std::string scn_in;
  double bandwidth = 0.0;
  unsigned threads = 0;
  red->add_option("--in", scn_in, "Raw scenario file")->required()->check(CLI::ExistingFile);
  red->add_option("--spec", spec_path, "Problem spec")->required()->check(CLI::ExistingFile);
  red->add_option("--bandwidth", bandwidth, "Mean-shift bandwidth (default: Silverman)");
  red->add_option("--threads", threads, "Worker threads (0: all cores)");
  red->add_option("--out", out_path, "Output scenario file")->required();
  red->callback([&] {
    const auto set = io::read_scenarios(scn_in);
    const auto spec = io::read_problem_spec(spec_path);
    std::optional<double> h;
    if (red->count("--bandwidth") > 0) h = bandwidth;
    if (!h && set.provenance == scenarios::Provenance::Reduced) h = set.bandwidth;
    (void)threads;
    const auto f = scenarios::deterministic_objectives(spec, set);
    const auto reduced = scenarios::reduce_with_objectives(set, f, h);
    io::write_scenarios(out_path, reduced);
    std::printf("%zu -> %zu scenarios (bandwidth %.6g)\n", set.size(), reduced.size(), reduced.bandwidth);
  });

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the risk-averse tariff problem");
  double chi = -1.0;
  std::string scn_path;
  bool summary_only = false;
  solve->add_option("--spec", spec_path, "Problem spec")->required()->check(CLI::ExistingFile);
  solve->add_option("--scenarios", scn_path, "Scenario file")->required()->check(CLI::ExistingFile);
  solve->add_option("--chi", chi, "Risk weight (overrides the spec)");
  solve->add_option("--out", out_path, "Output solution JSON")->required();
  solve->add_flag("--summary-only", summary_only, "Omit per-scenario arrays");
  solve->callback([&] {
    auto spec = io::read_problem_spec(spec_path);
    if (chi >= 0.0) spec.chi = chi;
    const auto set = io::read_scenarios(scn_path);
    const auto sol = optimizer::solve_stochastic(spec, set);
    const auto check = optimizer::validate_solution(spec, set, sol);
    auto doc = io::to_json(sol, !summary_only);
    doc["validation"] = {{"ok", check.ok}, {"failures", check.failures}};
    io::write_json(out_path, doc);
    print_solution_summary(sol);
    if (!check.ok) throw Error(ErrorCode::SolverFailure, "solution failed validation: " + check.failures.front());
  });

  // frontier
  auto* frontier = app.add_subcommand("frontier", "Trace the efficient frontier over chi");
  RunArgs fr_args;
  double step = 0.1;
  fr_args.attach(frontier);
  frontier->add_option("--step", step, "Chi grid step");
  frontier->callback([&] {
    const auto spec = io::read_problem_spec(fr_args.spec);
    const auto set = io::read_scenarios(fr_args.scenarios);
    report::ReportInputs in;
    in.frontier = experiments::efficient_frontier(spec, set, experiments::chi_grid(step), fr_args.settings());
    in.seed = fr_args.seed;
    in.config = fr_args.config("frontier", spec, {{"step", step}}).dump();
    report::write_report(fr_args.out_dir, in);
    std::printf("%zu frontier points, validator failures %d, %s\n", in.frontier->points.size(),
                in.frontier->validator_failures, in.frontier->monotone() ? "monotone" : "NOT monotone");
  });

  // grid
  auto* grid = app.add_subcommand("grid", "Contract decisions over a grid of contract prices");
  RunArgs gr_args;
  std::string pB_text, ppa_text;
  double grid_chi = 0.0;
  gr_args.attach(grid);
  grid->add_option("--pB-prices", pB_text, "Forward contract prices (default: around break-even)");
  grid->add_option("--ppa-prices", ppa_text, "PPA prices (default: around break-even)");
  grid->add_option("--chi", grid_chi, "Risk weight");
  grid->callback([&] {
    const auto spec = io::read_problem_spec(gr_args.spec);
    const auto set = io::read_scenarios(gr_args.scenarios);
    const auto [b, c] = break_even_prices(set);
    const auto pB = pB_text.empty() ? around(b) : parse_list(pB_text);
    const auto ppa = ppa_text.empty() ? around(c) : parse_list(ppa_text);
    report::ReportInputs in;
    in.grid = experiments::contract_grid(spec, set, pB, ppa, grid_chi, gr_args.settings());
    in.seed = gr_args.seed;
    in.config = gr_args.config("grid", spec, {{"chi", grid_chi}, {"pB_prices", pB}, {"ppa_prices", ppa}}).dump();
    report::write_report(gr_args.out_dir, in);
    std::printf("%zu grid cells, validator failures %d\n", in.grid->cells.size(), in.grid->validator_failures);
  });

  // beta-sweep
  auto* sweep = app.add_subcommand("beta-sweep", "Re-solve with shifted price coefficients");
  RunArgs sw_args;
  std::string shifts_text = "0,1,2,4,8", regulation = "both";
  double sweep_chi = 0.0;
  sw_args.attach(sweep);
  sweep->add_option("--fit", fit_path, "fit.json supplying the coefficient distribution")->check(CLI::ExistingFile);
  sweep->add_option("--beta-mean", beta_mean, "Coefficient mean (without --fit)");
  sweep->add_option("--beta-std", beta_std, "Coefficient std (without --fit)");
  sweep->add_option("--shifts", shifts_text, "Comma-separated shifts");
  sweep->add_option("--regulation", regulation, "indexed, free or both")
      ->check(CLI::IsMember({"indexed", "free", "both"}));
  sweep->add_option("--chi", sweep_chi, "Risk weight");
  sweep->callback([&] {
    const auto spec = io::read_problem_spec(sw_args.spec);
    const auto set = io::read_scenarios(sw_args.scenarios);
    const auto dist = distribution_from(fit_path, beta_mean, beta_std);
    const auto shifts = parse_list(shifts_text);
    report::ReportInputs in;
    for (auto reg : {optimizer::PriceRegulation::Indexed, optimizer::PriceRegulation::Free}) {
      if (regulation != "both" && regulation != optimizer::to_string(reg)) continue;
      in.sweeps.push_back(experiments::beta_shift_sweep(spec, set, dist, shifts, sweep_chi, reg, sw_args.seed,
                                                        sw_args.settings()));
    }
    in.seed = sw_args.seed;
    in.config = sw_args
                    .config("beta-sweep", spec,
                            {{"shifts", shifts},
                             {"regulation", regulation},
                             {"chi", sweep_chi},
                             {"beta_mean", dist.mean},
                             {"beta_std", dist.std}})
                    .dump();
    report::write_report(sw_args.out_dir, in);
    for (const auto& s : in.sweeps) {
      std::printf("%s:", optimizer::to_string(s.regulation).c_str());
      for (const auto& p : s.points) std::printf(" shift %g -> %.4f p/kWh;", p.beta_shift, p.average_price);
      std::printf(" validator failures %d\n", s.validator_failures);
    }
  });

  // report
  auto* rep = app.add_subcommand("report", "Full report: frontier, grid, sweeps, profit CDFs and price bands");
  RunArgs rp_args;
  std::string raw_path;
  rp_args.attach(rep);
  rep->add_option("--raw", raw_path, "Raw scenario file, for the reduction ECDF")->check(CLI::ExistingFile);
  rep->add_option("--fit", fit_path, "fit.json for the beta-shift sweeps")->check(CLI::ExistingFile);
  rep->add_option("--beta-mean", beta_mean, "Coefficient mean (without --fit)");
  rep->add_option("--beta-std", beta_std, "Coefficient std (without --fit)");
  rep->callback([&] {
    auto spec = io::read_problem_spec(rp_args.spec);
    const auto set = io::read_scenarios(rp_args.scenarios);
    const auto settings = rp_args.settings();
    report::ReportInputs in;
    in.frontier = experiments::efficient_frontier(spec, set, experiments::chi_grid(0.1), settings);
    const auto [b, c] = break_even_prices(set);
    in.grid = experiments::contract_grid(spec, set, around(b), around(c), 0.0, settings);
    const bool have_dist = !fit_path.empty() || beta_std >= 0.0;
    if (have_dist) {
      const auto dist = distribution_from(fit_path, beta_mean, beta_std);
      for (auto reg : {optimizer::PriceRegulation::Indexed, optimizer::PriceRegulation::Free}) {
        in.sweeps.push_back(experiments::beta_shift_sweep(spec, set, dist, {0, 1, 2, 4, 8}, spec.chi, reg,
                                                          rp_args.seed, settings));
      }
    }
    const double spec_chi = spec.chi;
    for (double x : {0.0, 1.0}) {
      spec.chi = x;
      const auto sol = optimizer::solve_stochastic(spec, set);
      char label[32];
      std::snprintf(label, sizeof label, "chi=%g", x);
      in.profit_cdfs.push_back({label, sol.profit_per_scenario, sol.probabilities});
    }
    spec.chi = spec_chi;
    const auto sol = optimizer::solve_stochastic(spec, set);
    in.price_bands = experiments::price_bands(spec, sol);
    if (!raw_path.empty()) {
      const auto raw = io::read_scenarios(raw_path);
      const auto rf = scenarios::deterministic_objectives(spec, raw);
      const auto sf = scenarios::deterministic_objectives(spec, set);
      in.raw_objectives = report::ProfitDistribution{
          "raw", Eigen::Map<const Eigen::VectorXd>(rf.data(), static_cast<Eigen::Index>(rf.size())),
          raw.probabilities()};
      in.reduced_objectives = report::ProfitDistribution{
          "reduced", Eigen::Map<const Eigen::VectorXd>(sf.data(), static_cast<Eigen::Index>(sf.size())),
          set.probabilities()};
    }
    in.seed = rp_args.seed;
    io::Json extra;
    extra["raw_fnv1a"] = raw_path.empty() ? io::Json(nullptr) : io::Json(report::hex64(report::fnv1a(read_bytes(raw_path))));
    extra["beta"] = have_dist ? io::Json(fit_path.empty() ? "args" : "fit") : io::Json(nullptr);
    extra["beta_mean"] = beta_mean;
    extra["beta_std"] = beta_std;
    in.config = rp_args.config("report", spec, extra).dump();
    const auto files = report::write_report(rp_args.out_dir, in);
    std::printf("%zu files written to %s\n", files.size(), rp_args.out_dir.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    const std::string code(to_string(e.code()));
    std::string msg = e.what();
    if (msg.starts_with(code + ": ")) msg.erase(0, code.size() + 2);
    std::fprintf(stderr, "error [%s]: %s\n", code.c_str(), msg.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
