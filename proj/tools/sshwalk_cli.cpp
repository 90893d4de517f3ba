// Command-line front end: every subcommand writes CSV or JSON only.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "sshwalk/experiment.hpp"
#include "sshwalk/spectral.hpp"
#include "sshwalk/topology.hpp"

using namespace sshwalk;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUnconverged = 4;

// Flags that override the config file when given.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> model;
  std::optional<std::size_t> n_sites;
  std::optional<double> gamma_bar;
  std::optional<double> alpha;
  std::optional<double> gamma_l_even;
  std::optional<std::size_t> i_max;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> initial;
  std::optional<std::size_t> n_av;
  std::optional<std::size_t> n_step;
  std::optional<std::size_t> k;
  std::optional<std::size_t> restarts;
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::optional<std::size_t> points;
  std::optional<std::string> output_dir;
};

struct Globals {
  int threads = 0;
  bool raw_units = false;
};

void add_model_flags(CLI::App *app, Overrides &o) {
  app->add_option("--config", o.config_path, "JSON experiment config");
  app->add_option("--model", o.model, "ssh, feedback or set");
  app->add_option("--n", o.n_sites, "number of sites N");
  app->add_option("--gamma-bar", o.gamma_bar, "mean rate");
  app->add_option("--alpha", o.alpha, "bias alpha");
  app->add_option("--gamma-l-even", o.gamma_l_even, "feedback walk: fixed left rate");
}

void add_initial_flag(CLI::App *app, Overrides &o) {
  app->add_option("--initial,--rho0", o.initial, "symmetric or site:<k>");
}

void add_sampling_flags(CLI::App *app, Overrides &o) {
  app->add_option("--i-max", o.i_max, "number of trajectories");
  app->add_option("--seed", o.seed, "master seed");
  add_initial_flag(app, o);
}

void add_pipeline_flags(CLI::App *app, Overrides &o) {
  app->add_option("--n-av", o.n_av, "moving-average window");
  app->add_option("--n-step", o.n_step, "subsampling stride");
  app->add_option("--k", o.k, "number of exponential terms");
  app->add_option("--restarts", o.restarts, "random fit restarts");
}

void add_sweep_flags(CLI::App *app, Overrides &o) {
  app->add_option("--alpha-min", o.alpha_min, "sweep start");
  app->add_option("--alpha-max", o.alpha_max, "sweep end");
  app->add_option("--points,--steps", o.points, "sweep points");
  app->add_option("--output-dir", o.output_dir, "directory for output files");
}

ExperimentConfig resolve(const Overrides &o, const Globals &g) {
  json doc = o.config_path ? json::parse(read_file(*o.config_path)) : json::object();
  if (!doc.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }
  if (o.model) doc["model"] = *o.model;
  if (o.n_sites) doc["n_sites"] = *o.n_sites;
  json &rates = doc["rates"];
  if (rates.is_null()) rates = json::object();
  if (o.gamma_bar || o.alpha) {
    // Flags win over whichever parameterization the file used.
    rates.erase("gamma_l");
    rates.erase("gamma_r");
    rates.erase("gamma_l_odd");
  }
  if (o.gamma_bar) rates["gamma_bar"] = *o.gamma_bar;
  if (o.alpha) rates["alpha"] = *o.alpha;
  if (o.gamma_l_even) rates["gamma_l_even"] = *o.gamma_l_even;
  if (o.i_max) doc["sampling"]["i_max"] = *o.i_max;
  if (o.seed) doc["sampling"]["seed"] = *o.seed;
  if (o.initial) doc["sampling"]["initial"] = *o.initial;
  if (o.n_av) doc["pipeline"]["n_av"] = *o.n_av;
  if (o.n_step) doc["pipeline"]["n_step"] = *o.n_step;
  if (o.k) doc["pipeline"]["k"] = *o.k;
  if (o.restarts) doc["pipeline"]["restarts"] = *o.restarts;
  if (o.alpha_min) doc["sweep"]["alpha_min"] = *o.alpha_min;
  if (o.alpha_max) doc["sweep"]["alpha_max"] = *o.alpha_max;
  if (o.points) doc["sweep"]["points"] = *o.points;
  if (o.output_dir) doc["output"]["directory"] = *o.output_dir;
  if (g.raw_units) doc["raw_units"] = true;
  return ExperimentConfig::from_json(doc);
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

void report_errors(const SweepReport &report) {
  for (const auto &e : report.errors) {
    std::cerr << "alpha=" << format_double(e.alpha) << ": " << e.message << "\n";
  }
}

int sweep_status(const SweepReport &report) {
  if (!report.errors.empty()) return kExitNumerical;
  return report.unconverged ? kExitUnconverged : 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Escape-time statistics of the staggered (SSH) random walk"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--threads", globals.threads, "cap on OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--raw-units", globals.raw_units,
               "report rates and times in raw units instead of units of 2 gamma_bar");

  Overrides o;
  std::string out_path;
  int status = 0;
  std::function<void()> action;

  auto *spectrum = app.add_subcommand("spectrum", "eigenvalues, parities and edge weights");
  add_model_flags(spectrum, o);
  add_sweep_flags(spectrum, o);
  std::string generator_path;
  spectrum->add_option("-o,--output", out_path, "CSV path (default stdout)");
  spectrum->add_option("--generator", generator_path, "also write the generator as JSON");
  spectrum->callback([&] {
    action = [&] {
      const ExperimentConfig cfg = resolve(o, globals);
      const double scale = cfg.raw_units ? 1.0 : cfg.rate_unit();
      CsvWriter csv = spectrum_writer();
      const std::vector<double> alphas =
          cfg.sweep ? cfg.sweep->values() : std::vector<double>{cfg.alpha};
      for (double alpha : alphas) {
        const ChainGenerator gen = generator_at(cfg, alpha);
        append_spectrum_rows(csv, alpha, classify_parity(eigendecompose(gen), gen), scale);
      }
      emit(out_path, csv.str());
      if (!generator_path.empty()) {
        emit(generator_path, to_json(generator_at(cfg, cfg.alpha)).dump(2) + "\n");
      }
    };
  });

  auto *winding = app.add_subcommand("winding", "counting-field winding number");
  add_model_flags(winding, o);
  int grid = kDefaultWindingGrid;
  winding->add_option("--grid", grid, "points on the chi circle")->check(CLI::Range(16, 1 << 24));
  winding->add_option("-o,--output", out_path, "JSON path (default stdout)");
  winding->callback([&] {
    action = [&] {
      const ExperimentConfig cfg = resolve(o, globals);
      if (cfg.model != Model::ssh) {
        throw std::invalid_argument("winding is defined for the ssh model");
      }
      const RateConfig rates = cfg.rates();
      json doc;
      try {
        doc = to_json(winding_number(rates, grid), rates);
      } catch (const GapClosedError &ex) {
        doc = {{"gamma_bar", rates.gamma_bar()},
               {"alpha", rates.alpha()},
               {"W", nullptr},
               {"zak_phase", nullptr},
               {"label", to_string(Phase::critical)},
               {"min_norm", ex.min_norm()}};
      }
      emit(out_path, doc.dump(2) + "\n");
    };
  });

  auto *etd = app.add_subcommand("etd", "analytic escape-time distribution");
  add_model_flags(etd, o);
  add_initial_flag(etd, o);
  double t_max = 0.0;
  std::size_t t_points = 201;
  etd->add_option("--t-max", t_max, "end of the time grid (default: 10 / smallest beta)");
  etd->add_option("--points", t_points, "grid points")->check(CLI::Range(2, 10000000));
  etd->add_option("-o,--output", out_path, "CSV path (default stdout)");
  auto *coefficients = etd->add_subcommand("coefficients", "beta_j, a_j, A_j and parities");
  add_model_flags(coefficients, o);
  add_initial_flag(coefficients, o);
  coefficients->add_option("-o,--output", out_path, "CSV path (default stdout)");
  auto *moments = etd->add_subcommand("moments", "moments and cumulants up to order 6");
  add_model_flags(moments, o);
  add_initial_flag(moments, o);
  int max_order = 3;
  moments->add_option("--order", max_order, "highest order")->check(CLI::Range(1, 6));
  moments->add_option("-o,--output", out_path, "JSON path (default stdout)");
  etd->callback([&] {
    action = [&] {
      const ExperimentConfig cfg = resolve(o, globals);
      const ChainGenerator gen = generator_at(cfg, cfg.alpha);
      const EtdModel model =
          analytic_etd(gen, cfg.sampling.initial.distribution(cfg.n_sites));
      const double factor = cfg.time_factor();
      if (coefficients->parsed()) {
        emit(out_path, etd_csv(model, factor));
        return;
      }
      if (moments->parsed()) {
        const MomentSet m = moments_and_cumulants(model, max_order);
        json mu = json::array(), kappa = json::array();
        double scale = 1.0;
        for (int n = 1; n <= max_order; ++n) {
          scale *= factor;
          mu.push_back(m.moments[static_cast<std::size_t>(n)] * scale);
          kappa.push_back(m.cumulants[static_cast<std::size_t>(n)] * scale);
        }
        const json doc = {{"time_unit", cfg.time_unit_label()},
                          {"mu_0", m.moments[0]},
                          {"moments", mu},
                          {"cumulants", kappa}};
        emit(out_path, doc.dump(2) + "\n");
        return;
      }
      const double end = t_max > 0.0 ? t_max : 10.0 * factor / model.min_beta();
      CsvWriter csv({"t", "P_e", "P_int"});
      for (std::size_t i = 0; i < t_points; ++i) {
        const double t = end * static_cast<double>(i) / static_cast<double>(t_points - 1);
        csv.row({format_double(t), format_double(etd_eval(model, t / factor) / factor),
                 format_double(integrated_etd_eval(model, t / factor))});
      }
      emit(out_path, csv.str());
    };
  });

  auto *sample = app.add_subcommand("sample", "Monte Carlo escape-time ensemble");
  add_model_flags(sample, o);
  add_sampling_flags(sample, o);
  sample->add_option("-o,--output", out_path, "ensemble file")->required();
  sample->callback([&] {
    action = [&] {
      const ExperimentConfig cfg = resolve(o, globals);
      EscapeTimeEnsemble ens = sample_ensemble(sampling_chain(cfg, cfg.alpha), cfg.sampling.i_max,
                                               cfg.sampling.initial, cfg.sampling.seed);
      ens.rescale(cfg.time_factor(), cfg.time_unit_label());
      write_file(out_path, encode_ensemble(ens, cfg.artifact_json()));
    };
  });

  auto *reconstruct = app.add_subcommand("reconstruct", "smoothed ETD curve from an ensemble");
  std::string input;
  std::size_t n_av = 100, n_step = 500;
  std::string kind = "integrated_etd";
  reconstruct->add_option("--input", input, "ensemble file")->required();
  reconstruct->add_option("--n-av", n_av, "moving-average window");
  reconstruct->add_option("--n-step", n_step, "subsampling stride");
  reconstruct->add_option("--kind", kind, "integrated_etd or etd");
  reconstruct->add_option("-o,--output", out_path, "CSV path (default stdout)");
  reconstruct->callback([&] {
    action = [&] {
      const EscapeTimeEnsemble ens = decode_ensemble(read_file(input));
      const ReconstructedCurve curve = parse_curve_kind(kind) == CurveKind::etd
                                           ? reconstruct_etd(ens, n_av, n_step)
                                           : reconstruct_integrated_etd(ens, n_av, n_step);
      emit(out_path, curve_csv(curve));
    };
  });

  auto *fit = app.add_subcommand("fit", "K-term exponential fit of an integrated ETD curve");
  std::size_t fit_k = 3;
  FitOptions fit_options;
  fit->add_option("--input", input, "curve CSV")->required();
  fit->add_option("--k", fit_k, "number of terms")->check(CLI::Range(1, 6));
  fit->add_option("--restarts", fit_options.random_restarts, "random restarts");
  fit->add_option("--seed", fit_options.seed, "restart seed");
  fit->add_option("--rate-scale", fit_options.rate_scale, "typical rate of the data")
      ->check(CLI::PositiveNumber);
  fit->add_option("-o,--output", out_path, "JSON path (default stdout)");
  fit->callback([&] {
    action = [&] {
      const FitResult result = fit_integrated_etd(parse_curve_csv(read_file(input)), fit_k,
                                                  fit_options);
      emit(out_path, to_json(result).dump(2) + "\n");
      if (!result.diagnostics.converged) status = kExitUnconverged;
    };
  });

  auto *sweep = app.add_subcommand("sweep-fit", "fitted exponent spectrum over an alpha sweep");
  add_model_flags(sweep, o);
  add_sampling_flags(sweep, o);
  add_pipeline_flags(sweep, o);
  add_sweep_flags(sweep, o);
  sweep->add_option("-o,--output", out_path, "CSV path")->required();
  sweep->callback([&] {
    action = [&] {
      const SweepReport report = sweep_fit(resolve(o, globals), out_path);
      report_errors(report);
      status = sweep_status(report);
    };
  });

  auto *fig2 = app.add_subcommand("reproduce-fig2", "analytic and fitted exponent spectra");
  bool no_fit = false;
  add_model_flags(fig2, o);
  add_sampling_flags(fig2, o);
  add_pipeline_flags(fig2, o);
  add_sweep_flags(fig2, o);
  fig2->add_flag("--no-fit", no_fit, "analytic part only");
  fig2->callback([&] {
    action = [&] {
      const SweepReport report = reproduce_fig2(resolve(o, globals), !no_fit);
      report_errors(report);
      status = sweep_status(report);
    };
  });

  auto *fig3 = app.add_subcommand("reproduce-fig3", "ETD curves and cumulant sweep");
  add_model_flags(fig3, o);
  add_sampling_flags(fig3, o);
  add_pipeline_flags(fig3, o);
  add_sweep_flags(fig3, o);
  fig3->callback([&] {
    action = [&] {
      const SweepReport report = reproduce_fig3(resolve(o, globals));
      report_errors(report);
      status = report.errors.empty() ? 0 : kExitNumerical;
    };
  });

  auto *run = app.add_subcommand("run", "full pipeline with a hashed manifest");
  add_model_flags(run, o);
  add_sampling_flags(run, o);
  add_pipeline_flags(run, o);
  run->add_option("--output-dir", o.output_dir, "directory for output files");
  run->callback([&] {
    action = [&] {
      const RunReport report = run_experiment(resolve(o, globals));
      if (!report.fit_converged) status = kExitUnconverged;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfig;
  }

  if (globals.threads > 0) {
    omp_set_num_threads(globals.threads);
  }
  try {
    action();
  } catch (const std::invalid_argument &ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const json::exception &ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &ex) {
    std::cerr << "numerical error: " << ex.what() << "\n";
    return kExitNumerical;
  }
  return status;
}
