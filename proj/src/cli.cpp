#include "psckit/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "psckit/error.hpp"
#include "psckit/estimator.hpp"
#include "psckit/io.hpp"
#include "psckit/metrics.hpp"
#include "psckit/phy_losses.hpp"
#include "psckit/simulator.hpp"

namespace psckit {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct EstimateArgs {
  std::string image;
  std::string radar;
  std::string params;
  std::string out;
  bool classical = false;
  bool proximal = false;
  HqsParams hqs;
};

struct TrainArgs {
  std::string manifest;
  std::string train_config;
  std::string out;
  std::string loss_csv;
  std::string init;
  std::optional<std::uint64_t> seed;
  bool proximal = false;
};

struct EvalArgs {
  std::string ref;
  std::string test;
  std::optional<double> range;
  bool minmax = false;
};

struct LossesArgs {
  std::string real_recon;
  std::string fake_recon;
  PhyLossWeights weights;
};

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError(what + " is not finite");
}

std::string shape(std::size_t h, std::size_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

std::string residual_csv(const std::vector<double>& trace) {
  std::ostringstream s;
  s.precision(17);
  s << "iteration,residual\n";
  for (std::size_t i = 0; i < trace.size(); ++i) s << (i + 1) << ',' << trace[i] << '\n';
  return s.str();
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimConfig config = sim_config_from_json(read_json_file(a.config), "sim");
  if (a.seed) config.seed = *a.seed;
  config.validate();
  err << "simulating " << config.num_targets << " samples on a "
      << shape(config.radar.grid_h, config.radar.grid_w) << " grid\n";
  const auto samples = gen_dataset(config);
  const fs::path manifest = write_dataset(samples, config, a.out);
  out << json{{"samples", samples.size()}, {"manifest", manifest.string()}}.dump() << '\n';
  return kExitOk;
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const RadarConfig radar = radar_config_from_json(read_json_file(a.radar), "radar");
  EstimatorParams params;
  if (a.classical) {
    HqsParams hqs = a.hqs;
    hqs.rule = a.proximal ? UpdateRule::Proximal : UpdateRule::AsPrinted;
    hqs.validate();
    params = from_hqs(hqs);
  } else {
    params = estimator_params_from_json(read_json_file(a.params), "params");
    if (a.proximal) params.rule = UpdateRule::Proximal;
  }
  params.validate();

  const AnyImage image = load_image(a.image);
  const auto [h, w] = std::visit([](const auto& im) { return std::pair{im.height(), im.width()}; }, image);
  if (h != radar.grid_h || w != radar.grid_w) {
    throw DimensionError("image is " + shape(h, w) + " but the radar grid is " +
                         shape(radar.grid_h, radar.grid_w));
  }
  const Dictionary dict = build_dictionary(radar);
  err << "estimating with " << params.stages.size() << " stages ("
      << to_string(params.rule) << " rule)\n";
  const Estimate est = std::visit([&](const auto& im) { return estimate_psc(dict, im, params); }, image);
  require_finite(est.relative_residual, "relative residual");

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  write_json_file(to_json(est.centers), dir / "pscs.json");
  save_image(est.reconstruction, dir / "reconstruction.psci");
  write_text_file(residual_csv(est.residual_trace), dir / "residual.csv");

  out << json{{"num_centers", est.centers.centers.size()},
              {"relative_residual", est.relative_residual},
              {"update_rule", to_string(params.rule)},
              {"stages", params.stages.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig tc = train_config_from_json(read_json_file(a.train_config), "train");
  if (a.seed) tc.seed = *a.seed;
  tc.validate();
  EstimatorParams init;
  if (!a.init.empty()) init = estimator_params_from_json(read_json_file(a.init), "init");
  if (a.proximal) init.rule = UpdateRule::Proximal;
  init.validate();

  const LoadedDataset data = load_dataset(a.manifest);
  if (data.samples.empty()) throw ConfigError("manifest lists no samples");
  const Dictionary dict = build_dictionary(data.radar);
  std::vector<std::vector<double>> dataset;
  dataset.reserve(data.samples.size());
  for (const auto& s : data.samples) {
    if (s.image.height() != data.radar.grid_h || s.image.width() != data.radar.grid_w) {
      throw DimensionError("sample is " + shape(s.image.height(), s.image.width()) +
                           " but the radar grid is " + shape(data.radar.grid_h, data.radar.grid_w));
    }
    dataset.push_back(vectorize(s.image));
  }

  err << "training on " << dataset.size() << " samples for " << tc.steps << " steps\n";
  const double initial = mean_loss(dict, dataset, init);
  const TrainResult result = train_estimator(dict, dataset, tc, init);
  const double final_loss = mean_loss(dict, dataset, result.params);
  require_finite(initial, "initial loss");
  require_finite(final_loss, "final loss");

  const fs::path out_path(a.out);
  fs::path csv_path(a.loss_csv);
  if (a.loss_csv.empty()) {
    csv_path = out_path;
    csv_path.replace_filename(out_path.stem().string() + "_loss.csv");
  }
  write_json_file(to_json(result.params), out_path);
  write_text_file(loss_history_csv(result.loss_history), csv_path);

  out << json{{"initial_mean_loss", initial},
              {"final_mean_loss", final_loss},
              {"steps", tc.steps},
              {"params", out_path.string()},
              {"loss_csv", csv_path.string()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  RealImage ref = load_real_image(a.ref);
  RealImage test = load_real_image(a.test);
  if (!ref.same_shape(test)) {
    throw DimensionError("reference is " + shape(ref.height(), ref.width()) + " but test is " +
                         shape(test.height(), test.width()));
  }
  const double range = a.range ? *a.range : default_dynamic_range(ref, test);
  if (a.minmax) {
    ref = minmax_scale(ref, range);
    test = minmax_scale(test, range);
  }
  const MetricReport report = evaluate(ref, test, range);
  require_finite(report.ssim, "ssim");
  require_finite(report.gmsd, "gmsd");
  json j = to_json(report);
  j["dynamic_range"] = range;
  out << j.dump() << '\n';
  return kExitOk;
}

int cmd_losses(const LossesArgs& a, std::ostream& out, std::ostream&) {
  a.weights.validate();
  const RealImage s = load_real_image(a.real_recon);
  const RealImage st = load_real_image(a.fake_recon);
  if (!s.same_shape(st)) {
    throw DimensionError("real reconstruction is " + shape(s.height(), s.width()) +
                         " but fake reconstruction is " + shape(st.height(), st.width()));
  }
  const double phy_s = loss_phy_s(s, st);
  require_finite(phy_s, "phy_s");
  out << json{{"phy_s", phy_s},
              {"phy_g_image_term", a.weights.beta * phy_s},
              {"alpha", a.weights.alpha},
              {"beta", a.weights.beta},
              {"gamma", a.weights.gamma}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAR point-scattering-center toolkit"};
  app.name("psc_kit");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--config", sim.config, "Simulator config JSON")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Override the config seed");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate scattering centers from an image");
  estimate->add_option("--image", est.image, "Input image (.psci)")->required();
  estimate->add_option("--radar", est.radar, "Radar config JSON")->required();
  auto* params_opt = estimate->add_option("--params", est.params, "Trained estimator params JSON");
  auto* classical_opt = estimate->add_flag("--classical", est.classical, "Run classical HQS");
  estimate->add_option("--t", est.hqs.t, "HQS step size")->capture_default_str();
  estimate->add_option("--rho", est.hqs.rho, "Soft threshold")->capture_default_str();
  estimate->add_option("--mu", est.hqs.mu, "Data-fit weight")->capture_default_str();
  estimate->add_option("--iters", est.hqs.iterations, "Iteration count")->capture_default_str();
  estimate->add_flag("--proximal", est.proximal, "Use the proximal p-update");
  estimate->add_option("--out", est.out, "Output directory")->required();
  params_opt->excludes(classical_opt);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the unrolled estimator");
  train->add_option("--manifest", tr.manifest, "Dataset manifest JSON")->required();
  train->add_option("--train-config", tr.train_config, "Training config JSON")->required();
  train->add_option("--out", tr.out, "Output params JSON")->required();
  train->add_option("--loss-csv", tr.loss_csv, "Loss history CSV (default: <out>_loss.csv)");
  train->add_option("--init", tr.init, "Initial params JSON");
  train->add_option("--seed", tr.seed, "Override the training seed");
  train->add_flag("--proximal", tr.proximal, "Use the proximal p-update");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Compare two images with IQA metrics");
  eval->add_option("--ref", ev.ref, "Reference image")->required();
  eval->add_option("--test", ev.test, "Test image")->required();
  eval->add_option("--range", ev.range, "Dynamic range (default: max of both images)");
  eval->add_flag("--minmax", ev.minmax, "Min-max scale both images onto [0, range] first");

  LossesArgs lo;
  auto* losses = app.add_subcommand("losses", "Image-level physics losses");
  losses->add_option("--real-recon", lo.real_recon, "EM reconstruction of a real image")->required();
  losses->add_option("--fake-recon", lo.fake_recon, "EM reconstruction of a generated image")
      ->required();
  losses->add_option("--alpha", lo.weights.alpha, "Discriminator mix")->capture_default_str();
  losses->add_option("--beta", lo.weights.beta, "Image-level weight")->capture_default_str();
  losses->add_option("--gamma", lo.weights.gamma, "Feature-level weight")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (estimate->parsed() && !est.classical && est.params.empty()) {
    err << "estimate: one of --params or --classical is required\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (estimate->parsed()) return cmd_estimate(est, out, err);
    if (train->parsed()) return cmd_train(tr, out, err);
    if (eval->parsed()) return cmd_eval(ev, out, err);
    if (losses->parsed()) return cmd_losses(lo, out, err);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("psc_kit");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace psckit
