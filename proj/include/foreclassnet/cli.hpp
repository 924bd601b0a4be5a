#ifndef FORECLASSNET_CLI_HPP
#define FORECLASSNET_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foreclassnet/attack.hpp"
#include "foreclassnet/augment.hpp"
#include "foreclassnet/checkpoint.hpp"
#include "foreclassnet/config.hpp"
#include "foreclassnet/dataset.hpp"
#include "foreclassnet/ingest.hpp"
#include "foreclassnet/metrics.hpp"
#include "foreclassnet/network.hpp"
#include "foreclassnet/simulate.hpp"
#include "foreclassnet/train.hpp"

namespace fcn::cli {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;  // key=value
  std::string out_dir = "out";
};

inline void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value)");
  cmd->add_option("--preset", args.preset,
                  "configuration preset: sim-default | ecg | stock");
  cmd->add_option("--set", args.overrides, "override a key, e.g. --set train.epochs=5");
  cmd->add_option("--out", args.out_dir, "output directory");
}

inline RunConfig build_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.preset.empty()) cfg.apply_preset(args.preset);
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw config_error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

/// Output directory, honoring the FCN_OUT_DIR environment override.
inline fs::path resolve_out_dir(const CommonArgs& args) {
  const char* env = std::getenv("FCN_OUT_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path(args.out_dir);
  fs::create_directories(dir);
  return dir;
}

inline void echo_config(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "config.txt");
  if (!out) throw io_error("cannot write " + (dir / "config.txt").string());
  out << cfg.to_text();
}

/// Loads a dataset per data.format. `earnings_path` is only meaningful for
/// the stock format.
inline Dataset load_data(const RunConfig& cfg, const std::string& data_path,
                         const std::string& earnings_path) {
  const std::string format = cfg.get("data.format");
  if (format == "generic") return read_dataset_csv(data_path);
  if (format == "ecg") return read_ecg_csv(data_path);
  if (format == "stock") {
    if (earnings_path.empty())
      throw config_error("stock format requires --earnings <csv>");
    StockIngestReport report;
    Dataset ds = read_stock_csv(data_path, earnings_path,
                                cfg.get_bool("data.normalize_windows"), &report);
    if (report.skipped_insufficient_history > 0)
      std::cerr << "stock ingest: skipped " << report.skipped_insufficient_history
                << " window(s) with insufficient history\n";
    return ds;
  }
  throw config_error("data.format: expected generic | ecg | stock, got '" + format + "'");
}

/// Split (if the file carries no test tags yet), then SMOTE, then label
/// corruption, each driven by the config.
inline void prepare_dataset(Dataset& ds, const RunConfig& cfg) {
  const std::uint64_t seed = cfg.get_u64("run.seed");
  if (ds.count(SplitTag::test) == 0) {
    split_dataset(ds,
                  split_fractions(cfg.get_double("data.test_fraction"),
                                  cfg.get_double("data.val_fraction")),
                  seed);
  }
  if (cfg.get_bool("data.smote"))
    smote(ds, static_cast<std::size_t>(cfg.get_u64("data.smote_neighbors")), seed);
  const double corrupt_rate = cfg.get_double("data.corrupt_rate");
  if (corrupt_rate > 0.0) corrupt_labels(ds, corrupt_rate, seed);
}

inline std::size_t resolve_num_classes(const RunConfig& cfg, const Dataset& ds) {
  const std::size_t configured =
      static_cast<std::size_t>(cfg.get_u64("network.num_classes"));
  if (configured == 0) return ds.num_classes;
  if (configured < ds.num_classes)
    throw config_error("network.num_classes = " + std::to_string(configured) +
                       " but the data contains " + std::to_string(ds.num_classes) +
                       " classes");
  return configured;
}

inline std::unique_ptr<ForeClassNet> build_model(const RunConfig& cfg,
                                                 const Dataset& ds) {
  return std::make_unique<ForeClassNet>(
      cfg.network_config(ds.m, ds.k, resolve_num_classes(cfg, ds)));
}

/// Rebuilds a model from a checkpoint: architecture from the stored config
/// (optionally overridden), parameters applied by name with shape checks.
struct LoadedModel {
  RunConfig cfg;
  std::unique_ptr<ForeClassNet> model;
  std::string rng_state;
};

inline LoadedModel load_model(const std::string& checkpoint_path,
                              const std::vector<std::string>& overrides) {
  CheckpointContents ck = load_checkpoint(checkpoint_path);
  RunConfig cfg = RunConfig::from_text(ck.config_text);
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw config_error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  // m, k, and L were frozen into the architecture at training time.
  const std::size_t m = static_cast<std::size_t>(cfg.get_u64("data.m"));
  const std::size_t k = static_cast<std::size_t>(cfg.get_u64("data.k"));
  const std::size_t L = static_cast<std::size_t>(cfg.get_u64("network.num_classes"));
  LoadedModel out{std::move(cfg), nullptr, ck.rng_state};
  out.model = std::make_unique<ForeClassNet>(out.cfg.network_config(m, k, L));
  auto params = out.model->all_parameters();
  apply_checkpoint(ck, params);
  return out;
}

/// Saves model + effective config + RNG state. data.m/k and
/// network.num_classes are pinned so the checkpoint alone rebuilds the model.
inline void save_model(const std::string& path, ForeClassNet& model, RunConfig cfg,
                       const std::string& rng_state) {
  cfg.set("data.m", std::to_string(model.config().m));
  cfg.set("data.k", std::to_string(model.config().k));
  cfg.set("network.num_classes", std::to_string(model.config().num_classes));
  auto params = model.all_parameters();
  save_checkpoint(path, cfg.to_text(), rng_state, params);
}

struct EvalResult {
  MetricsReport metrics;
  std::vector<std::size_t> indices;
  std::vector<McPrediction> preds;
};

/// Evaluates the test split (or, for files without one, every sample).
inline EvalResult evaluate_dataset(ForeClassNet& model, const Dataset& ds,
                                   std::size_t passes, std::uint64_t seed,
                                   std::size_t threads) {
  EvalResult out;
  out.indices = ds.indices_of(SplitTag::test);
  if (out.indices.empty()) {
    out.indices.resize(ds.samples.size());
    for (std::size_t i = 0; i < out.indices.size(); ++i) out.indices[i] = i;
  }
  const std::uint64_t eval_seed = derive_seed(seed, "eval");
  out.preds = predict_many(model, ds, out.indices, passes, eval_seed, threads);
  std::vector<int> truth, pred;
  truth.reserve(out.indices.size());
  pred.reserve(out.indices.size());
  for (std::size_t i = 0; i < out.indices.size(); ++i) {
    truth.push_back(ds.samples[out.indices[i]].label);
    pred.push_back(out.preds[i].label);
  }
  out.metrics = compute_metrics(truth, pred, model.config().num_classes);
  return out;
}

inline void write_predictions_csv(const fs::path& path, const Dataset& ds,
                                  const EvalResult& ev) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "id,label";
  for (std::size_t j = 1; j <= ds.k; ++j) out << ",forecast_mean_" << j;
  for (std::size_t j = 1; j <= ds.k; ++j) out << ",forecast_var_" << j;
  out << "\n";
  for (std::size_t i = 0; i < ev.indices.size(); ++i) {
    const TimeSeriesSample& s = ds.samples[ev.indices[i]];
    const McPrediction& p = ev.preds[i];
    out << s.id << ',' << p.label;
    for (double v : p.forecast_mean) out << ',' << detail::format_double(v);
    for (double v : p.forecast_var) out << ',' << detail::format_double(v);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_simulate(const CommonArgs& common) {
  RunConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = build_scenario(cfg.get("data.scenario"),
                              static_cast<std::size_t>(cfg.get_u64("data.count")),
                              static_cast<std::size_t>(cfg.get_u64("data.m")),
                              static_cast<std::size_t>(cfg.get_u64("data.k")),
                              cfg.get_u64("run.seed"),
                              static_cast<std::size_t>(cfg.get_u64("data.burn_in")));
  prepare_dataset(ds, cfg);
  write_dataset_csv((dir / "dataset.csv").string(), ds);
  echo_config(cfg, dir);
  std::cout << "simulate: wrote " << ds.samples.size() << " series (train "
            << ds.count(SplitTag::train) << " / val " << ds.count(SplitTag::val)
            << " / test " << ds.count(SplitTag::test) << ") to "
            << (dir / "dataset.csv").string() << "\n";
  return 0;
}

inline int cmd_train(const CommonArgs& common, const std::string& data_path,
                     const std::string& earnings_path) {
  RunConfig cfg = build_config(common);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = load_data(cfg, data_path, earnings_path);
  prepare_dataset(ds, cfg);
  cfg.set("network.num_classes", std::to_string(resolve_num_classes(cfg, ds)));
  cfg.set("data.m", std::to_string(ds.m));
  cfg.set("data.k", std::to_string(ds.k));
  echo_config(cfg, dir);

  auto model = build_model(cfg, ds);
  const std::uint64_t seed = cfg.get_u64("run.seed");
  Rng master(seed);
  Rng init_rng = derive_rng(seed, "init");
  model->init(init_rng);

  TrainResult result = train(*model, ds, cfg.train_config(), cfg.loss_config());
  write_metric_log_csv((dir / "metrics.csv").string(), result.log);
  save_model((dir / "checkpoint.fcn").string(), *model, cfg, master.save_state());
  std::cout << "train: " << result.log.size() << " epochs";
  if (!result.log.empty()) {
    const EpochStats& last = result.log.back();
    std::cout << ", final train_acc " << last.train_acc << ", val_acc " << last.val_acc;
  }
  if (result.stopped_early)
    std::cout << " (early stop, best epoch " << result.best_epoch << ")";
  std::cout << "\ncheckpoint: " << (dir / "checkpoint.fcn").string() << "\n";
  return 0;
}

inline int cmd_evaluate(const CommonArgs& common, const std::string& checkpoint_path,
                        const std::string& data_path, const std::string& earnings_path) {
  LoadedModel lm = load_model(checkpoint_path, common.overrides);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = load_data(lm.cfg, data_path, earnings_path);
  echo_config(lm.cfg, dir);
  EvalResult ev = evaluate_dataset(*lm.model, ds, lm.model->config().mc_passes,
                                   lm.cfg.get_u64("run.seed"),
                                   static_cast<std::size_t>(lm.cfg.get_u64("run.threads")));
  write_metrics_csv((dir / "metrics.csv").string(), ev.metrics);
  write_confusion_csv((dir / "confusion.csv").string(), ev.metrics.confusion);
  std::ofstream summary(dir / "summary.txt");
  summary << metrics_summary(ev.metrics);
  std::cout << metrics_summary(ev.metrics);
  return 0;
}

inline int cmd_attack(const CommonArgs& common, const std::string& checkpoint_path,
                      const std::string& data_path, int phase,
                      const std::string& phase1_dir) {
  LoadedModel lm = load_model(checkpoint_path, common.overrides);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = load_data(lm.cfg, data_path, "");
  echo_config(lm.cfg, dir);
  const std::uint64_t seed = lm.cfg.get_u64("run.seed");
  const std::size_t threads =
      static_cast<std::size_t>(lm.cfg.get_u64("run.threads"));
  AttackConfig acfg = lm.cfg.attack_config();

  if (phase == 1) {
    AdversarialPhase1 p1 =
        adversarial_phase1(*lm.model, ds, acfg, derive_seed(seed, "fgsm-phase1"));
    write_dataset_csv((dir / "adversarial_train.csv").string(), p1.adv_train);
    write_dataset_csv((dir / "adversarial_test.csv").string(), p1.adv_test);
    EvalResult ev = evaluate_dataset(*lm.model, p1.adv_test,
                                     lm.model->config().mc_passes, seed, threads);
    write_metrics_csv((dir / "metrics_a.csv").string(), ev.metrics);
    std::cout << "attack phase 1 (" << to_string(acfg.loss_kind)
              << "): accuracy on adversarial test set (a) = " << ev.metrics.accuracy
              << "\n";
    return 0;
  }

  if (phase != 2) throw contract_error("attack: --phase must be 1 or 2");
  if (phase1_dir.empty())
    throw contract_error(
        "attack phase 2 requested without --phase1-dir (run phase 1 first)");
  const fs::path p1dir(phase1_dir);
  if (!fs::exists(p1dir / "adversarial_train.csv") ||
      !fs::exists(p1dir / "adversarial_test.csv"))
    throw contract_error("attack phase 2: phase-1 artifacts not found in " +
                         p1dir.string() + " (run phase 1 first)");
  Dataset adv_train = read_dataset_csv((p1dir / "adversarial_train.csv").string());
  Dataset adv_test_a = read_dataset_csv((p1dir / "adversarial_test.csv").string());
  Dataset combined = combine_for_adversarial_training(ds, adv_train);

  // Reinitialize and train on original + adversarial training data.
  auto model2 = std::make_unique<ForeClassNet>(lm.model->config());
  Rng init_rng = derive_rng(seed, "reinit");
  model2->init(init_rng);
  TrainResult tres =
      train(*model2, combined, lm.cfg.train_config(), lm.cfg.loss_config());
  write_metric_log_csv((dir / "metrics.csv").string(), tres.log);
  Rng master(seed);
  save_model((dir / "checkpoint.fcn").string(), *model2, lm.cfg, master.save_state());

  EvalResult ev_b = evaluate_dataset(*model2, ds, model2->config().mc_passes,
                                     seed, threads);
  write_metrics_csv((dir / "metrics_b.csv").string(), ev_b.metrics);
  EvalResult ev_a = evaluate_dataset(*model2, adv_test_a, model2->config().mc_passes,
                                     seed, threads);
  write_metrics_csv((dir / "metrics_a.csv").string(), ev_a.metrics);
  acfg.target_split = SplitTag::test;
  Dataset adv_test_c =
      attack_split(*model2, ds, acfg, derive_seed(seed, "fgsm-phase2"));
  write_dataset_csv((dir / "adversarial_test_c.csv").string(), adv_test_c);
  EvalResult ev_c = evaluate_dataset(*model2, adv_test_c, model2->config().mc_passes,
                                     seed, threads);
  write_metrics_csv((dir / "metrics_c.csv").string(), ev_c.metrics);
  std::cout << "attack phase 2 (" << to_string(acfg.loss_kind) << "): accuracy b/a/c = "
            << ev_b.metrics.accuracy << " / " << ev_a.metrics.accuracy << " / "
            << ev_c.metrics.accuracy << "\n";
  return 0;
}

inline int cmd_saliency(const CommonArgs& common, const std::string& checkpoint_path,
                        const std::string& data_path,
                        const std::vector<std::int64_t>& ids, std::size_t count) {
  LoadedModel lm = load_model(checkpoint_path, common.overrides);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = load_data(lm.cfg, data_path, "");
  echo_config(lm.cfg, dir);
  const std::uint64_t seed = lm.cfg.get_u64("run.seed");

  std::vector<std::size_t> indices;
  if (!ids.empty()) {
    for (std::int64_t want : ids) {
      bool found = false;
      for (std::size_t i = 0; i < ds.samples.size(); ++i)
        if (ds.samples[i].id == want) {
          indices.push_back(i);
          found = true;
          break;
        }
      if (!found)
        throw contract_error("saliency: sample id " + std::to_string(want) +
                             " not present in the data");
    }
  } else {
    std::vector<std::size_t> test = ds.indices_of(SplitTag::test);
    if (test.empty())
      for (std::size_t i = 0; i < ds.samples.size(); ++i) test.push_back(i);
    for (std::size_t i = 0; i < std::min(count, test.size()); ++i)
      indices.push_back(test[i]);
  }
  for (std::size_t ix : indices) {
    const TimeSeriesSample& s = ds.samples[ix];
    std::vector<double> sal = saliency(*lm.model, s, seed);
    write_saliency_csv((dir / ("saliency_" + std::to_string(s.id) + ".csv")).string(),
                       s, sal);
  }
  std::cout << "saliency: wrote " << indices.size() << " file(s) to " << dir.string()
            << "\n";
  return 0;
}

inline int cmd_predict(const CommonArgs& common, const std::string& checkpoint_path,
                       const std::string& data_path, const std::string& earnings_path) {
  LoadedModel lm = load_model(checkpoint_path, common.overrides);
  const fs::path dir = resolve_out_dir(common);
  Dataset ds = load_data(lm.cfg, data_path, earnings_path);
  echo_config(lm.cfg, dir);
  EvalResult ev = evaluate_dataset(*lm.model, ds, lm.model->config().mc_passes,
                                   lm.cfg.get_u64("run.seed"),
                                   static_cast<std::size_t>(lm.cfg.get_u64("run.threads")));
  write_predictions_csv(dir / "predictions.csv", ds, ev);
  std::cout << "predict: wrote " << ev.indices.size() << " prediction(s) to "
            << (dir / "predictions.csv").string() << "\n";
  return 0;
}

/// Entry point shared by the binary and the tests. Returns a process exit
/// status; failures name the stage that failed.
inline int run(std::vector<std::string> args) {
  CLI::App app{"ForeClassNet: joint time-series forecasting and classification"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string data_path, earnings_path, checkpoint_path, phase1_dir;
  std::vector<std::int64_t> ids;
  std::size_t count = 5;
  int phase = 1;

  CLI::App* c_sim = app.add_subcommand("simulate", "generate a simulated dataset CSV");
  add_common(c_sim, common);
  c_sim->add_option("--scenario", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("data.scenario=" + v.front());
    return true;
  }, "scenario name (shortcut for --set data.scenario=...)");
  c_sim->add_option("--count", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("data.count=" + v.front());
    return true;
  }, "series count (shortcut)");
  c_sim->add_option("--seed", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("run.seed=" + v.front());
    return true;
  }, "master seed (shortcut)");

  CLI::App* c_train = app.add_subcommand("train", "train a model; writes checkpoint + metric log");
  add_common(c_train, common);
  c_train->add_option("--data", data_path, "input data CSV")->required();
  c_train->add_option("--earnings", earnings_path, "earnings CSV (stock format)");
  c_train->add_option("--seed", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("run.seed=" + v.front());
    return true;
  }, "master seed (shortcut)");

  CLI::App* c_eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
  add_common(c_eval, common);
  c_eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  c_eval->add_option("--data", data_path, "input data CSV")->required();
  c_eval->add_option("--earnings", earnings_path, "earnings CSV (stock format)");

  CLI::App* c_attack = app.add_subcommand("attack", "FGSM attack / adversarial training");
  add_common(c_attack, common);
  c_attack->add_option("--checkpoint", checkpoint_path, "trained model")->required();
  c_attack->add_option("--data", data_path, "original dataset CSV")->required();
  c_attack->add_option("--phase", phase, "1: attack; 2: adversarial retraining");
  c_attack->add_option("--phase1-dir", phase1_dir, "phase-1 output directory");
  c_attack->add_option("--loss", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("attack.loss_kind=" + v.front());
    return true;
  }, "attacked loss: cce | mse (shortcut)");
  c_attack->add_option("--epsilon", [&common](const std::vector<std::string>& v) {
    common.overrides.push_back("attack.epsilon=" + v.front());
    return true;
  }, "FGSM step size (shortcut)");

  CLI::App* c_sal = app.add_subcommand("saliency", "per-sample input-gradient saliency CSVs");
  add_common(c_sal, common);
  c_sal->add_option("--checkpoint", checkpoint_path, "trained model")->required();
  c_sal->add_option("--data", data_path, "input data CSV")->required();
  c_sal->add_option("--ids", ids, "sample ids (default: first --count test samples)");
  c_sal->add_option("--count", count, "number of test samples when --ids is absent");

  CLI::App* c_pred = app.add_subcommand("predict", "per-sample label + forecast mean/variance");
  add_common(c_pred, common);
  c_pred->add_option("--checkpoint", checkpoint_path, "trained model")->required();
  c_pred->add_option("--data", data_path, "input data CSV")->required();
  c_pred->add_option("--earnings", earnings_path, "earnings CSV (stock format)");

  std::vector<const char*> argv;
  argv.push_back("foreclassnet");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (c_sim->parsed()) return cmd_simulate(common);
    if (c_train->parsed()) return cmd_train(common, data_path, earnings_path);
    if (c_eval->parsed()) return cmd_evaluate(common, checkpoint_path, data_path, earnings_path);
    if (c_attack->parsed()) return cmd_attack(common, checkpoint_path, data_path, phase, phase1_dir);
    if (c_sal->parsed()) return cmd_saliency(common, checkpoint_path, data_path, ids, count);
    if (c_pred->parsed()) return cmd_predict(common, checkpoint_path, data_path, earnings_path);
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fcn::cli

#endif  // FORECLASSNET_CLI_HPP
