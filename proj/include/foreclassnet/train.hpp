#ifndef FORECLASSNET_TRAIN_HPP
#define FORECLASSNET_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "foreclassnet/adam.hpp"
#include "foreclassnet/dataset.hpp"
#include "foreclassnet/network.hpp"
#include "foreclassnet/rng.hpp"

namespace fcn {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::size_t patience = 0;  // 0 disables early stopping
  bool welford_reset_each_epoch = true;
  bool shuffle = true;
  double learning_rate = 1e-3;
  std::size_t val_mc_passes = 10;  // bounded per-epoch validation cost
  std::size_t threads = 2;         // fixed count keeps runs bit-reproducible

  void validate() const {
    if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
    if (threads < 1) throw config_error("train: threads must be >= 1");
    if (val_mc_passes < 1) throw config_error("train: val_mc_passes must be >= 1");
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> log;
  std::size_t best_epoch = 0;   // 1-based; 0 when no validation ran
  double best_val_acc = 0.0;
  bool stopped_early = false;
};

/// Shuffled train-split ids for one epoch. Exposed so the no-leakage property
/// can be checked against exactly what the loop consumes.
inline std::vector<std::size_t> epoch_order(const Dataset& ds, const TrainConfig& cfg,
                                            std::size_t epoch) {
  std::vector<std::size_t> order = ds.indices_of(SplitTag::train);
  if (cfg.shuffle) {
    Rng rng = derive_rng(cfg.seed, "shuffle", {epoch});
    rng.shuffle(order);
  }
  return order;
}

inline void write_metric_log_csv(const std::string& path,
                                 const std::vector<EpochStats>& log) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const EpochStats& e : log)
    out << e.epoch << ',' << detail::format_double(e.train_loss) << ','
        << detail::format_double(e.train_acc) << ','
        << detail::format_double(e.val_loss) << ','
        << detail::format_double(e.val_acc) << "\n";
}

namespace detail {

/// Deterministic parallel map: index i goes to worker i % threads, each
/// worker walks its indices in ascending order. Results land in caller-owned
/// slots, so the outcome is independent of scheduling.
inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n == 0 ? 1 : n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([=, &fn]() {
      for (std::size_t i = w; i < n; i += threads) fn(i, w);
    });
  }
  for (std::thread& th : pool) th.join();
}

struct ParamIndex {
  std::vector<Parameter*> params;
  std::unordered_map<const Parameter*, std::size_t> offset;
  std::size_t total = 0;

  explicit ParamIndex(std::vector<Parameter*> ps) : params(std::move(ps)) {
    for (Parameter* p : params) {
      offset.emplace(p, total);
      total += p->size();
    }
  }

  std::pair<std::size_t, bool> find(const Parameter* p) const {
    auto it = offset.find(p);
    if (it == offset.end()) return {0, false};
    return {it->second, true};
  }
};

}  // namespace detail

/// Evaluates a set of samples with MC-dropout prediction, in parallel across
/// samples (entries are pre-created so Welford writes touch disjoint keys).
inline std::vector<McPrediction> predict_many(ForeClassNet& model, const Dataset& ds,
                                              const std::vector<std::size_t>& indices,
                                              std::size_t passes,
                                              std::uint64_t noise_seed,
                                              std::size_t threads) {
  std::vector<McPrediction> out(indices.size());
  for (std::size_t i : indices) model.welford().touch(ds.samples[i].id);
  detail::parallel_for(indices.size(), threads, [&](std::size_t i, std::size_t) {
    out[i] = predict_mc(model, ds.samples[indices[i]], passes, noise_seed);
  });
  return out;
}

/// Epoch loop: shuffle, batch, per-sample stochastic forward + backward with
/// the batch-mean of the joint loss, one regularizer term per batch, then an
/// Adam step. Validation accuracy is monitored each epoch; with patience set,
/// the best parameters are restored on stop (and at normal completion).
inline TrainResult train(ForeClassNet& model, const Dataset& ds,
                         const TrainConfig& tcfg, const LossConfig& lcfg,
                         Adam* external_adam = nullptr) {
  tcfg.validate();
  lcfg.validate();
  ds.validate();
  if (ds.m != model.config().m || ds.k != model.config().k)
    throw dimension_error("train: dataset (m=" + std::to_string(ds.m) + ", k=" +
                          std::to_string(ds.k) + ") does not match model (m=" +
                          std::to_string(model.config().m) + ", k=" +
                          std::to_string(model.config().k) + ")");

  const std::vector<std::size_t> train_ix = ds.indices_of(SplitTag::train);
  const std::vector<std::size_t> val_ix = ds.indices_of(SplitTag::val);
  if (train_ix.empty()) throw contract_error("train: empty train split");
  if (tcfg.patience > 0 && val_ix.empty())
    throw contract_error("train: early stopping requires a validation split");

  detail::ParamIndex pidx(model.parameters());
  Adam local_adam(pidx.params, AdamConfig{tcfg.learning_rate, 0.9, 0.999, 1e-8});
  Adam& adam = external_adam ? *external_adam : local_adam;

  const std::size_t W = tcfg.threads;
  std::vector<std::vector<double>> worker_grads(W, std::vector<double>(pidx.total, 0.0));
  std::vector<Tape> worker_tapes(W);

  TrainResult result;
  std::vector<std::vector<double>> best_params;
  bool have_best = false;
  std::size_t epochs_since_best = 0;

  auto snapshot = [&]() {
    best_params.clear();
    for (Parameter* p : pidx.params) best_params.push_back(p->value);
  };
  auto restore = [&]() {
    for (std::size_t i = 0; i < pidx.params.size(); ++i)
      pidx.params[i]->value = best_params[i];
  };

  for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.welford_reset_each_epoch) model.welford().clear();
    const std::vector<std::size_t> order = epoch_order(ds, tcfg, epoch);

    double loss_sum = 0.0, reg_sum = 0.0;
    std::size_t correct = 0, batches = 0;

    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t bsz = std::min(tcfg.batch_size, order.size() - start);
      adam.zero_grad();
      for (auto& g : worker_grads) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = 0; i < bsz; ++i)
        model.welford().touch(ds.samples[order[start + i]].id);

      std::vector<double> sample_loss(bsz, 0.0);
      std::vector<char> sample_correct(bsz, 0);
      detail::parallel_for(bsz, W, [&](std::size_t i, std::size_t w) {
        const TimeSeriesSample& s = ds.samples[order[start + i]];
        Tape& tape = worker_tapes[w];
        tape.clear();
        Rng noise = derive_rng(tcfg.seed, "noise",
                               {epoch, static_cast<std::uint64_t>(s.id)});
        ForwardResult r = model.forward(tape, s, noise);
        Tensor loss = joint_loss(tape, r.class_probs, s.label, r.forecast,
                                 s.future, lcfg);
        sample_loss[i] = loss.value();
        sample_correct[i] = argmax_lowest(r.class_probs.values()) == s.label;
        Tensor scaled = scalar_mul(loss, 1.0 / static_cast<double>(bsz));
        tape.backward(scaled);
        tape.accumulate_param_grads(worker_grads[w],
                                    [&](const Parameter* p) { return pidx.find(p); });
      });
      // Fixed reduction order keeps the result bit-identical between runs.
      for (std::size_t w = 0; w < W; ++w) {
        std::size_t off = 0;
        for (Parameter* p : pidx.params) {
          const double* src = worker_grads[w].data() + off;
          for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += src[i];
          off += p->size();
        }
      }
      Tape reg_tape;
      Tensor reg = model.regularizer(reg_tape);
      reg_tape.backward(reg);
      reg_tape.accumulate_param_grads();
      adam.step();

      for (std::size_t i = 0; i < bsz; ++i) {
        loss_sum += sample_loss[i];
        correct += sample_correct[i] ? 1 : 0;
      }
      reg_sum += reg.value();
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size()) +
                       (batches ? reg_sum / static_cast<double>(batches) : 0.0);
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());

    if (!val_ix.empty()) {
      const std::uint64_t val_seed = derive_seed(tcfg.seed, "val", {epoch});
      std::vector<McPrediction> preds =
          predict_many(model, ds, val_ix, tcfg.val_mc_passes, val_seed, W);
      double vloss = 0.0;
      std::size_t vcorrect = 0;
      for (std::size_t i = 0; i < val_ix.size(); ++i) {
        const TimeSeriesSample& s = ds.samples[val_ix[i]];
        const McPrediction& p = preds[i];
        double mse = 0.0;
        for (std::size_t j = 0; j < ds.k; ++j) {
          const double d = p.forecast_mean[j] - s.future[j];
          mse += d * d;
        }
        mse /= static_cast<double>(ds.k);
        const double ptrue =
            std::max(p.class_probs[static_cast<std::size_t>(s.label)], 1e-12);
        vloss += lcfg.beta * mse - lcfg.alpha * std::log(ptrue);
        vcorrect += (p.label == s.label) ? 1 : 0;
      }
      stats.val_loss = vloss / static_cast<double>(val_ix.size());
      stats.val_acc = static_cast<double>(vcorrect) / static_cast<double>(val_ix.size());

      if (!have_best || stats.val_acc > result.best_val_acc) {
        result.best_val_acc = stats.val_acc;
        result.best_epoch = epoch;
        epochs_since_best = 0;
        have_best = true;
        if (tcfg.patience > 0) snapshot();
      } else {
        ++epochs_since_best;
      }
    }

    result.log.push_back(stats);

    if (tcfg.patience > 0 && epochs_since_best >= tcfg.patience) {
      result.stopped_early = true;
      break;
    }
  }

  if (tcfg.patience > 0 && have_best) restore();
  return result;
}

}  // namespace fcn

#endif  // FORECLASSNET_TRAIN_HPP
