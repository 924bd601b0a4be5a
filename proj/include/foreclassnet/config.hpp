#ifndef FORECLASSNET_CONFIG_HPP
#define FORECLASSNET_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "foreclassnet/attack.hpp"
#include "foreclassnet/errors.hpp"
#include "foreclassnet/network.hpp"
#include "foreclassnet/train.hpp"

namespace fcn {

/// Flat `key = value` configuration with [section] headers. Every key has a
/// documented default; unknown keys are rejected. The effective configuration
/// is echoed next to every artifact a command produces.
class RunConfig {
 public:
  struct Entry {
    const char* key;
    const char* def;
    const char* doc;
  };

  static const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"run.seed", "7", "master seed; every random stream derives from it"},
        {"run.threads", "2", "worker threads (fixed count keeps runs reproducible)"},
        {"data.scenario", "ar_vs_ma",
         "simulation scenario: ar_vs_ma | ar_vs_ar | three_class_mixture"},
        {"data.count", "10000", "number of simulated series"},
        {"data.m", "40", "observed window length for simulated data"},
        {"data.k", "10", "forecast horizon for simulated data"},
        {"data.burn_in", "100", "ARMA warm-up samples discarded per series"},
        {"data.test_fraction", "0.2", "held-out test share of the dataset"},
        {"data.val_fraction", "0.1", "share of the training pool reserved for validation"},
        {"data.corrupt_rate", "0", "fraction of train labels to switch randomly"},
        {"data.smote", "off", "balance classes with SMOTE before training"},
        {"data.smote_neighbors", "5", "SMOTE nearest-neighbor count"},
        {"data.normalize_windows", "off",
         "divide each stock window by its first price (stock format only)"},
        {"data.format", "generic", "input format for --data: generic | ecg | stock"},
        {"network.num_classes", "0", "class count; 0 infers it from the data"},
        {"network.filter_lengths", "3,6,12,18,24,30,36",
         "Boltzmann filter-length set z"},
        {"network.handcrafted_length", "3",
         "hand-crafted filter length (positive multiple of 3)"},
        {"network.channels", "32,32,32", "channels per BC layer"},
        {"network.dilations", "1,2,4", "dilation per BC layer (must double)"},
        {"network.forecast_hidden", "64", "hidden widths of the forecast head"},
        {"network.classifier_hidden", "64", "hidden widths of the classifier head"},
        {"network.temperature", "1", "Boltzmann temperature T"},
        {"network.leaky_slope", "0.01", "leaky ReLU negative slope"},
        {"network.mc_passes", "30", "stochastic passes per prediction at inference"},
        {"network.dropout", "on", "sample concrete-dropout masks in forward passes"},
        {"network.concrete_temperature", "0.1", "concrete relaxation temperature"},
        {"network.weight_reg", "1e-6", "dropout weight-regularizer coefficient"},
        {"network.dropout_reg", "1e-5", "dropout entropy-regularizer coefficient"},
        {"network.dropout_init_p", "0.1", "initial dropout probability"},
        {"network.isolate_classifier_gradients", "on",
         "stop cross-entropy gradients at the classifier inputs"},
        {"train.epochs", "100", "training epochs"},
        {"train.batch_size", "64", "batch size"},
        {"train.patience", "0", "early-stopping patience in epochs; 0 disables"},
        {"train.welford_reset_each_epoch", "on",
         "reset forecast accumulators at each epoch start"},
        {"train.shuffle", "on", "shuffle the train split every epoch"},
        {"train.learning_rate", "1e-3", "Adam learning rate"},
        {"train.val_mc_passes", "10", "stochastic passes per validation prediction"},
        {"loss.alpha", "1", "cross-entropy weight in the joint loss"},
        {"loss.beta", "1", "forecast MSE weight in the joint loss"},
        {"attack.epsilon", "0.1", "FGSM step size"},
        {"attack.loss_kind", "cce", "loss the attack differentiates: cce | mse"},
        {"attack.target_split", "test", "split to perturb: train | test"},
    };
    return entries;
  }

  RunConfig() {
    for (const Entry& e : registry()) values_[e.key] = e.def;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end())
      throw config_error("unknown configuration key '" + key + "'");
    it->second = value;
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw config_error("unknown configuration key '" + key + "'");
    return it->second;
  }

  long get_int(const std::string& key) const {
    const std::string& s = get(key);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
      throw config_error(key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const long v = get_int(key);
    if (v < 0) throw config_error(key + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  double get_double(const std::string& key) const {
    const std::string& s = get(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw config_error(key + ": expected a number, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw config_error(key + ": expected on/off, got '" + s + "'");
  }

  std::vector<std::size_t> get_size_list(const std::string& key) const {
    std::vector<std::size_t> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      char* end = nullptr;
      const long v = std::strtol(item.c_str(), &end, 10);
      if (end == item.c_str() || *end != '\0' || v < 0)
        throw config_error(key + ": bad list element '" + item + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw config_error(key + ": empty list");
    return out;
  }

  /// Parses `key = value` lines; a `[section]` header prefixes bare keys.
  /// '#' starts a comment.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto strip = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = strip(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw config_error(path + ": line " + std::to_string(line_no) +
                             ": malformed section header");
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error(path + ": line " + std::to_string(line_no) +
                           ": expected key = value");
      std::string key = strip(line.substr(0, eq));
      const std::string value = strip(line.substr(eq + 1));
      if (key.find('.') == std::string::npos && !section.empty())
        key = section + "." + key;
      set(key, value);
    }
  }

  /// Serializes every effective key, grouped into sections, in registry order.
  std::string to_text() const {
    std::string out;
    std::string section;
    for (const Entry& e : registry()) {
      const std::string key = e.key;
      const std::string sec = key.substr(0, key.find('.'));
      if (sec != section) {
        if (!out.empty()) out += "\n";
        out += "[" + sec + "]\n";
        section = sec;
      }
      out += key.substr(key.find('.') + 1) + " = " + values_.at(key) + "\n";
    }
    return out;
  }

  /// Restores a config from to_text() output.
  static RunConfig from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw config_error("malformed config text line: " + line);
      std::string key = line.substr(0, eq);
      while (!key.empty() && (key.back() == ' ')) key.pop_back();
      std::string value = line.substr(eq + 1);
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
  }

  /// Shipped presets mirroring the experiment setups.
  void apply_preset(const std::string& name) {
    if (name == "sim-default") {
      // The registry defaults: 100 epochs, batch 64, m = 40, k = 10.
    } else if (name == "ecg") {
      set("data.format", "ecg");
      set("data.smote", "off");  // turn on (with train.epochs = 200) for the balanced run
      set("train.epochs", "100");
      set("train.batch_size", "64");
    } else if (name == "stock") {
      set("data.format", "stock");
      set("data.normalize_windows", "on");
      set("train.epochs", "100");
      set("train.batch_size", "128");
      set("train.patience", "10");
    } else {
      throw config_error("unknown preset '" + name +
                         "' (expected sim-default, ecg, or stock)");
    }
  }

  // Typed views -------------------------------------------------------------

  ForeClassNetConfig network_config(std::size_t m, std::size_t k,
                                    std::size_t num_classes) const {
    ForeClassNetConfig n;
    n.m = m;
    n.k = k;
    n.num_classes = num_classes;
    n.filter_lengths = get_size_list("network.filter_lengths");
    n.handcrafted_length = static_cast<std::size_t>(get_u64("network.handcrafted_length"));
    n.channels = get_size_list("network.channels");
    n.dilations = get_size_list("network.dilations");
    n.forecast_hidden = get_size_list("network.forecast_hidden");
    n.classifier_hidden = get_size_list("network.classifier_hidden");
    n.temperature = get_double("network.temperature");
    n.leaky_slope = get_double("network.leaky_slope");
    n.mc_passes = static_cast<std::size_t>(get_u64("network.mc_passes"));
    n.dropout_enabled = get_bool("network.dropout");
    n.concrete_temperature = get_double("network.concrete_temperature");
    n.weight_reg = get_double("network.weight_reg");
    n.dropout_reg = get_double("network.dropout_reg");
    n.dropout_init_p = get_double("network.dropout_init_p");
    n.isolate_classifier_gradients = get_bool("network.isolate_classifier_gradients");
    n.validate();
    return n;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = static_cast<std::size_t>(get_u64("train.epochs"));
    t.batch_size = static_cast<std::size_t>(get_u64("train.batch_size"));
    t.seed = get_u64("run.seed");
    t.patience = static_cast<std::size_t>(get_u64("train.patience"));
    t.welford_reset_each_epoch = get_bool("train.welford_reset_each_epoch");
    t.shuffle = get_bool("train.shuffle");
    t.learning_rate = get_double("train.learning_rate");
    t.val_mc_passes = static_cast<std::size_t>(get_u64("train.val_mc_passes"));
    t.threads = static_cast<std::size_t>(get_u64("run.threads"));
    t.validate();
    return t;
  }

  LossConfig loss_config() const {
    LossConfig l;
    l.alpha = get_double("loss.alpha");
    l.beta = get_double("loss.beta");
    l.validate();
    return l;
  }

  AttackConfig attack_config() const {
    AttackConfig a;
    a.epsilon = get_double("attack.epsilon");
    const std::string kind = get("attack.loss_kind");
    if (kind == "cce") a.loss_kind = AttackLoss::cce;
    else if (kind == "mse") a.loss_kind = AttackLoss::mse;
    else throw config_error("attack.loss_kind: expected cce or mse, got '" + kind + "'");
    const std::string split = get("attack.target_split");
    if (split == "train") a.target_split = SplitTag::train;
    else if (split == "test") a.target_split = SplitTag::test;
    else throw config_error("attack.target_split: expected train or test");
    a.validate();
    return a;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fcn

#endif  // FORECLASSNET_CONFIG_HPP
