#include "fedmix/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedmix/errors.hpp"

namespace fedmix {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError(key + ": '" + value + "' is not a number");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": '" + value + "' is not an integer");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": '" + value + "' is not an unsigned integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": '" + value + "' is not a boolean");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list element");
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void set_value(ExperimentConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string where = section + "." + key;
  if (section == "dataset") {
    if (key == "kind") cfg.dataset_kind = value;
    else if (key == "classes") cfg.classes = parse_int(where, value);
    else if (key == "per_class") cfg.per_class = parse_int(where, value);
    else if (key == "input_dim") cfg.input_dim = parse_int(where, value);
    else if (key == "spread") cfg.spread = parse_double(where, value);
    else if (key == "path") cfg.data_path = value;
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "split") {
    if (key == "labeled") cfg.n_labeled = parse_int(where, value);
    else if (key == "test") cfg.n_test = parse_int(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "partition") {
    if (key == "mu") cfg.mu = parse_double(where, value);
    else if (key == "quantity_imbalance") cfg.quantity_imbalance = parse_bool(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "federation") {
    if (key == "clients") cfg.fed.client_count = parse_int(where, value);
    else if (key == "participation") cfg.fed.participation = parse_double(where, value);
    else if (key == "rounds") cfg.fed.rounds = parse_int(where, value);
    else if (key == "aggregator") cfg.fed.aggregator = parse_aggregator(value);
    else if (key == "alpha") cfg.fed.mix_alpha = parse_double(where, value);
    else if (key == "beta") cfg.fed.mix_beta = parse_double(where, value);
    else if (key == "gamma") cfg.fed.mix_gamma = parse_double(where, value);
    else if (key == "parallel_clients") cfg.fed.parallel_clients = parse_bool(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "server_sgd" || section == "client_sgd") {
    SgdConfig& sgd = section == "server_sgd" ? cfg.fed.server_sgd : cfg.fed.client_sgd;
    if (key == "learning_rate") sgd.learning_rate = parse_double(where, value);
    else if (key == "batch_size") sgd.batch_size = parse_int(where, value);
    else if (key == "epochs") sgd.epochs = parse_int(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "loss") {
    if (key == "lambda_s") cfg.loss.lambda_s = parse_double(where, value);
    else if (key == "lambda_1") cfg.loss.lambda_1 = parse_double(where, value);
    else if (key == "lambda_2") cfg.loss.lambda_2 = parse_double(where, value);
    else if (key == "lambda_l1") cfg.loss.lambda_l1 = parse_double(where, value);
    else if (key == "consistency") cfg.consistency = value;
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "pseudo_label") {
    if (key == "tau") cfg.pseudo.tau = parse_double(where, value);
    else if (key == "augment_count") cfg.pseudo.augment_count = parse_int(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "augment") {
    if (key == "family") cfg.augment_family = value;
    else if (key == "jitter_scale") cfg.jitter_scale = parse_double(where, value);
    else if (key == "shift_fraction") cfg.shift_fraction = parse_double(where, value);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "model") {
    if (key == "hidden") cfg.hidden = parse_list<int>(where, value, parse_int);
    else throw ConfigError("unknown config key '" + where + "'");
  } else if (section == "experiment") {
    if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(where, value, parse_u64);
    else if (key == "name") cfg.name = value;
    else throw ConfigError("unknown config key '" + where + "'");
  } else {
    throw ConfigError("unknown config section '" + section + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset_kind != "synthetic" && dataset_kind != "cifar10") {
    throw ConfigError("dataset.kind must be synthetic or cifar10, got '" + dataset_kind + "'");
  }
  if (dataset_kind == "synthetic") {
    if (classes < 2) throw ConfigError("dataset.classes must be >= 2");
    if (per_class < 1) throw ConfigError("dataset.per_class must be >= 1");
    if (input_dim < 1) throw ConfigError("dataset.input_dim must be >= 1");
    if (spread < 0.0) throw ConfigError("dataset.spread must be >= 0");
  } else if (data_path.empty()) {
    throw ConfigError("dataset.path is required for cifar10");
  }
  if (n_labeled < 1) throw ConfigError("split.labeled must be >= 1");
  if (n_test < 1) throw ConfigError("split.test must be >= 1");
  if (!(mu > 0.0)) throw ConfigError("partition.mu must be > 0");
  fed.validate();
  loss.validate();
  pseudo.validate();
  if (consistency != "l2" && consistency != "kl") {
    throw ConfigError("loss.consistency must be l2 or kl, got '" + consistency + "'");
  }
  if (augment_family != "auto" && augment_family != "jitter" && augment_family != "image" &&
      augment_family != "identity") {
    throw ConfigError("augment.family must be auto, jitter, image or identity, got '" +
                      augment_family + "'");
  }
  if (jitter_scale < 0.0) throw ConfigError("augment.jitter_scale must be >= 0");
  if (shift_fraction < 0.0 || shift_fraction > 1.0) {
    throw ConfigError("augment.shift_fraction must be in [0, 1]");
  }
  if (hidden.empty()) throw ConfigError("model.hidden must list at least one width");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("model.hidden widths must be >= 1");
  }
  if (seeds.empty()) throw ConfigError("experiment.seeds must list at least one seed");
  if (name.empty()) throw ConfigError("experiment.name must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key before any [section]");
    }
    set_value(cfg, section, key, value);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  s += "[dataset]\n";
  s += "kind = " + cfg.dataset_kind + "\n";
  s += "classes = " + std::to_string(cfg.classes) + "\n";
  s += "per_class = " + std::to_string(cfg.per_class) + "\n";
  s += "input_dim = " + std::to_string(cfg.input_dim) + "\n";
  s += "spread = " + format_double(cfg.spread) + "\n";
  s += "path = " + cfg.data_path + "\n";
  s += "\n[split]\n";
  s += "labeled = " + std::to_string(cfg.n_labeled) + "\n";
  s += "test = " + std::to_string(cfg.n_test) + "\n";
  s += "\n[partition]\n";
  s += "mu = " + format_double(cfg.mu) + "\n";
  s += std::string("quantity_imbalance = ") + (cfg.quantity_imbalance ? "true" : "false") + "\n";
  s += "\n[federation]\n";
  s += "clients = " + std::to_string(cfg.fed.client_count) + "\n";
  s += "participation = " + format_double(cfg.fed.participation) + "\n";
  s += "rounds = " + std::to_string(cfg.fed.rounds) + "\n";
  s += "aggregator = " + aggregator_name(cfg.fed.aggregator) + "\n";
  s += "alpha = " + format_double(cfg.fed.mix_alpha) + "\n";
  s += "beta = " + format_double(cfg.fed.mix_beta) + "\n";
  s += "gamma = " + format_double(cfg.fed.mix_gamma) + "\n";
  s += std::string("parallel_clients = ") + (cfg.fed.parallel_clients ? "true" : "false") + "\n";
  for (int i = 0; i < 2; ++i) {
    const SgdConfig& sgd = i == 0 ? cfg.fed.server_sgd : cfg.fed.client_sgd;
    s += i == 0 ? "\n[server_sgd]\n" : "\n[client_sgd]\n";
    s += "learning_rate = " + format_double(sgd.learning_rate) + "\n";
    s += "batch_size = " + std::to_string(sgd.batch_size) + "\n";
    s += "epochs = " + std::to_string(sgd.epochs) + "\n";
  }
  s += "\n[loss]\n";
  s += "lambda_s = " + format_double(cfg.loss.lambda_s) + "\n";
  s += "lambda_1 = " + format_double(cfg.loss.lambda_1) + "\n";
  s += "lambda_2 = " + format_double(cfg.loss.lambda_2) + "\n";
  s += "lambda_l1 = " + format_double(cfg.loss.lambda_l1) + "\n";
  s += "consistency = " + cfg.consistency + "\n";
  s += "\n[pseudo_label]\n";
  s += "tau = " + format_double(cfg.pseudo.tau) + "\n";
  s += "augment_count = " + std::to_string(cfg.pseudo.augment_count) + "\n";
  s += "\n[augment]\n";
  s += "family = " + cfg.augment_family + "\n";
  s += "jitter_scale = " + format_double(cfg.jitter_scale) + "\n";
  s += "shift_fraction = " + format_double(cfg.shift_fraction) + "\n";
  s += "\n[model]\n";
  s += "hidden = ";
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(cfg.hidden[i]);
  }
  s += "\n\n[experiment]\n";
  s += "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(cfg.seeds[i]);
  }
  s += "\nname = " + cfg.name + "\n";
  return s;
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  const std::size_t dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size()) {
    throw ConfigError("override '" + dotted_key + "' must look like section.key");
  }
  set_value(cfg, dotted_key.substr(0, dot), dotted_key.substr(dot + 1), value);
}

}  // namespace fedmix
