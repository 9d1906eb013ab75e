#include "whamkit/app/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace whamkit::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

std::string stage_name(Stage s) { return s == Stage::kPretrain ? "pretrain" : "finetune"; }

int RunConfig::resolved_epochs() const {
  if (epochs >= 0) return epochs;
  return stage == Stage::kPretrain ? 80 : 30;
}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"stage",
       [](RunConfig& c, const std::string& v) {
         if (v == "pretrain") c.stage = Stage::kPretrain;
         else if (v == "finetune") c.stage = Stage::kFinetune;
         else throw ConfigError("config: stage must be pretrain or finetune");
       }},
      {"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
      {"init", [](RunConfig& c, const std::string& v) { c.init = v; }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.epochs = static_cast<int>(to_int("epochs", v)); }},
      {"lr", [](RunConfig& c, const std::string& v) { c.lr = to_double("lr", v); }},
      {"lr_new", [](RunConfig& c, const std::string& v) { c.lr_new = to_double("lr_new", v); }},
      {"lr_pretrained", [](RunConfig& c, const std::string& v) { c.lr_pretrained = to_double("lr_pretrained", v); }},
      {"batch", [](RunConfig& c, const std::string& v) { c.batch = static_cast<int>(to_int("batch", v)); }},
      {"chunk", [](RunConfig& c, const std::string& v) { c.chunk = static_cast<int>(to_int("chunk", v)); }},
      {"hidden", [](RunConfig& c, const std::string& v) { c.dims.hidden = static_cast<int>(to_int("hidden", v)); }},
      {"feature_dim", [](RunConfig& c, const std::string& v) { c.dims.feature = static_cast<int>(to_int("feature_dim", v)); }},
      {"integrator_hidden",
       [](RunConfig& c, const std::string& v) { c.dims.integrator_hidden = static_cast<int>(to_int("integrator_hidden", v)); }},
      {"init_hidden",
       [](RunConfig& c, const std::string& v) { c.dims.init_hidden = static_cast<int>(to_int("init_hidden", v)); }},
      {"init_noise", [](RunConfig& c, const std::string& v) { c.init_noise = to_double("init_noise", v); }},
      {"integrator", [](RunConfig& c, const std::string& v) { c.integrator = to_bool("integrator", v); }},
      {"validate", [](RunConfig& c, const std::string& v) { c.validate = to_bool("validate", v); }},
      {"augment", [](RunConfig& c, const std::string& v) { c.augment = to_bool("augment", v); }},
  };
  if (key.rfind("lambda_", 0) == 0) {
    const std::string term = key.substr(7);
    for (int k = 0; k < losses::kNumTerms; ++k) {
      if (losses::term_name(k) == term) {
        weights[k] = to_double(key, v);
        return;
      }
    }
    throw ConfigError("config: unknown loss term '" + term + "'");
  }
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second(*this, v);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("config: expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::validate_values() const {
  if (epochs < -1) throw ConfigError("config: epochs must be >= 0");
  if (!(lr > 0) || !(lr_new > 0) || !(lr_pretrained > 0)) throw ConfigError("config: learning rates must be positive");
  if (batch < 1) throw ConfigError("config: batch must be positive");
  if (chunk < 2) throw ConfigError("config: chunk must be at least 2");
  if (init_noise < 0) throw ConfigError("config: init_noise must be >= 0");
  try {
    dims.validate();
    weights.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream s;
  s << "stage = " << stage_name(stage) << "\n";
  s << "dataset = " << dataset.string() << "\n";
  s << "out = " << out.string() << "\n";
  if (!init.empty()) s << "init = " << init.string() << "\n";
  s << "seed = " << seed << "\n";
  s << "epochs = " << resolved_epochs() << "\n";
  s << "lr = " << fmt(lr) << "\n";
  s << "lr_new = " << fmt(lr_new) << "\n";
  s << "lr_pretrained = " << fmt(lr_pretrained) << "\n";
  s << "batch = " << batch << "\n";
  s << "chunk = " << chunk << "\n";
  s << "hidden = " << dims.hidden << "\n";
  s << "feature_dim = " << dims.feature << "\n";
  s << "integrator_hidden = " << dims.integrator_hidden << "\n";
  s << "init_hidden = " << dims.init_hidden << "\n";
  for (int k = 0; k < losses::kNumTerms; ++k) s << "lambda_" << losses::term_name(k) << " = " << fmt(weights[k]) << "\n";
  s << "init_noise = " << fmt(init_noise) << "\n";
  s << "integrator = " << (integrator ? "true" : "false") << "\n";
  s << "validate = " << (validate ? "true" : "false") << "\n";
  s << "augment = " << (augment ? "true" : "false") << "\n";
  return s.str();
}

}  // namespace whamkit::app
