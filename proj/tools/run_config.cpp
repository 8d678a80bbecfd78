#include "run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <vector>

#include "xmg/errors.hpp"
#include "xmg/token.hpp"

namespace xmg::cli {

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"", {"paths", "codec", "model", "generation", "screening", "seed"}},
    {"paths", {"corpus", "output", "checkpoints"}},
    {"codec", {"reference_velocity"}},
    {"model", {"layers", "hidden", "segment", "learning_rate", "epochs"}},
    {"generation", {"length", "count", "temperature", "seed_token"}},
    {"screening", {"lambda", "window", "kappa"}},
};

void reject_unknown_keys(const json& node, const std::string& section) {
  auto it = kKnownKeys.find(section);
  if (it == kKnownKeys.end()) return;
  for (const auto& [key, value] : node.items()) {
    if (!it->second.contains(key)) {
      throw ValidationError("run config: unknown key '" + key + "'" +
                            (section.empty() ? "" : " in section '" + section + "'"));
    }
    if (value.is_object()) reject_unknown_keys(value, key);
  }
}

template <typename T>
void get_if_present(const json& node, const char* key, T& out) {
  if (node.contains(key)) out = node.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("run config: ") + what);
  };
  require(reference_velocity >= 1 && reference_velocity <= 127,
          "reference_velocity outside [1,127]");
  require(layers == 2, "layers must be 2 (the checkpoint format is fixed to a 2-layer core)");
  require(hidden >= 1 && hidden <= 4096, "hidden outside [1,4096]");
  require(segment >= 1 && segment <= 100000, "segment outside [1,100000]");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate outside (0,1]");
  require(epochs >= 1 && epochs <= 1000000, "epochs outside [1,1000000]");
  require(length >= 1 && length <= 1000000, "length outside [1,1000000]");
  require(count >= 1 && count <= 100000, "count outside [1,100000]");
  require(temperature > 0.0 && temperature <= 100.0, "temperature outside (0,100]");
  require(lambda >= 0.0, "lambda must be nonnegative");
  require(window >= 1, "window must be at least 1");
  require(kappa >= 0.0, "kappa must be nonnegative");
  for (int f = 0; f < kNumFields; ++f) {
    require(seed_token[f] >= 0 && seed_token[f] < kFieldClasses[f],
            "seed_token field outside its class range");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open run config " + path.string());
  json root;
  try {
    root = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what(), 0);
  }
  if (!root.is_object()) throw ValidationError("run config: top level must be an object");
  reject_unknown_keys(root, "");

  RunConfig cfg;
  try {
    if (root.contains("paths")) {
      const auto& paths = root.at("paths");
      get_if_present(paths, "corpus", cfg.corpus_dir);
      get_if_present(paths, "output", cfg.output_dir);
      get_if_present(paths, "checkpoints", cfg.checkpoint_dir);
    }
    if (root.contains("codec")) {
      get_if_present(root.at("codec"), "reference_velocity", cfg.reference_velocity);
    }
    if (root.contains("model")) {
      const auto& model = root.at("model");
      get_if_present(model, "layers", cfg.layers);
      get_if_present(model, "hidden", cfg.hidden);
      get_if_present(model, "segment", cfg.segment);
      get_if_present(model, "learning_rate", cfg.learning_rate);
      get_if_present(model, "epochs", cfg.epochs);
    }
    if (root.contains("generation")) {
      const auto& gen = root.at("generation");
      get_if_present(gen, "length", cfg.length);
      get_if_present(gen, "count", cfg.count);
      get_if_present(gen, "temperature", cfg.temperature);
      if (gen.contains("seed_token")) {
        auto vec = gen.at("seed_token").get<std::vector<int>>();
        if (vec.size() != 5) throw ValidationError("run config: seed_token needs 5 fields");
        for (int f = 0; f < 5; ++f) cfg.seed_token[f] = vec[f];
      }
    }
    if (root.contains("screening")) {
      const auto& screening = root.at("screening");
      get_if_present(screening, "lambda", cfg.lambda);
      get_if_present(screening, "window", cfg.window);
      get_if_present(screening, "kappa", cfg.kappa);
    }
    get_if_present(root, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace xmg::cli
