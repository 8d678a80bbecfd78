#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "run_config.hpp"
#include "xmg/errors.hpp"

namespace {

using xmg::cli::RunConfig;

// Layering: defaults < --run-config file < explicitly passed flags.
struct ConfigLayer {
  std::string run_config_path;
  RunConfig flags;  // flag values land here
  CLI::App* cmd = nullptr;

  void add_common(CLI::App* app) {
    cmd = app;
    app->add_option("--run-config", run_config_path, "JSON run configuration file");
    app->add_option("--seed", flags.seed, "master rng seed");
  }
  void add_model(CLI::App* app) {
    app->add_option("--hidden", flags.hidden, "hidden size per layer");
    app->add_option("--lr", flags.learning_rate, "Adam step size");
    app->add_option("--epochs", flags.epochs, "training epochs");
    app->add_option("--segment", flags.segment, "truncated-BPTT segment length");
  }
  void add_generation(CLI::App* app) {
    app->add_option("--length", flags.length, "notes per candidate");
    app->add_option("--count", flags.count, "number of candidates");
    app->add_option("--temperature", flags.temperature, "sampling temperature");
    app->add_option("--seed-token", flags.seed_token, "seed note as five classes n t d v p")
        ->expected(5);
  }
  void add_screening(CLI::App* app) {
    app->add_option("--lambda", flags.lambda, "regulation weight");
    app->add_option("--window", flags.window, "moving-average window");
    app->add_option("--kappa", flags.kappa, "aesthetic trade-off weight");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!run_config_path.empty()) cfg = xmg::cli::load_run_config(run_config_path);
    auto take = [&](const char* name, auto member) {
      if (cmd->count(name) > 0) cfg.*member = flags.*member;
    };
    take("--seed", &RunConfig::seed);
    if (cmd->get_option_no_throw("--hidden")) {
      take("--hidden", &RunConfig::hidden);
      take("--lr", &RunConfig::learning_rate);
      take("--epochs", &RunConfig::epochs);
      take("--segment", &RunConfig::segment);
    }
    if (cmd->get_option_no_throw("--length")) {
      take("--length", &RunConfig::length);
      take("--count", &RunConfig::count);
      take("--temperature", &RunConfig::temperature);
      take("--seed-token", &RunConfig::seed_token);
    }
    if (cmd->get_option_no_throw("--lambda")) {
      take("--lambda", &RunConfig::lambda);
      take("--window", &RunConfig::window);
      take("--kappa", &RunConfig::kappa);
    }
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"expressive MIDI tokenization, factorized note generation, entropy screening"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_language = "cycle";
  std::string synth_out;
  int synth_files = 8, synth_notes = 640;
  std::uint64_t synth_seed = 42;
  synth->add_option("--language", synth_language, "cycle (MIDI) or planted (tokens)");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--files", synth_files, "number of files");
  synth->add_option("--notes", synth_notes, "notes per file");
  synth->add_option("--seed", synth_seed, "rng seed (planted language)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit codec bins from a MIDI corpus");
  std::string cal_midi, cal_out, cal_report;
  ConfigLayer cal_layer;
  calibrate->add_option("--midi", cal_midi, "directory of .mid files")->required();
  calibrate->add_option("--out", cal_out, "codec config output path")->required();
  calibrate->add_option("--report", cal_report, "directory for histogram CSV/SVG reports");
  cal_layer.add_common(calibrate);

  // encode
  auto* encode = app.add_subcommand("encode", "MIDI files to token CSVs");
  std::string enc_config, enc_out;
  std::vector<std::string> enc_files;
  encode->add_option("--config", enc_config, "codec config")->required();
  encode->add_option("--out", enc_out, "output directory")->required();
  encode->add_option("files", enc_files, "MIDI files")->required();

  // decode
  auto* decode = app.add_subcommand("decode", "token CSVs to MIDI files");
  std::string dec_config, dec_out;
  int dec_ppq = 480;
  std::vector<std::string> dec_files;
  decode->add_option("--config", dec_config, "codec config")->required();
  decode->add_option("--out", dec_out, "output directory")->required();
  decode->add_option("--ppq", dec_ppq, "ticks per quarter for written files");
  decode->add_option("files", dec_files, "token CSV files")->required();

  // train
  auto* train = app.add_subcommand("train", "train the five submodels");
  std::string train_tokens, train_out, train_submodel = "all";
  bool train_resume = false, train_independent = false;
  ConfigLayer train_layer;
  train->add_option("--tokens", train_tokens, "directory of token CSVs")->required();
  train->add_option("--out", train_out, "checkpoint/loss output directory")->required();
  train->add_option("--submodel", train_submodel, "n|t|d|v|p|all");
  train->add_flag("--resume", train_resume, "continue from existing checkpoints");
  train->add_flag("--independent", train_independent,
                  "train the independent-output ablation (conditioning blocks zeroed)");
  train_layer.add_common(train);
  train_layer.add_model(train);

  // generate
  auto* generate = app.add_subcommand("generate", "sample candidates, screen, emit the winner");
  std::string gen_ckpt, gen_config, gen_heldout, gen_out;
  ConfigLayer gen_layer;
  generate->add_option("--checkpoints", gen_ckpt, "directory with the five checkpoints")->required();
  generate->add_option("--config", gen_config, "codec config (for decoding the winner)")->required();
  generate->add_option("--heldout", gen_heldout, "held-out token CSVs for ground-truth statistics")
      ->required();
  generate->add_option("--out", gen_out, "output directory")->required();
  gen_layer.add_common(generate);
  gen_layer.add_generation(generate);
  gen_layer.add_screening(generate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 0 for --help, 1 for usage errors
  }

  try {
    if (synth->parsed()) {
      xmg::cli::cmd_synth(synth_language, synth_out, synth_files, synth_notes, synth_seed);
    } else if (calibrate->parsed()) {
      xmg::cli::cmd_calibrate(cal_midi, cal_out, cal_report, cal_layer.resolve());
    } else if (encode->parsed()) {
      std::vector<std::filesystem::path> files(enc_files.begin(), enc_files.end());
      xmg::cli::cmd_encode(files, enc_config, enc_out);
    } else if (decode->parsed()) {
      std::vector<std::filesystem::path> files(dec_files.begin(), dec_files.end());
      xmg::cli::cmd_decode(files, dec_config, dec_out, dec_ppq);
    } else if (train->parsed()) {
      xmg::cli::cmd_train(train_tokens, train_out, train_layer.resolve(), train_submodel,
                          train_resume, train_independent);
    } else if (generate->parsed()) {
      xmg::cli::cmd_generate(gen_ckpt, gen_config, gen_heldout, gen_out, gen_layer.resolve());
    }
  } catch (const xmg::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const xmg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
