#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "xmg/attention.hpp"
#include "xmg/codec.hpp"
#include "xmg/midi_io.hpp"
#include "xmg/screen.hpp"
#include "xmg/svg.hpp"
#include "xmg/synthetic.hpp"
#include "xmg/train.hpp"

namespace xmg::cli {

namespace fs = std::filesystem;

namespace {

// XMG_LOG = quiet | info | debug (default info)
int log_level() {
  static int level = [] {
    const char* env = std::getenv("XMG_LOG");
    if (!env) return 1;
    std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[xmg] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[xmg] " << msg << "\n";
}

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::initializer_list<const char*> exts) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    for (const char* ext : exts) {
      if (entry.path().extension() == ext) files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string zero_pad(int value, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

// The canonical note order the codec expects: onset, ties by pitch.
void sort_notes(std::vector<NoteEvent>& notes) {
  std::stable_sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset_ms != b.onset_ms) return a.onset_ms < b.onset_ms;
    return a.pitch < b.pitch;
  });
}

struct ExtractedValues {
  std::vector<double> time_shifts;
  std::vector<double> durations;
  std::vector<double> velocity_changes;
};

void extract_values(const std::vector<NoteEvent>& notes, int reference_velocity,
                    ExtractedValues& out) {
  double prev_onset = 0.0;
  int prev_velocity = reference_velocity;
  for (const NoteEvent& n : notes) {
    out.time_shifts.push_back(n.onset_ms - prev_onset);
    out.durations.push_back(n.duration_ms);
    out.velocity_changes.push_back(static_cast<double>(n.velocity - prev_velocity));
    prev_onset = n.onset_ms;
    prev_velocity = n.velocity;
  }
}

void write_histogram_report(const fs::path& report_dir, const char* field, const BinSpec& spec,
                            std::span<const double> values) {
  std::vector<double> counts(spec.class_count(), 0.0);
  for (double v : values) counts[quantize(v, spec)] += 1.0;

  std::ofstream os(report_dir / (std::string("hist_") + field + ".csv"));
  if (!os) throw Error("cannot write histogram CSV");
  os << "class,lower,upper,representative,count\n";
  os.precision(12);
  for (int k = 0; k < spec.class_count(); ++k) {
    os << k << ',';
    if (k == 0) os << "-inf";
    else os << spec.boundaries[k - 1];
    os << ',';
    if (k == spec.class_count() - 1) os << "inf";
    else os << spec.boundaries[k];
    os << ',' << spec.representatives[k] << ',' << counts[k] << '\n';
  }

  svg::save(svg::bar_chart(std::string(field) + " class frequencies", counts, "class", "count"),
            report_dir / (std::string("hist_") + field + ".svg"));
}

void print_weber_summary(const char* field, const BinSpec& spec) {
  auto violations = weber_diagnostic(spec);
  std::cout << "weber " << field << ": " << violations.size() << " violation(s)";
  if (!violations.empty()) {
    std::cout << " at class";
    for (std::size_t i = 0; i < violations.size() && i < 12; ++i) {
      std::cout << ' ' << violations[i].class_index;
    }
    if (violations.size() > 12) std::cout << " ...";
  }
  std::cout << "\n";
}

constexpr const char* kCheckpointNames[5] = {"submodel_n.ckpt", "submodel_t.ckpt",
                                             "submodel_d.ckpt", "submodel_v.ckpt",
                                             "submodel_p.ckpt"};

ModelSet load_model_set(const fs::path& dir) {
  ModelSet models;
  for (int m = 0; m < kNumFields; ++m) {
    fs::path path = dir / kCheckpointNames[m];
    if (!fs::exists(path)) throw Error("missing checkpoint " + path.string());
    models[m] = load_checkpoint(path);
    if (models[m].submodel != m) throw Error("checkpoint " + path.string() + " has wrong submodel id");
  }
  return models;
}

void emit_attention_report(const ModelSet& models, const fs::path& out_dir) {
  AttentionMatrix matrix = attention_scores(models);
  write_attention_csv(matrix, out_dir / "attention.csv");
  std::vector<std::string> rows(kInputBlockNames.begin(), kInputBlockNames.end());
  std::vector<std::string> cols;
  for (int m = 0; m < kNumFields; ++m) cols.push_back(std::string("m") + kFieldNames[m]);
  svg::save(svg::heatmap("attention scores", rows, cols, matrix.values), out_dir / "attention.svg");

  SelfReferenceReport report = self_reference_report(matrix);
  for (int m = 0; m < kNumFields; ++m) {
    std::ostringstream line;
    line.precision(4);
    line << "self-reference " << kFieldNames[m] << ": own-row " << report.own_row_score[m]
         << " vs active-row mean " << report.active_row_mean[m];
    log_info(line.str());
  }
}

}  // namespace

void cmd_synth(const std::string& language, const fs::path& out_dir, int files, int notes,
               std::uint64_t seed) {
  if (files < 1) throw ValidationError("synth: --files must be at least 1");
  if (notes < 2) throw ValidationError("synth: --notes must be at least 2");
  fs::create_directories(out_dir);
  if (language == "cycle") {
    auto performance = cycle_notes(notes);
    auto bytes = write_smf(performance, kCyclePpq);
    for (int f = 0; f < files; ++f) {
      write_file(out_dir / ("cycle_" + zero_pad(f, 3) + ".mid"), bytes);
    }
    log_info("wrote " + std::to_string(files) + " cycle MIDI file(s)");
  } else if (language == "planted") {
    auto corpus = planted_corpus(files, notes, seed);
    for (int f = 0; f < files; ++f) {
      write_token_csv(corpus[f], out_dir / ("planted_" + zero_pad(f, 3) + ".csv"));
    }
    log_info("wrote " + std::to_string(files) + " planted token file(s)");
  } else {
    throw ValidationError("synth: unknown language '" + language + "' (cycle|planted)");
  }
}

void cmd_calibrate(const fs::path& midi_dir, const fs::path& out_config, const fs::path& report_dir,
                   const RunConfig& cfg) {
  auto files = sorted_files(midi_dir, {".mid", ".midi"});
  ExtractedValues values;
  std::vector<std::string> failures;
  int parsed = 0;
  for (const auto& file : files) {
    try {
      auto bytes = read_file(file);
      auto result = parse_smf(bytes);
      if (result.dangling_note_warning) log_info("dangling note-on in " + file.string());
      sort_notes(result.notes);
      extract_values(result.notes, cfg.reference_velocity, values);
      ++parsed;
      log_debug("parsed " + file.string() + ": " + std::to_string(result.notes.size()) + " notes");
    } catch (const Error& e) {
      failures.push_back(file.string() + ": " + e.what());
    }
  }
  for (const auto& f : failures) std::cerr << "error: " << f << "\n";
  if (parsed == 0) {
    throw Error("calibrate: no parsable MIDI file in " + midi_dir.string() + " (" +
                std::to_string(failures.size()) + " failed)");
  }

  CodecConfig config;
  config.reference_velocity = cfg.reference_velocity;
  config.time_shift = calibrate(values.time_shifts, kFieldClasses[kFieldT],
                                DomainKind::Nonnegative, "time_shift");
  config.duration = calibrate(values.durations, kFieldClasses[kFieldD], DomainKind::Nonnegative,
                              "duration");
  config.velocity_change = calibrate(values.velocity_changes, kFieldClasses[kFieldV],
                                     DomainKind::Signed, "velocity_change");
  config.validate();
  if (!out_config.parent_path().empty()) fs::create_directories(out_config.parent_path());
  save_codec_config(config, out_config);
  log_info("calibrated from " + std::to_string(parsed) + " file(s) -> " + out_config.string());

  print_weber_summary("time_shift", config.time_shift);
  print_weber_summary("duration", config.duration);
  print_weber_summary("velocity_change", config.velocity_change);

  if (!report_dir.empty()) {
    fs::create_directories(report_dir);
    write_histogram_report(report_dir, "time_shift", config.time_shift, values.time_shifts);
    write_histogram_report(report_dir, "duration", config.duration, values.durations);
    write_histogram_report(report_dir, "velocity_change", config.velocity_change,
                           values.velocity_changes);
  }
}

void cmd_encode(const std::vector<fs::path>& files, const fs::path& config_path,
                const fs::path& out_dir) {
  CodecConfig config = load_codec_config(config_path);
  fs::create_directories(out_dir);
  int failed = 0;
  for (const auto& file : files) {
    try {
      auto result = parse_smf(read_file(file));
      sort_notes(result.notes);
      EncodeResult encoded = encode(result.notes, config);
      if (encoded.clamped_pitch_count > 0) {
        log_info(file.string() + ": clamped " + std::to_string(encoded.clamped_pitch_count) +
                 " out-of-range pitch(es)");
      }
      write_token_csv(encoded.tokens, out_dir / (file.stem().string() + ".csv"));
    } catch (const Error& e) {
      std::cerr << "error: " << file.string() << ": " << e.what() << "\n";
      ++failed;
    }
  }
  if (failed > 0) throw Error("encode: " + std::to_string(failed) + " file(s) failed");
}

void cmd_decode(const std::vector<fs::path>& files, const fs::path& config_path,
                const fs::path& out_dir, int ppq) {
  CodecConfig config = load_codec_config(config_path);
  fs::create_directories(out_dir);
  int failed = 0;
  for (const auto& file : files) {
    try {
      auto tokens = read_token_csv(file);
      auto notes = decode(tokens, config);
      write_file(out_dir / (file.stem().string() + ".mid"), write_smf(notes, ppq));
    } catch (const Error& e) {
      std::cerr << "error: " << file.string() << ": " << e.what() << "\n";
      ++failed;
    }
  }
  if (failed > 0) throw Error("decode: " + std::to_string(failed) + " file(s) failed");
}

namespace {

std::vector<std::vector<NoteToken>> load_token_corpus(const fs::path& dir) {
  auto files = sorted_files(dir, {".csv"});
  std::vector<std::vector<NoteToken>> corpus;
  for (const auto& file : files) {
    auto tokens = read_token_csv(file);
    if (tokens.size() >= 2) corpus.push_back(std::move(tokens));
  }
  if (corpus.empty()) throw Error("no usable token sequences in " + dir.string());
  return corpus;
}

}  // namespace

void cmd_train(const fs::path& tokens_dir, const fs::path& out_dir, const RunConfig& cfg,
               const std::string& submodel_filter, bool resume, bool independent) {
  auto corpus = load_token_corpus(tokens_dir);
  fs::create_directories(out_dir);

  std::vector<int> selected;
  if (submodel_filter == "all") {
    selected = {0, 1, 2, 3, 4};
  } else {
    for (int m = 0; m < kNumFields; ++m) {
      if (submodel_filter == kFieldNames[m]) selected.push_back(m);
    }
    if (selected.empty()) {
      throw ValidationError("train: --submodel must be one of n,t,d,v,p,all");
    }
  }

  TrainConfig train_cfg;
  train_cfg.hidden = cfg.hidden;
  train_cfg.learning_rate = cfg.learning_rate;
  train_cfg.epochs = cfg.epochs;
  train_cfg.segment_length = cfg.segment;
  train_cfg.conditioned = !independent;

  for (int m : selected) {
    train_cfg.seed = cfg.seed + static_cast<std::uint64_t>(m);
    fs::path ckpt_path = out_dir / kCheckpointNames[m];
    ModelParams initial;
    const ModelParams* initial_ptr = nullptr;
    if (resume) {
      if (!fs::exists(ckpt_path)) throw Error("train: --resume but no checkpoint " + ckpt_path.string());
      initial = load_checkpoint(ckpt_path);
      initial_ptr = &initial;
    }
    TrainResult result = train(corpus, m, train_cfg, initial_ptr);
    save_checkpoint(result.params, ckpt_path);
    write_loss_csv(result.loss_curve, out_dir / (std::string("loss_") + kFieldNames[m] + ".csv"));
    std::ostringstream line;
    line.precision(6);
    line << "submodel " << kFieldNames[m] << ": final loss " << result.loss_curve.back() << " nats ("
         << result.loss_curve.size() << " epochs)";
    log_info(line.str());
  }

  bool all_present = true;
  for (int m = 0; m < kNumFields; ++m) all_present = all_present && fs::exists(out_dir / kCheckpointNames[m]);
  if (all_present) {
    emit_attention_report(load_model_set(out_dir), out_dir);
  } else {
    log_info("attention report skipped (not all five checkpoints present)");
  }
}

void cmd_generate(const fs::path& checkpoint_dir, const fs::path& config_path,
                  const fs::path& heldout_dir, const fs::path& out_dir, const RunConfig& cfg) {
  ModelSet models = load_model_set(checkpoint_dir);
  CodecConfig codec = load_codec_config(config_path);
  auto heldout = load_token_corpus(heldout_dir);
  fs::create_directories(out_dir);

  GroundTruthStats gt = ground_truth_stats(models, heldout, cfg.window);
  {
    std::ofstream os(out_dir / "gt_stats.csv");
    os << "submodel,statistic,mean,std\n";
    os.precision(12);
    const char* stat_names[3] = {"mean", "variance", "moving_avg_variance"};
    for (int m = 0; m < kNumFields; ++m) {
      for (int s = 0; s < 3; ++s) {
        os << kFieldNames[m] << ',' << stat_names[s] << ',' << gt.per_model[m][s].mean << ','
           << gt.per_model[m][s].stddev << '\n';
      }
    }
  }

  NoteToken seed_token{cfg.seed_token[0], cfg.seed_token[1], cfg.seed_token[2], cfg.seed_token[3],
                       cfg.seed_token[4]};
  log_info("generating " + std::to_string(cfg.count) + " candidate(s) of " +
           std::to_string(cfg.length) + " notes");
  auto candidates = generate(models, seed_token, cfg.length, cfg.count, cfg.temperature, cfg.seed);

  std::vector<std::array<std::vector<double>, 5>> entropy_sets;
  for (const auto& cand : candidates) entropy_sets.push_back(cand.entropies);
  ScreeningConfig screening{cfg.lambda, cfg.window, cfg.kappa};
  SelectionResult selection = rank_and_select(entropy_sets, gt, screening);

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    write_token_csv(candidates[c].tokens,
                    out_dir / ("candidate_" + zero_pad(static_cast<int>(c), 3) + ".csv"));
  }
  write_scored_csv(selection, out_dir / "scored.csv");

  {
    std::ofstream os(out_dir / "aesthetics.csv");
    os << "candidate,a_n,a_t,a_d,a_v,a_p,a_mean\n";
    os.precision(12);
    for (const auto& row : selection.table) {
      os << row.candidate;
      double sum = 0.0;
      for (int m = 0; m < kNumFields; ++m) {
        double a = aesthetic_score(row.per_model[m], cfg.kappa);
        os << ',' << a;
        sum += a;
      }
      os << ',' << sum / kNumFields << '\n';
    }
  }

  // Fig-4-style distributions of each statistic over the candidate pool,
  // with the ground-truth mean as the reference marker.
  const char* stat_names[3] = {"mean", "variance", "moving_avg_variance"};
  {
    std::ofstream os(out_dir / "stat_histograms.csv");
    os << "submodel,statistic,bin_lower,bin_upper,count\n";
    os.precision(12);
    const int bins = 24;
    for (int s = 0; s < 3; ++s) {
      std::vector<svg::DistributionPanel> panels;
      for (int m = 0; m < kNumFields; ++m) {
        svg::DistributionPanel panel;
        panel.label = std::string("model ") + kFieldNames[m];
        for (const auto& row : selection.table) {
          const EntropyStats& st = row.per_model[m];
          panel.values.push_back(s == 0 ? st.mean : s == 1 ? st.variance : st.moving_avg_variance);
        }
        panel.marker_mean = gt.per_model[m][s].mean;
        panel.has_marker = true;

        double lo = panel.values[0], hi = panel.values[0];
        for (double v : panel.values) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi <= lo) hi = lo + 1.0;
        std::vector<int> counts(bins, 0);
        for (double v : panel.values) {
          int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
          ++counts[std::max(b, 0)];
        }
        for (int b = 0; b < bins; ++b) {
          os << kFieldNames[m] << ',' << stat_names[s] << ',' << lo + (hi - lo) * b / bins << ','
             << lo + (hi - lo) * (b + 1) / bins << ',' << counts[b] << '\n';
        }
        panels.push_back(std::move(panel));
      }
      svg::save(svg::distribution_panels(std::string("entropy ") + stat_names[s] +
                                             " across candidates (marker: held-out corpus)",
                                         panels),
                out_dir / (std::string("stats_") + stat_names[s] + ".svg"));
    }
  }

  const Candidate& winner = candidates[static_cast<std::size_t>(selection.winner)];
  auto notes = decode(winner.tokens, codec);
  write_file(out_dir / "winner.mid", write_smf(notes, 480));

  const ScoredCandidate& row = selection.table[static_cast<std::size_t>(selection.winner)];
  std::cout << "winner " << selection.winner << " score " << row.score << " (base " << row.base
            << ", D " << row.regulation << ") -> " << (out_dir / "winner.mid").string() << "\n";
}

}  // namespace xmg::cli
