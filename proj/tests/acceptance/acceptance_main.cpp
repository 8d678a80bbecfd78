// Acceptance suite: one binary, one pass/fail line per criterion.
//
// Criteria 5, 6 and 8 share trained planted-coupling fixtures; the fixture
// is built inside the first criterion that needs it and its training time is
// charged to that criterion's clock.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xmg/attention.hpp"
#include "xmg/codec.hpp"
#include "xmg/midi_io.hpp"
#include "xmg/screen.hpp"
#include "xmg/svg.hpp"
#include "xmg/synthetic.hpp"
#include "xmg/train.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using namespace xmg;

namespace {

// ---------------------------------------------------------------------------
// tiny harness
// ---------------------------------------------------------------------------

struct Checker {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename T>
  void expect_le(T value, T bound, const std::string& what) {
    if (!(value <= bound)) {
      std::ostringstream os;
      os << what << " (" << value << " > " << bound << ")";
      failures.push_back(os.str());
    }
  }
  template <typename T>
  void expect_lt(T value, T bound, const std::string& what) {
    if (!(value < bound)) {
      std::ostringstream os;
      os << what << " (" << value << " >= " << bound << ")";
      failures.push_back(os.str());
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// shared planted-coupling fixtures
// ---------------------------------------------------------------------------

ModelParams staged_train(const std::vector<std::vector<NoteToken>>& corpus, int submodel,
                         bool conditioned, std::uint64_t seed, double* final_loss = nullptr) {
  // A constant Adam step keeps the output distribution wobbling around the
  // optimum; the taper converges it tightly enough that sampled marginals
  // reflect the language rather than optimizer noise.
  struct Stage {
    double lr;
    int epochs;
  };
  constexpr Stage kStages[3] = {{5e-3, 3}, {1e-3, 3}, {2e-4, 2}};
  TrainConfig cfg;
  cfg.hidden = 32;
  cfg.segment_length = 64;
  cfg.seed = seed;
  cfg.conditioned = conditioned;
  ModelParams params;
  for (int s = 0; s < 3; ++s) {
    cfg.learning_rate = kStages[s].lr;
    cfg.epochs = kStages[s].epochs;
    TrainResult result = train(corpus, submodel, cfg, s ? &params : nullptr);
    params = std::move(result.params);
    if (final_loss) *final_loss = result.loss_curve.back();
  }
  return params;
}

struct PlantedFixture {
  static constexpr int kSupport = 16;
  std::vector<std::vector<NoteToken>> corpus;
  std::vector<std::vector<NoteToken>> heldout;
  ModelSet conditioned;
  ModelSet independent;
  double conditioned_d_loss = 0.0;
};

const PlantedFixture& planted_fixture() {
  static PlantedFixture fixture = [] {
    PlantedFixture f;
    f.corpus = planted_corpus(300, 100, 1234, PlantedFixture::kSupport);
    f.heldout = planted_corpus(24, 80, 4321, PlantedFixture::kSupport);
    for (int m = 0; m < kNumFields; ++m) {
      double loss = 0.0;
      f.conditioned[m] = staged_train(f.corpus, m, true, 100 + m, &loss);
      if (m == kFieldD) f.conditioned_d_loss = loss;
      // Submodel 0 has no conditioning blocks, so the two variants coincide.
      f.independent[m] = m == 0 ? f.conditioned[m] : staged_train(f.corpus, m, false, 100 + m);
    }
    return f;
  }();
  return fixture;
}

struct JointMeasurement {
  double joint_tv = 0.0;
  double n_marginal_tv = 0.0;
  double d_marginal_tv = 0.0;
  long samples = 0;
};

// Pools 100 stationary-start rollouts of 120 notes, discarding a 20-note
// burn-in: 10k samples of the empirical (n,d) joint.
JointMeasurement measure_joint(const ModelSet& models, bool conditioned, std::uint64_t seed) {
  const auto support = planted_n_support(PlantedFixture::kSupport);
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> n_marg, d_marg;
  double total = 0;
  std::mt19937_64 seed_rng(seed);
  for (int c = 0; c < 100; ++c) {
    NoteToken start = planted_seed_token(seed_rng, PlantedFixture::kSupport);
    auto rollout = conditioned ? generate(models, start, 120, 1, 1.0, seed * 1000 + c)
                               : generate_independent(models, start, 120, 1, 1.0, seed * 1000 + c);
    for (int i = 20; i < 120; ++i) {
      const NoteToken& tok = rollout[0].tokens[i];
      joint[{tok.n, tok.d}] += 1;
      n_marg[tok.n] += 1;
      d_marg[tok.d] += 1;
      total += 1;
    }
  }

  const double uniform = 1.0 / support.size();
  std::map<std::pair<int, int>, double> truth;
  std::map<int, double> truth_n, truth_d;
  for (int n : support) {
    truth[{n, planted_d_of_n(n)}] = uniform;
    truth_n[n] = uniform;
    truth_d[planted_d_of_n(n)] = uniform;
  }

  auto tv = [](const auto& emp, const auto& truth_map, double total_count) {
    double sum = 0.0;
    auto keys = truth_map;
    for (const auto& [k, v] : emp) keys[k] += 0.0;
    for (const auto& [k, unused] : keys) {
      double e = emp.count(k) ? emp.at(k) / total_count : 0.0;
      double t = truth_map.count(k) ? truth_map.at(k) : 0.0;
      sum += std::abs(e - t);
    }
    return sum / 2.0;
  };

  JointMeasurement out;
  out.joint_tv = tv(joint, truth, total);
  out.n_marginal_tv = tv(n_marg, truth_n, total);
  out.d_marginal_tv = tv(d_marg, truth_d, total);
  out.samples = static_cast<long>(total);
  return out;
}

// ---------------------------------------------------------------------------
// criterion 1: codec conformance
// ---------------------------------------------------------------------------

void criterion_codec_conformance(Checker& check) {
  auto start = Clock::now();
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> shift_dist(3.5, 1.0), dur_dist(4.5, 0.8);
  std::normal_distribution<double> vel_dist(0.0, 15.0);
  std::vector<double> shifts, durations, deltas;
  for (int i = 0; i < 30000; ++i) {
    shifts.push_back(shift_dist(rng));
    durations.push_back(dur_dist(rng));
    deltas.push_back(vel_dist(rng));
  }
  CodecConfig config;
  config.time_shift = calibrate(shifts, 105, DomainKind::Nonnegative, "time_shift");
  config.duration = calibrate(durations, 120, DomainKind::Nonnegative, "duration");
  config.velocity_change = calibrate(deltas, 47, DomainKind::Signed, "velocity_change");
  config.validate();

  check.expect(kFieldClasses[kFieldN] == 88, "n must have 88 classes");
  check.expect(config.time_shift.class_count() == 105, "t must have 105 classes");
  check.expect(config.duration.class_count() == 120, "d must have 120 classes");
  check.expect(config.velocity_change.class_count() == 47, "v must have 47 classes");
  check.expect(kFieldClasses[kFieldP] == 2, "p must have 2 classes");

  struct FieldCase {
    const char* name;
    const BinSpec* spec;
    std::function<double()> draw;
  };
  std::vector<FieldCase> cases = {
      {"time_shift", &config.time_shift, [&] { return shift_dist(rng); }},
      {"duration", &config.duration, [&] { return dur_dist(rng); }},
      {"velocity_change", &config.velocity_change, [&] { return vel_dist(rng); }},
  };
  for (const auto& fc : cases) {
    for (int k = 0; k < fc.spec->class_count(); ++k) {
      if (quantize(dequantize(k, *fc.spec), *fc.spec) != k) {
        check.expect(false, std::string(fc.name) + ": quantize(dequantize) not a fixed point");
        break;
      }
    }
    int bound_violations = 0;
    for (int i = 0; i < 10000; ++i) {
      double x = fc.draw();
      int cls = quantize(x, *fc.spec);
      double lo = cls == 0 ? -std::numeric_limits<double>::infinity() : fc.spec->boundaries[cls - 1];
      double hi = cls == fc.spec->class_count() - 1 ? std::numeric_limits<double>::infinity()
                                                    : fc.spec->boundaries[cls];
      if (std::abs(x - dequantize(cls, *fc.spec)) > hi - lo) ++bound_violations;
    }
    check.expect(bound_violations == 0,
                 std::string(fc.name) + ": round-trip error exceeded the class width");
  }
  check.expect_lt(seconds_since(start), 5.0, "runtime over 5 s");
}

// ---------------------------------------------------------------------------
// criterion 2: calibration balance
// ---------------------------------------------------------------------------

void criterion_calibration_balance(Checker& check) {
  auto start = Clock::now();
  std::mt19937_64 rng(3);
  // Heavy tail: per-class width growth (~20%/class) must dominate the
  // ~5% quantile-spacing noise at N/K ~ 950, or width comparisons flip at
  // arbitrary positions.
  std::lognormal_distribution<double> dist(5.0, 8.0);
  std::vector<double> values;
  for (int i = 0; i < 100000; ++i) values.push_back(dist(rng));

  const int k = 105;
  BinSpec spec = calibrate(values, k, DomainKind::Nonnegative, "time_shift");
  std::vector<long> counts(k, 0);
  for (double v : values) ++counts[quantize(v, spec)];
  const double target = 100000.0 / k;
  long worst_low = counts[0], worst_high = counts[0];
  for (long c : counts) {
    worst_low = std::min(worst_low, c);
    worst_high = std::max(worst_high, c);
  }
  check.expect(worst_low >= 0.8 * target, "class frequency below 80% of N/K");
  check.expect(worst_high <= 1.2 * target, "class frequency above 120% of N/K");

  auto violations = weber_diagnostic(spec);
  const int decile = (k + 9) / 10;
  for (const auto& v : violations) {
    check.expect_lt(v.class_index, decile, "weber violation beyond the lowest-value decile");
  }
  check.expect_lt(seconds_since(start), 10.0, "runtime over 10 s");
}

// ---------------------------------------------------------------------------
// criterion 3: SMF round trip
// ---------------------------------------------------------------------------

void criterion_smf_round_trip(Checker& check) {
  // Byte-level reference: hand-assembled format-0 file, one note.
  const std::vector<std::uint8_t> reference = {
      'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xe0,
      'M', 'T', 'r', 'k', 0, 0, 0, 13,
      0x00, 0x90, 0x3c, 0x50, 0x83, 0x60, 0x80, 0x3c, 0x00, 0x00, 0xff, 0x2f, 0x00};
  auto parsed_ref = parse_smf(reference);
  check.expect(parsed_ref.notes.size() == 1, "reference file must hold one note");
  if (parsed_ref.notes.size() == 1) {
    const NoteEvent& n = parsed_ref.notes[0];
    check.expect(n.pitch == 60 && n.velocity == 80 && !n.pedal_on, "reference note fields");
    check.expect(n.onset_ms == 0.0, "reference onset must be exactly 0");
    check.expect(n.duration_ms == 500.0, "reference duration must be exactly 500 ms");
  }

  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> pitch_dist(21, 108), vel_dist(1, 127);
  std::uniform_real_distribution<double> shift_dist(0.0, 350.0), dur_dist(15.0, 1200.0);
  const int ppq = 480;
  const double half_tick = 0.5 * 500.0 / ppq;
  long mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<NoteEvent> notes;
    std::map<int, long> busy_until;
    double onset = 0.0;
    while (static_cast<int>(notes.size()) < 30) {
      NoteEvent n{pitch_dist(rng), onset, dur_dist(rng), vel_dist(rng), (rng() & 1) != 0};
      long on_tick = std::lround(onset * ppq / 500.0);
      long off_tick = std::lround((onset + n.duration_ms) * ppq / 500.0);
      auto it = busy_until.find(n.pitch);
      if (it == busy_until.end() || on_tick >= it->second) {
        busy_until[n.pitch] = off_tick;
        notes.push_back(n);
      }
      onset += shift_dist(rng);
    }
    std::stable_sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
      if (a.onset_ms != b.onset_ms) return a.onset_ms < b.onset_ms;
      return a.pitch < b.pitch;
    });

    auto parsed = parse_smf(write_smf(notes, ppq)).notes;
    if (parsed.size() != notes.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < notes.size(); ++i) {
      bool ok = parsed[i].pitch == notes[i].pitch && parsed[i].velocity == notes[i].velocity &&
                parsed[i].pedal_on == notes[i].pedal_on &&
                std::abs(parsed[i].onset_ms - notes[i].onset_ms) <= half_tick + 1e-9 &&
                std::abs(parsed[i].duration_ms - notes[i].duration_ms) <= 2 * half_tick + 1e-9;
      if (!ok) ++mismatches;
    }
  }
  check.expect(mismatches == 0,
               "round-trip mismatches in randomized note lists: " + std::to_string(mismatches));
}

// ---------------------------------------------------------------------------
// criterion 4: gradient correctness
// ---------------------------------------------------------------------------

void criterion_gradient_check(Checker& check) {
  auto start = Clock::now();
  auto corpus = planted_corpus(1, 6, 11, PlantedFixture::kSupport);  // 5 prediction steps
  const double h = 1e-5;
  for (int m = 0; m < kNumFields; ++m) {
    ModelParams params = init_params(m, 8, 1000 + m);
    LossAndGradients analytic = loss_and_gradients(params, corpus, true);

    std::vector<std::span<double>> spans, grad_spans;
    params.visit_params([&](std::span<double> s) { spans.push_back(s); });
    analytic.gradients.visit_params([&](std::span<double> s) { grad_spans.push_back(s); });

    double max_rel = 0.0;
    for (std::size_t a = 0; a < spans.size(); ++a) {
      for (std::size_t i = 0; i < spans[a].size(); ++i) {
        double saved = spans[a][i];
        spans[a][i] = saved + h;
        double up = sequence_loss(params, corpus, true);
        spans[a][i] = saved - h;
        double down = sequence_loss(params, corpus, true);
        spans[a][i] = saved;
        double fd = (up - down) / (2.0 * h);
        double rel = std::abs(fd - grad_spans[a][i]) /
                     std::max({std::abs(fd), std::abs(grad_spans[a][i]), 1e-6});
        max_rel = std::max(max_rel, rel);
      }
    }
    check.expect_lt(max_rel, 1e-4,
                    std::string("submodel ") + kFieldNames[m] + ": max relative gradient error");
  }
  check.expect_lt(seconds_since(start), 60.0, "runtime over 1 min");
}

// ---------------------------------------------------------------------------
// criterion 5: chain-rule benefit
// ---------------------------------------------------------------------------

void criterion_chain_rule_benefit(Checker& check) {
  auto start = Clock::now();
  const PlantedFixture& fixture = planted_fixture();
  check.expect_lt(fixture.conditioned_d_loss, 0.01, "conditioned d-model failed to reach plateau");

  JointMeasurement cond = measure_joint(fixture.conditioned, true, 31);
  JointMeasurement ind = measure_joint(fixture.independent, false, 37);
  check.expect(cond.samples == 10000 && ind.samples == 10000, "need 10k pooled samples");
  check.expect_le(cond.joint_tv, 0.05, "conditioned joint TV");
  check.expect_lt(0.2, ind.joint_tv, "independent joint TV must exceed 0.2");
  check.expect_le(ind.n_marginal_tv, 0.05, "independent n marginal TV");
  check.expect_le(ind.d_marginal_tv, 0.05, "independent d marginal TV");

  // Conditioning effectiveness: changing the sampled n moves the d
  // distribution under the conditioned model, and cannot move it at all
  // under the ablation.
  const auto support = planted_n_support(PlantedFixture::kSupport);
  std::mt19937_64 rng(5);
  NoteToken prev = planted_seed_token(rng, PlantedFixture::kSupport);
  GeneratorState gs = zero_generator_state(fixture.conditioned);
  std::vector<int> prefix_a = {support[1], kPlantedT[0]};
  std::vector<int> prefix_b = {support[9], kPlantedT[0]};
  LstmState sa = gs.states[kFieldD], sb = gs.states[kFieldD];
  Eigen::VectorXd da = forward_step(fixture.conditioned[kFieldD], prev, prefix_a, true, sa);
  Eigen::VectorXd db = forward_step(fixture.conditioned[kFieldD], prev, prefix_b, true, sb);
  check.expect_lt(0.01, 0.5 * (da - db).cwiseAbs().sum(),
                  "conditioned d distribution must respond to the sampled n");

  GeneratorState gi = zero_generator_state(fixture.independent);
  LstmState ia = gi.states[kFieldD], ib = gi.states[kFieldD];
  Eigen::VectorXd dia = forward_step(fixture.independent[kFieldD], prev, prefix_a, false, ia);
  Eigen::VectorXd dib = forward_step(fixture.independent[kFieldD], prev, prefix_b, false, ib);
  check.expect((dia - dib).cwiseAbs().maxCoeff() == 0.0,
               "independent d distribution must ignore the sampled n exactly");

  check.expect_lt(seconds_since(start), 600.0, "runtime over 10 min");
}

// ---------------------------------------------------------------------------
// criterion 6: screening discrimination
// ---------------------------------------------------------------------------

void criterion_screening_discrimination(Checker& check) {
  auto start = Clock::now();
  const PlantedFixture& fixture = planted_fixture();
  GroundTruthStats gt = ground_truth_stats(fixture.conditioned, fixture.heldout, 16);

  int injected_higher = 0;
  int injected_picked = 0;
  std::mt19937_64 seed_rng(999);
  for (int trial = 0; trial < 20; ++trial) {
    NoteToken start_tok = planted_seed_token(seed_rng, PlantedFixture::kSupport);
    auto rollouts = generate(fixture.conditioned, start_tok, 120, 2, 1.0, 5000 + trial);
    std::mt19937_64 inject_rng(9000 + trial);
    std::vector<NoteToken> injected = rollouts[1].tokens;
    inject_aliens(injected, 12, inject_rng);

    auto clean = teacher_forced_entropies(fixture.conditioned, rollouts[0].tokens);
    auto alien = teacher_forced_entropies(fixture.conditioned, injected);
    double clean_mean = 0.0, alien_mean = 0.0;
    for (int m = 0; m < kNumFields; ++m) {
      for (double e : clean[m]) clean_mean += e;
      for (double e : alien[m]) alien_mean += e;
    }
    clean_mean /= 5.0 * clean[0].size();
    alien_mean /= 5.0 * alien[0].size();
    if (alien_mean > clean_mean) ++injected_higher;

    for (double lambda : {0.0, 0.5}) {
      std::vector<std::array<std::vector<double>, 5>> pool = {clean, alien};
      ScreeningConfig sc{lambda, 16, 1.0};
      if (rank_and_select(pool, gt, sc).winner == 1) ++injected_picked;
    }
  }
  check.expect(injected_higher >= 19,
               "injected sequences higher in only " + std::to_string(injected_higher) + "/20 trials");
  check.expect(injected_picked == 0,
               "rank_and_select picked an injected sequence " + std::to_string(injected_picked) +
                   " time(s)");
  check.expect_lt(seconds_since(start), 300.0, "runtime over 5 min");
}

// ---------------------------------------------------------------------------
// criterion 7: entropy/statistics unit values
// ---------------------------------------------------------------------------

void criterion_entropy_units(Checker& check) {
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(88, 1.0 / 88.0);
  check.expect(std::abs(entropy(uniform) - std::log(88.0)) <= 1e-12,
               "uniform-88 entropy must equal ln 88 within 1e-12");

  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(88);
  onehot[13] = 1.0;
  check.expect(entropy(onehot) == 0.0, "one-hot entropy must be exactly 0");

  std::vector<double> alternating;
  for (int i = 0; i < 8; ++i) alternating.push_back(i % 2 == 0 ? 0.0 : 2.0);
  EntropyStats st = stats(alternating, 2);
  check.expect(st.mean == 1.0, "alternating mean must be exactly 1");
  check.expect(st.variance == 1.0, "alternating variance must be exactly 1");
  check.expect(st.moving_avg_variance == 0.0, "alternating moving-average variance must be exactly 0");
}

// ---------------------------------------------------------------------------
// criterion 8: attention sanity
// ---------------------------------------------------------------------------

void criterion_attention_sanity(Checker& check) {
  auto start = Clock::now();

  // Full-support planted corpus so every column of the current-note n block
  // carries signal; the d-model trains briefly at a lower step size because
  // Adam's noise walk inflates always-hot narrow blocks at ~lr*sqrt(updates).
  auto corpus = planted_corpus(400, 100, 777, 88);
  ModelSet models;
  const int epochs[5] = {4, 2, 4, 2, 2};
  for (int m = 0; m < kNumFields; ++m) {
    TrainConfig cfg;
    cfg.hidden = 32;
    cfg.segment_length = 128;
    cfg.seed = 200 + m;
    cfg.learning_rate = m == kFieldD ? 3e-3 : 5e-3;
    cfg.epochs = epochs[m];
    models[m] = train(corpus, m, cfg).params;
  }
  AttentionMatrix matrix = attention_scores(models);
  const int cur_n_row = kNumFields + kFieldN;
  for (int r = 0; r < kNumInputBlockRows; ++r) {
    if (r == cur_n_row) continue;
    check.expect_lt(matrix.values(r, kFieldD), matrix.values(cur_n_row, kFieldD),
                    std::string("row ") + kInputBlockNames[r] +
                        " not dominated by cur_n in the d column");
  }

  // Untrained weights must show no spurious structure: in at least 18 of 20
  // seeds, no active row of any column exceeds twice the column's mean over
  // its active rows.
  int clean_seeds = 0;
  for (int seed = 0; seed < 20; ++seed) {
    ModelSet random_models;
    for (int m = 0; m < kNumFields; ++m) random_models[m] = init_params(m, 8, 5000 + seed * 7 + m);
    AttentionMatrix random_matrix = attention_scores(random_models);
    bool clean = true;
    for (int m = 0; m < kNumFields; ++m) {
      const int active = kNumFields + m;
      for (int r = 0; r < active; ++r) {
        if (random_matrix.values(r, m) > 2.0 / active) clean = false;
      }
    }
    if (clean) ++clean_seeds;
  }
  check.expect(clean_seeds >= 18, "spurious attention structure in " +
                                      std::to_string(20 - clean_seeds) + "/20 random-weight seeds");
  check.expect_lt(seconds_since(start), 300.0, "runtime over 5 min");
}

// ---------------------------------------------------------------------------
// criterion 9: end-to-end pipeline
// ---------------------------------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  double seconds = 0.0;
};

CommandResult run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  auto start = Clock::now();
  std::string cmd = cli + " " + args + " >>" + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), seconds_since(start)};
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void criterion_pipeline(Checker& check) {
  auto start = Clock::now();
  const char* cli = std::getenv("XMG_CLI");
  if (!cli || !fs::exists(cli)) {
    check.expect(false, "XMG_CLI must point at the CLI binary");
    return;
  }

  fs::path dir = fs::temp_directory_path() / "xmg_acceptance_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path log = dir / "pipeline.log";
  auto step = [&](const std::string& what, const std::string& args) {
    CommandResult r = run_cli(cli, args, log);
    check.expect(r.exit_code == 0, what + " exited with code " + std::to_string(r.exit_code));
    return r;
  };

  std::string midi = (dir / "midi").string();
  std::string tokens = (dir / "tokens").string();
  std::string ckpt = (dir / "ckpt").string();
  std::string gen = (dir / "gen").string();
  std::string codec = (dir / "codec.txt").string();

  step("synth", "synth --language cycle --out " + midi + " --files 8 --notes 640");
  step("calibrate", "calibrate --midi " + midi + " --out " + codec + " --report " + (dir / "report").string());
  {
    std::string files;
    for (int f = 0; f < 8; ++f) {
      char name[32];
      std::snprintf(name, sizeof(name), "/cycle_%03d.mid", f);
      files += " " + midi + name;
    }
    step("encode", "encode --config " + codec + " --out " + tokens + files);
  }
  step("train", "train --tokens " + tokens + " --out " + ckpt +
                    " --hidden 32 --epochs 30 --lr 0.005 --segment 64 --seed 7");

  CommandResult gen_run = step("generate", "generate --checkpoints " + ckpt + " --config " + codec +
                                               " --heldout " + tokens + " --out " + gen +
                                               " --count 50 --length 200 --seed 9");
  check.expect_lt(gen_run.seconds, 60.0, "generate step over its 60 s budget");

  // Training reached the deterministic-cycle target and the smoothed loss
  // curves never rise.
  for (const char* field : {"n", "t", "d", "v", "p"}) {
    fs::path loss_path = fs::path(ckpt) / (std::string("loss_") + field + ".csv");
    check.expect(fs::exists(loss_path), std::string("missing loss CSV for ") + field);
    if (!fs::exists(loss_path)) continue;
    auto curve = read_loss_csv(loss_path);
    check.expect(!curve.empty() && curve.back() < 0.05,
                 std::string("final loss for ") + field + " not below 0.05 nats");
    std::vector<double> smoothed;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      std::size_t lo = i >= 4 ? i - 4 : 0;
      double sum = 0.0;
      for (std::size_t j = lo; j <= i; ++j) sum += curve[j];
      smoothed.push_back(sum / (i - lo + 1));
    }
    for (std::size_t i = 1; i < smoothed.size(); ++i) {
      if (smoothed[i] > smoothed[i - 1] * 1.02 + 1e-6) {
        check.expect(false, std::string("smoothed loss curve rises for ") + field);
        break;
      }
    }
  }

  // The winner decodes to a valid, re-parsable MIDI file.
  std::string winner_bytes = slurp(fs::path(gen) / "winner.mid");
  check.expect(!winner_bytes.empty(), "winner.mid missing or empty");
  if (!winner_bytes.empty()) {
    auto parsed = parse_smf(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(winner_bytes.data()), winner_bytes.size()));
    check.expect(parsed.notes.size() == 200, "winner.mid must decode back to 200 notes");
  }
  check.expect(fs::exists(fs::path(gen) / "scored.csv"), "scored.csv missing");
  check.expect(fs::exists(fs::path(gen) / "candidate_049.csv"), "candidate token CSVs missing");
  check.expect(fs::exists(fs::path(ckpt) / "attention.svg"), "attention SVG missing");

  // Rerunning generation with the same seed reproduces the scored table
  // byte for byte.
  step("generate (rerun)", "generate --checkpoints " + ckpt + " --config " + codec + " --heldout " +
                               tokens + " --out " + (dir / "gen2").string() +
                               " --count 50 --length 200 --seed 9");
  check.expect(slurp(fs::path(gen) / "scored.csv") == slurp(dir / "gen2" / "scored.csv"),
               "generation is not deterministic under a fixed seed");

  check.expect_lt(seconds_since(start), 300.0, "pipeline over 5 min");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*run)(Checker&);
  };
  const Criterion criteria[] = {
      {"codec conformance (class counts, fixed point, value bound)", criterion_codec_conformance},
      {"calibration balance (100k log-normal, K=105)", criterion_calibration_balance},
      {"SMF round trip (1k randomized lists + reference bytes)", criterion_smf_round_trip},
      {"gradient correctness (finite differences, H=8, all submodels)", criterion_gradient_check},
      {"chain-rule benefit (planted coupling, conditioned vs independent)",
       criterion_chain_rule_benefit},
      {"screening discrimination (alien injection, 20 trials)", criterion_screening_discrimination},
      {"entropy/statistics unit values", criterion_entropy_units},
      {"attention sanity (planted dominance, random-weight null)", criterion_attention_sanity},
      {"end-to-end pipeline (calibrate...decode under 5 min)", criterion_pipeline},
  };

  int failed = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    Checker check;
    auto start = Clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    double elapsed = seconds_since(start);
    if (check.failures.empty()) {
      std::printf("[PASS] criterion %d: %s (%.1fs)\n", index, criterion.name, elapsed);
    } else {
      ++failed;
      std::printf("[FAIL] criterion %d: %s (%.1fs)\n", index, criterion.name, elapsed);
      for (const auto& f : check.failures) std::printf("       - %s\n", f.c_str());
    }
    std::fflush(stdout);
  }
  if (failed == 0) {
    std::printf("all %d acceptance criteria passed\n", index);
  } else {
    std::printf("%d of %d acceptance criteria FAILED\n", failed, index);
  }
  return failed;
}
