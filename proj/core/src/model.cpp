#include "xmg/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace xmg {

namespace {

void check_finite(const ModelParams& p) {
  bool ok = true;
  p.visit_params([&](std::span<const double> s) {
    for (double v : s) {
      if (!std::isfinite(v)) ok = false;
    }
  });
  if (!ok) throw ValidationError("ModelParams: non-finite parameter value");
}

// Advances one LSTM layer in place and returns nothing; gate order i,f,g,o.
void lstm_cell(const Eigen::VectorXd& preact, Eigen::VectorXd& h, Eigen::VectorXd& c, int hidden) {
  for (int j = 0; j < hidden; ++j) {
    double i = 1.0 / (1.0 + std::exp(-preact[j]));
    double f = 1.0 / (1.0 + std::exp(-preact[hidden + j]));
    double g = std::tanh(preact[2 * hidden + j]);
    double o = 1.0 / (1.0 + std::exp(-preact[3 * hidden + j]));
    c[j] = f * c[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

}  // namespace

void ModelParams::validate() const {
  if (submodel < 0 || submodel >= kNumFields) throw ValidationError("ModelParams: bad submodel id");
  if (hidden <= 0) throw ValidationError("ModelParams: hidden size must be positive");
  const int in = FieldLayout::input_dim(submodel);
  const int classes = FieldLayout::output_classes(submodel);
  auto expect = [&](bool cond, const char* what) {
    if (!cond) throw ValidationError(std::string("ModelParams: shape mismatch in ") + what);
  };
  expect(layers[0].w_input.rows() == 4 * hidden && layers[0].w_input.cols() == in, "layer1 w_input");
  expect(layers[1].w_input.rows() == 4 * hidden && layers[1].w_input.cols() == hidden, "layer2 w_input");
  for (const auto& layer : layers) {
    expect(layer.w_recurrent.rows() == 4 * hidden && layer.w_recurrent.cols() == hidden, "w_recurrent");
    expect(layer.bias.size() == 4 * hidden, "bias");
  }
  expect(w_output.rows() == classes && w_output.cols() == hidden, "w_output");
  expect(b_output.size() == classes, "b_output");
  check_finite(*this);
}

std::size_t ModelParams::param_count() const {
  std::size_t n = 0;
  visit_params([&](std::span<const double> s) { n += s.size(); });
  return n;
}

ModelParams init_params(int submodel, int hidden, std::uint64_t seed) {
  if (submodel < 0 || submodel >= kNumFields) throw ValidationError("init_params: bad submodel id");
  if (hidden <= 0) throw ValidationError("init_params: hidden size must be positive");
  ModelParams p;
  p.submodel = submodel;
  p.hidden = hidden;
  const int in = FieldLayout::input_dim(submodel);
  const int classes = FieldLayout::output_classes(submodel);
  p.layers[0].w_input.resize(4 * hidden, in);
  p.layers[1].w_input.resize(4 * hidden, hidden);
  for (auto& layer : p.layers) {
    layer.w_recurrent.resize(4 * hidden, hidden);
    layer.bias.resize(4 * hidden);
  }
  p.w_output.resize(classes, hidden);
  p.b_output.resize(classes);

  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.visit_params([&](std::span<double> s) {
    for (double& v : s) v = (2.0 * uniform01(rng) - 1.0) * scale;
  });
  for (auto& layer : p.layers) {
    layer.bias.segment(hidden, hidden).array() += 1.0;  // forget-gate bias
  }
  return p;
}

LstmState zero_state(int hidden) {
  LstmState s;
  s.h1 = Eigen::VectorXd::Zero(hidden);
  s.c1 = Eigen::VectorXd::Zero(hidden);
  s.h2 = Eigen::VectorXd::Zero(hidden);
  s.c2 = Eigen::VectorXd::Zero(hidden);
  return s;
}

std::vector<int> hot_indices(int submodel, const NoteToken& prev, std::span<const int> cur_prefix,
                             bool conditioned) {
  validate_token(prev);
  if (conditioned && static_cast<int>(cur_prefix.size()) != submodel) {
    throw ValidationError("hot_indices: prefix must hold exactly the fields before the submodel's");
  }
  std::vector<int> hot;
  hot.reserve(kNumFields + cur_prefix.size());
  for (int f = 0; f < kNumFields; ++f) hot.push_back(FieldLayout::prev_offset(f) + prev.field(f));
  if (conditioned) {
    for (int f = 0; f < submodel; ++f) {
      if (cur_prefix[f] < 0 || cur_prefix[f] >= kFieldClasses[f]) {
        throw ValidationError("hot_indices: prefix class out of range");
      }
      hot.push_back(FieldLayout::cur_offset(f) + cur_prefix[f]);
    }
  }
  return hot;
}

Eigen::VectorXd forward_logits(const ModelParams& params, const NoteToken& prev,
                               std::span<const int> cur_prefix, bool conditioned, LstmState& state) {
  const int hidden = params.hidden;
  if (state.h1.size() != hidden) throw ValidationError("forward_logits: state size mismatch");

  // The input is a concatenation of one-hots, so W_x * x reduces to a sum of
  // selected columns.
  Eigen::VectorXd pre1 = params.layers[0].bias;
  for (int idx : hot_indices(params.submodel, prev, cur_prefix, conditioned)) {
    pre1 += params.layers[0].w_input.col(idx);
  }
  pre1.noalias() += params.layers[0].w_recurrent * state.h1;
  lstm_cell(pre1, state.h1, state.c1, hidden);

  Eigen::VectorXd pre2 = params.layers[1].bias;
  pre2.noalias() += params.layers[1].w_input * state.h1;
  pre2.noalias() += params.layers[1].w_recurrent * state.h2;
  lstm_cell(pre2, state.h2, state.c2, hidden);

  Eigen::VectorXd logits = params.b_output;
  logits.noalias() += params.w_output * state.h2;
  return logits;
}

Eigen::VectorXd forward_step(const ModelParams& params, const NoteToken& prev,
                             std::span<const int> cur_prefix, bool conditioned, LstmState& state) {
  return softmax(forward_logits(params, prev, cur_prefix, conditioned, state));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("softmax: temperature must be positive");
  Eigen::VectorXd scaled = logits / temperature;
  double max = scaled.maxCoeff();
  Eigen::VectorXd p = (scaled.array() - max).exp();
  return p / p.sum();
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_class(const Eigen::VectorXd& dist, std::mt19937_64& rng) {
  double u = uniform01(rng);
  double cum = 0.0;
  for (int k = 0; k + 1 < dist.size(); ++k) {
    cum += dist[k];
    if (u < cum) return k;
  }
  return static_cast<int>(dist.size()) - 1;
}

GeneratorState zero_generator_state(const ModelSet& models) {
  GeneratorState gs;
  for (int m = 0; m < kNumFields; ++m) gs.states[m] = zero_state(models[m].hidden);
  return gs;
}

namespace {

SampleResult sample_impl(const ModelSet& models, GeneratorState& state, const NoteToken& prev,
                         double temperature, std::mt19937_64& rng, bool conditioned) {
  if (!(temperature > 0.0)) throw ValidationError("sample_note: temperature must be positive");
  SampleResult result;
  std::vector<int> prefix;
  for (int m = 0; m < kNumFields; ++m) {
    if (models[m].submodel != m) throw ValidationError("sample_note: models out of order");
    Eigen::VectorXd logits = forward_logits(models[m], prev, prefix, conditioned, state.states[m]);
    result.dists[m] = softmax(logits, temperature);
    int cls = sample_class(result.dists[m], rng);
    result.token.set_field(m, cls);
    prefix.push_back(cls);
  }
  return result;
}

}  // namespace

SampleResult sample_note(const ModelSet& models, GeneratorState& state, const NoteToken& prev,
                         double temperature, std::mt19937_64& rng) {
  return sample_impl(models, state, prev, temperature, rng, true);
}

SampleResult sample_note_independent(const ModelSet& models, GeneratorState& state,
                                     const NoteToken& prev, double temperature, std::mt19937_64& rng) {
  return sample_impl(models, state, prev, temperature, rng, false);
}

double token_log_prob(const ModelSet& models, GeneratorState state, const NoteToken& prev,
                      const NoteToken& token, double temperature) {
  validate_token(token);
  double log_prob = 0.0;
  std::vector<int> prefix;
  for (int m = 0; m < kNumFields; ++m) {
    Eigen::VectorXd logits = forward_logits(models[m], prev, prefix, true, state.states[m]);
    Eigen::VectorXd dist = softmax(logits, temperature);
    log_prob += std::log(dist[token.field(m)]);
    prefix.push_back(token.field(m));
  }
  return log_prob;
}

namespace {

double dist_entropy(const Eigen::VectorXd& dist) {
  double h = 0.0;
  for (int k = 0; k < dist.size(); ++k) {
    if (dist[k] > 0.0) h -= dist[k] * std::log(dist[k]);
  }
  return h;
}

}  // namespace

std::array<std::vector<double>, 5> teacher_forced_entropies(const ModelSet& models,
                                                            std::span<const NoteToken> sequence) {
  if (sequence.size() < 2) {
    throw ValidationError("teacher_forced_entropies: sequence needs at least 2 notes");
  }
  GeneratorState state = zero_generator_state(models);
  std::array<std::vector<double>, 5> out;
  for (auto& v : out) v.reserve(sequence.size() - 1);
  std::vector<int> prefix;
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    const NoteToken& prev = sequence[i - 1];
    const NoteToken& cur = sequence[i];
    prefix.clear();
    for (int m = 0; m < kNumFields; ++m) {
      Eigen::VectorXd dist = forward_step(models[m], prev, prefix, true, state.states[m]);
      out[m].push_back(dist_entropy(dist));
      prefix.push_back(cur.field(m));
    }
  }
  return out;
}

namespace {

std::vector<Candidate> generate_impl(const ModelSet& models, const NoteToken& seed, int length,
                                     int count, double temperature, std::uint64_t rng_seed,
                                     bool conditioned) {
  if (length < 1) throw ValidationError("generate: length must be at least 1");
  if (count < 1) throw ValidationError("generate: count must be at least 1");
  validate_token(seed);

  std::vector<Candidate> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    std::seed_seq seq{rng_seed, static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    GeneratorState state = zero_generator_state(models);
    Candidate cand;
    cand.tokens.reserve(length);
    for (auto& e : cand.entropies) e.reserve(length);
    NoteToken prev = seed;
    for (int i = 0; i < length; ++i) {
      SampleResult step = conditioned ? sample_note(models, state, prev, temperature, rng)
                                      : sample_note_independent(models, state, prev, temperature, rng);
      cand.tokens.push_back(step.token);
      for (int m = 0; m < kNumFields; ++m) cand.entropies[m].push_back(dist_entropy(step.dists[m]));
      prev = step.token;
    }
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace

std::vector<Candidate> generate(const ModelSet& models, const NoteToken& seed, int length, int count,
                                double temperature, std::uint64_t rng_seed) {
  return generate_impl(models, seed, length, count, temperature, rng_seed, true);
}

std::vector<Candidate> generate_independent(const ModelSet& models, const NoteToken& seed, int length,
                                            int count, double temperature, std::uint64_t rng_seed) {
  return generate_impl(models, seed, length, count, temperature, rng_seed, false);
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'X', 'M', 'G', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(v >> (8 * i));
  os.write(buf, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw ParseError("checkpoint truncated", static_cast<std::size_t>(is.tellg()));
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = v << 8 | buf[i];
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(params.submodel));
  put_u32(os, 2);  // layers
  put_u32(os, static_cast<std::uint32_t>(params.hidden));
  put_u32(os, static_cast<std::uint32_t>(params.input_dim()));
  put_u32(os, static_cast<std::uint32_t>(params.output_classes()));
  for (int f = 0; f < kNumFields; ++f) put_u32(os, static_cast<std::uint32_t>(kFieldClasses[f]));
  params.visit_params([&](std::span<const double> s) {
    for (double v : s) {
      float f = static_cast<float>(v);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(os, bits);
    }
  });
  if (!os) throw Error("failed writing " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("bad checkpoint magic", 0);
  std::uint32_t submodel = get_u32(is);
  std::uint32_t layers = get_u32(is);
  std::uint32_t hidden = get_u32(is);
  std::uint32_t input_dim = get_u32(is);
  std::uint32_t classes = get_u32(is);
  if (submodel >= kNumFields) throw ParseError("checkpoint submodel id out of range", 4);
  if (layers != 2) throw ParseError("checkpoint must have 2 layers", 8);
  for (int f = 0; f < kNumFields; ++f) {
    if (get_u32(is) != static_cast<std::uint32_t>(kFieldClasses[f])) {
      throw ParseError("checkpoint class counts do not match layout", 20);
    }
  }
  if (input_dim != static_cast<std::uint32_t>(FieldLayout::input_dim(static_cast<int>(submodel))) ||
      classes != static_cast<std::uint32_t>(FieldLayout::output_classes(static_cast<int>(submodel)))) {
    throw ParseError("checkpoint dims do not match layout", 12);
  }

  ModelParams p = init_params(static_cast<int>(submodel), static_cast<int>(hidden), 0);
  p.visit_params([&](std::span<double> s) {
    for (double& v : s) {
      std::uint32_t bits = get_u32(is);
      float f;
      std::memcpy(&f, &bits, 4);
      v = static_cast<double>(f);
    }
  });
  is.peek();
  if (!is.eof()) throw ParseError("trailing bytes after checkpoint payload", static_cast<std::size_t>(is.tellg()));
  p.validate();
  return p;
}

}  // namespace xmg
