#include "xmg/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace xmg {

namespace {

constexpr const char* kParamArrayNames[] = {
    "layer1.w_input", "layer1.w_recurrent", "layer1.bias",
    "layer2.w_input", "layer2.w_recurrent", "layer2.bias",
    "w_output",       "b_output",
};

std::vector<std::span<double>> param_spans(ModelParams& p) {
  std::vector<std::span<double>> spans;
  p.visit_params([&](std::span<double> s) { spans.push_back(s); });
  return spans;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  z.visit_params([](std::span<double> s) {
    for (double& v : s) v = 0.0;
  });
  return z;
}

double global_norm(ModelParams& grads) {
  double sum = 0.0;
  grads.visit_params([&](std::span<double> s) {
    for (double v : s) sum += v * v;
  });
  return std::sqrt(sum);
}

std::string grad_norm_report(ModelParams& grads) {
  std::ostringstream os;
  int idx = 0;
  grads.visit_params([&](std::span<double> s) {
    double sum = 0.0;
    for (double v : s) sum += v * v;
    os << (idx ? ", " : "") << kParamArrayNames[idx] << "=" << std::sqrt(sum);
    ++idx;
  });
  return os.str();
}

// Per-step forward cache for backpropagation. Gates are stored
// post-activation in i,f,g,o order.
struct LayerCache {
  Eigen::VectorXd gates;   // 4H
  Eigen::VectorXd c_prev;  // H
  Eigen::VectorXd tanh_c;  // H
  Eigen::VectorXd h_prev;  // H
};

struct StepCache {
  std::vector<int> hot;
  LayerCache layer[2];
  Eigen::VectorXd x2;     // layer-2 input (layer-1 output at this step)
  Eigen::VectorXd probs;  // softmax over classes
  int target = 0;
};

void forward_layer(const LstmLayer& layer, const Eigen::VectorXd& preact_in, Eigen::VectorXd& h,
                   Eigen::VectorXd& c, LayerCache& cache, int hidden) {
  cache.h_prev = h;
  cache.c_prev = c;
  Eigen::VectorXd pre = preact_in;
  pre.noalias() += layer.w_recurrent * h;
  cache.gates.resize(4 * hidden);
  for (int j = 0; j < hidden; ++j) {
    double i = 1.0 / (1.0 + std::exp(-pre[j]));
    double f = 1.0 / (1.0 + std::exp(-pre[hidden + j]));
    double g = std::tanh(pre[2 * hidden + j]);
    double o = 1.0 / (1.0 + std::exp(-pre[3 * hidden + j]));
    cache.gates[j] = i;
    cache.gates[hidden + j] = f;
    cache.gates[2 * hidden + j] = g;
    cache.gates[3 * hidden + j] = o;
    c[j] = f * c[j] + i * g;
  }
  cache.tanh_c = c.array().tanh();
  for (int j = 0; j < hidden; ++j) h[j] = cache.gates[3 * hidden + j] * cache.tanh_c[j];
}

// One teacher-forced step; returns its cross-entropy in nats.
double forward_cached(const ModelParams& params, const NoteToken& prev, const NoteToken& cur,
                      bool conditioned, LstmState& state, StepCache& cache) {
  const int hidden = params.hidden;
  const int m = params.submodel;

  std::vector<int> prefix;
  for (int f = 0; f < m; ++f) prefix.push_back(cur.field(f));
  cache.hot = hot_indices(m, prev, prefix, conditioned);

  Eigen::VectorXd pre1 = params.layers[0].bias;
  for (int idx : cache.hot) pre1 += params.layers[0].w_input.col(idx);
  forward_layer(params.layers[0], pre1, state.h1, state.c1, cache.layer[0], hidden);
  cache.x2 = state.h1;

  Eigen::VectorXd pre2 = params.layers[1].bias;
  pre2.noalias() += params.layers[1].w_input * cache.x2;
  forward_layer(params.layers[1], pre2, state.h2, state.c2, cache.layer[1], hidden);

  Eigen::VectorXd logits = params.b_output;
  logits.noalias() += params.w_output * state.h2;
  double max = logits.maxCoeff();
  Eigen::VectorXd shifted = (logits.array() - max).exp();
  double z = shifted.sum();
  cache.probs = shifted / z;
  cache.target = cur.field(m);
  return std::log(z) + max - logits[cache.target];
}

// Backward through one LSTM layer step. dh/dc carry the incoming derivatives
// and leave with the derivatives w.r.t. the previous step's h/c; the caller
// turns the returned pre-activation gradient into the w_input contribution.
Eigen::VectorXd backward_layer(const LstmLayer& layer, const LayerCache& cache, Eigen::VectorXd& dh,
                               Eigen::VectorXd& dc, LstmLayer& grad, int hidden) {
  Eigen::VectorXd dz(4 * hidden);
  for (int j = 0; j < hidden; ++j) {
    double i = cache.gates[j];
    double f = cache.gates[hidden + j];
    double g = cache.gates[2 * hidden + j];
    double o = cache.gates[3 * hidden + j];
    double tc = cache.tanh_c[j];
    double dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
    dz[j] = (dcj * g) * i * (1.0 - i);
    dz[hidden + j] = (dcj * cache.c_prev[j]) * f * (1.0 - f);
    dz[2 * hidden + j] = (dcj * i) * (1.0 - g * g);
    dz[3 * hidden + j] = (dh[j] * tc) * o * (1.0 - o);
    dc[j] = dcj * f;
  }
  grad.w_recurrent.noalias() += dz * cache.h_prev.transpose();
  grad.bias += dz;
  dh.noalias() = layer.w_recurrent.transpose() * dz;
  return dz;
}

struct SegmentResult {
  double loss_sum = 0.0;  // summed cross-entropy over the segment
  int steps = 0;
};

// Forward + backward over sequence steps [first, first+count); prediction
// step i consumes sequence[i] and targets sequence[i+1]. Gradients of the
// summed cross-entropy are accumulated into `grads`; `state` carries values
// (not derivatives) across segment boundaries.
SegmentResult segment_backward(const ModelParams& params, const std::vector<NoteToken>& sequence,
                               std::size_t first, std::size_t count, bool conditioned,
                               LstmState& state, ModelParams& grads,
                               std::vector<StepCache>& caches) {
  const int hidden = params.hidden;
  SegmentResult result;
  if (caches.size() < count) caches.resize(count);

  for (std::size_t s = 0; s < count; ++s) {
    result.loss_sum +=
        forward_cached(params, sequence[first + s], sequence[first + s + 1], conditioned, state, caches[s]);
    ++result.steps;
  }

  Eigen::VectorXd dh2 = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd dc2 = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd dh1 = Eigen::VectorXd::Zero(hidden);
  Eigen::VectorXd dc1 = Eigen::VectorXd::Zero(hidden);

  for (std::size_t s = count; s-- > 0;) {
    const StepCache& cache = caches[s];
    Eigen::VectorXd dlogits = cache.probs;
    dlogits[cache.target] -= 1.0;

    // h2 after this step is o2 * tanh(c2); its value is cache-derivable from
    // layer 2's gates and tanh_c.
    const LayerCache& l2 = cache.layer[1];
    Eigen::VectorXd h2(hidden);
    for (int j = 0; j < hidden; ++j) h2[j] = l2.gates[3 * hidden + j] * l2.tanh_c[j];
    grads.w_output.noalias() += dlogits * h2.transpose();
    grads.b_output += dlogits;
    dh2.noalias() += params.w_output.transpose() * dlogits;

    Eigen::VectorXd dz2 = backward_layer(params.layers[1], l2, dh2, dc2, grads.layers[1], hidden);
    grads.layers[1].w_input.noalias() += dz2 * cache.x2.transpose();
    dh1.noalias() += params.layers[1].w_input.transpose() * dz2;

    Eigen::VectorXd dz1 =
        backward_layer(params.layers[0], cache.layer[0], dh1, dc1, grads.layers[0], hidden);
    for (int idx : cache.hot) grads.layers[0].w_input.col(idx) += dz1;
  }
  return result;
}

void validate_corpus(const std::vector<std::vector<NoteToken>>& corpus) {
  if (corpus.empty()) throw ValidationError("train: corpus is empty");
  for (const auto& seq : corpus) {
    if (seq.size() < 2) {
      throw ValidationError("train: sequences need at least 2 notes (no prediction target otherwise)");
    }
    for (const auto& tok : seq) validate_token(tok);
  }
}

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
};

void adam_step(ModelParams& params, ModelParams& grads, AdamState& adam, double lr) {
  ++adam.t;
  const double b1 = TrainConfig::kBeta1, b2 = TrainConfig::kBeta2, eps = TrainConfig::kEpsilon;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
  auto ps = param_spans(params);
  auto gs = param_spans(grads);
  std::size_t offset = 0;
  for (std::size_t a = 0; a < ps.size(); ++a) {
    for (std::size_t i = 0; i < ps[a].size(); ++i) {
      double g = gs[a][i];
      double& m = adam.m[static_cast<Eigen::Index>(offset + i)];
      double& v = adam.v[static_cast<Eigen::Index>(offset + i)];
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      ps[a][i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    }
    offset += ps[a].size();
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (hidden < 1) throw ValidationError("TrainConfig: hidden must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning rate must be positive");
  if (epochs < 1) throw ValidationError("TrainConfig: epochs must be at least 1");
  if (segment_length < 1) throw ValidationError("TrainConfig: segment length must be at least 1");
  if (!(clip_norm > 0.0)) throw ValidationError("TrainConfig: clip norm must be positive");
}

TrainResult train(const std::vector<std::vector<NoteToken>>& corpus, int submodel,
                  const TrainConfig& config, const ModelParams* initial) {
  config.validate();
  validate_corpus(corpus);
  if (submodel < 0 || submodel >= kNumFields) throw ValidationError("train: bad submodel id");

  TrainResult result;
  if (initial) {
    initial->validate();
    if (initial->submodel != submodel) {
      throw ValidationError("train: initial checkpoint belongs to a different submodel");
    }
    result.params = *initial;
  } else {
    result.params = init_params(submodel, config.hidden, config.seed);
  }

  ModelParams grads = zeros_like(result.params);
  AdamState adam;
  adam.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(result.params.param_count()));
  adam.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(result.params.param_count()));

  std::vector<StepCache> caches;
  const std::size_t seg = static_cast<std::size_t>(config.segment_length);
  long global_step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    long epoch_steps = 0;
    for (const auto& sequence : corpus) {
      LstmState state = zero_state(result.params.hidden);
      const std::size_t total = sequence.size() - 1;
      for (std::size_t first = 0; first < total; first += seg) {
        const std::size_t count = std::min(seg, total - first);
        grads.visit_params([](std::span<double> s) {
          for (double& v : s) v = 0.0;
        });
        SegmentResult sr = segment_backward(result.params, sequence, first, count, config.conditioned,
                                            state, grads, caches);
        ++global_step;
        if (!std::isfinite(sr.loss_sum)) {
          throw NumericError("train: non-finite loss at step " + std::to_string(global_step) +
                             "; gradient norms: " + grad_norm_report(grads));
        }
        // Mean loss over the segment.
        grads.visit_params([&](std::span<double> s) {
          for (double& v : s) v /= static_cast<double>(count);
        });
        double norm = global_norm(grads);
        if (!std::isfinite(norm)) {
          throw NumericError("train: non-finite gradient at step " + std::to_string(global_step) +
                             "; gradient norms: " + grad_norm_report(grads));
        }
        if (norm > config.clip_norm) {
          double scale = config.clip_norm / norm;
          grads.visit_params([&](std::span<double> s) {
            for (double& v : s) v *= scale;
          });
        }
        adam_step(result.params, grads, adam, config.learning_rate);
        epoch_loss += sr.loss_sum;
        epoch_steps += sr.steps;
      }
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(epoch_steps));
  }
  return result;
}

double sequence_loss(const ModelParams& params, const std::vector<std::vector<NoteToken>>& corpus,
                     bool conditioned) {
  validate_corpus(corpus);
  double sum = 0.0;
  long steps = 0;
  StepCache cache;
  for (const auto& sequence : corpus) {
    LstmState state = zero_state(params.hidden);
    for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
      sum += forward_cached(params, sequence[i], sequence[i + 1], conditioned, state, cache);
      ++steps;
    }
  }
  return sum / static_cast<double>(steps);
}

LossAndGradients loss_and_gradients(const ModelParams& params,
                                    const std::vector<std::vector<NoteToken>>& corpus,
                                    bool conditioned) {
  validate_corpus(corpus);
  LossAndGradients out;
  out.gradients = zeros_like(params);
  long steps = 0;
  std::vector<StepCache> caches;
  for (const auto& sequence : corpus) {
    LstmState state = zero_state(params.hidden);
    SegmentResult sr = segment_backward(params, sequence, 0, sequence.size() - 1, conditioned, state,
                                        out.gradients, caches);
    out.loss += sr.loss_sum;
    steps += sr.steps;
  }
  out.loss /= static_cast<double>(steps);
  out.gradients.visit_params([&](std::span<double> s) {
    for (double& v : s) v /= static_cast<double>(steps);
  });
  return out;
}

void write_loss_csv(const std::vector<double>& curve, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "epoch,loss\n";
  os.precision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) os << i + 1 << ',' << curve[i] << '\n';
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<double> read_loss_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "epoch,loss") {
    throw ParseError("loss CSV must start with header 'epoch,loss'", 1);
  }
  std::vector<double> curve;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("loss row needs 'epoch,loss'", line_no);
    curve.push_back(std::stod(line.substr(comma + 1)));
  }
  return curve;
}

}  // namespace xmg
