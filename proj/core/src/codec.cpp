#include "xmg/codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

namespace xmg {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + std::string(s) + "'", line_no);
  }
  return v;
}

// Median of the sorted slice [first, last).
double median_of(std::span<const double> sorted, std::size_t first, std::size_t last) {
  std::size_t n = last - first;
  if (n == 0) throw ValidationError("median of empty class");
  if (n % 2 == 1) return sorted[first + n / 2];
  return 0.5 * (sorted[first + n / 2 - 1] + sorted[first + n / 2]);
}

struct CutResult {
  std::vector<double> boundaries;
  std::vector<std::size_t> cut_counts;  // cumulative value count below each boundary
};

// Chooses group_count-1 cuts between distinct values of `sorted` so the
// cumulative count below cut g approximates targets[g]. Cuts are forced
// strictly increasing in distinct-value index so boundaries stay strictly
// ascending even with heavy ties.
CutResult cut_equal_frequency(std::span<const double> sorted, std::span<const double> targets,
                              std::string_view field_name) {
  std::vector<double> distinct;
  std::vector<std::size_t> cum;  // count of values <= distinct[j]
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (distinct.empty() || sorted[i] != distinct.back()) {
      distinct.push_back(sorted[i]);
      cum.push_back(i + 1);
    } else {
      cum.back() = i + 1;
    }
  }
  const std::size_t groups = targets.size() + 1;
  if (distinct.size() < groups) {
    throw ValidationError("calibrate: field '" + std::string(field_name) + "' has " +
                          std::to_string(distinct.size()) + " distinct values but needs at least " +
                          std::to_string(groups));
  }

  CutResult out;
  std::size_t j = 0;  // candidate cut after distinct[j]
  for (std::size_t g = 0; g < targets.size(); ++g) {
    const std::size_t max_j = distinct.size() - 1 - (targets.size() - 1 - g) - 1;
    std::size_t best = j;
    double best_err = std::abs(static_cast<double>(cum[j]) - targets[g]);
    for (std::size_t k = j + 1; k <= max_j; ++k) {
      double err = std::abs(static_cast<double>(cum[k]) - targets[g]);
      if (err < best_err) {
        best = k;
        best_err = err;
      }
      if (static_cast<double>(cum[k]) > targets[g] && err > best_err) break;
    }
    out.boundaries.push_back(0.5 * (distinct[best] + distinct[best + 1]));
    out.cut_counts.push_back(cum[best]);
    j = best + 1;
  }
  return out;
}

BinSpec calibrate_nonnegative(std::span<const double> sorted, int class_count,
                              std::string_view field_name) {
  const double n = static_cast<double>(sorted.size());
  std::vector<double> targets;
  for (int k = 1; k < class_count; ++k) targets.push_back(n * k / class_count);
  CutResult cuts = cut_equal_frequency(sorted, targets, field_name);

  BinSpec spec;
  spec.domain = DomainKind::Nonnegative;
  spec.boundaries = cuts.boundaries;
  std::size_t lo = 0;
  for (int k = 0; k < class_count; ++k) {
    std::size_t hi = k + 1 < class_count ? cuts.cut_counts[k] : sorted.size();
    spec.representatives.push_back(median_of(sorted, lo, hi));
    lo = hi;
  }
  return spec;
}

// Signed calibration runs on |values| with one zero class plus
// (class_count-1)/2 mirrored positive classes. Cumulative targets put ~N/K
// mass in the zero class and ~2N/K in each |value| group, so the signed
// classes come out balanced when the data is roughly sign-symmetric.
BinSpec calibrate_signed(std::span<const double> values, int class_count,
                         std::string_view field_name) {
  if (class_count % 2 == 0) {
    throw ValidationError("calibrate: signed domain requires an odd class count, got " +
                          std::to_string(class_count));
  }
  const int positive_classes = (class_count - 1) / 2;
  std::vector<double> magnitudes(values.begin(), values.end());
  for (double& v : magnitudes) v = std::abs(v);
  std::sort(magnitudes.begin(), magnitudes.end());

  const double n = static_cast<double>(magnitudes.size());
  std::vector<double> targets;
  for (int j = 1; j <= positive_classes; ++j) {
    targets.push_back(n * (2.0 * j - 1.0) / class_count);
  }
  CutResult cuts = cut_equal_frequency(magnitudes, targets, field_name);

  BinSpec spec;
  spec.domain = DomainKind::Signed;
  for (int j = positive_classes - 1; j >= 0; --j) spec.boundaries.push_back(-cuts.boundaries[j]);
  for (int j = 0; j < positive_classes; ++j) spec.boundaries.push_back(cuts.boundaries[j]);

  std::vector<double> positive_reps;
  std::size_t lo = cuts.cut_counts[0];
  for (int j = 0; j < positive_classes; ++j) {
    std::size_t hi = j + 1 < positive_classes ? cuts.cut_counts[j + 1] : magnitudes.size();
    positive_reps.push_back(median_of(magnitudes, lo, hi));
    lo = hi;
  }
  for (int j = positive_classes - 1; j >= 0; --j) spec.representatives.push_back(-positive_reps[j]);
  spec.representatives.push_back(0.0);  // zero-straddling class
  for (int j = 0; j < positive_classes; ++j) spec.representatives.push_back(positive_reps[j]);
  return spec;
}

}  // namespace

void BinSpec::validate(std::string_view name) const {
  const int k = class_count();
  if (k < 2) throw ValidationError(std::string(name) + ": needs at least 2 classes");
  if (static_cast<int>(boundaries.size()) != k - 1) {
    throw ValidationError(std::string(name) + ": boundary count must be class count - 1");
  }
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (!std::isfinite(boundaries[i])) throw ValidationError(std::string(name) + ": non-finite boundary");
    if (i > 0 && boundaries[i] <= boundaries[i - 1]) {
      throw ValidationError(std::string(name) + ": boundaries must be strictly ascending");
    }
  }
  for (int c = 0; c < k; ++c) {
    double lo = c == 0 ? -std::numeric_limits<double>::infinity() : boundaries[c - 1];
    double hi = c == k - 1 ? std::numeric_limits<double>::infinity() : boundaries[c];
    if (!std::isfinite(representatives[c]) || representatives[c] < lo || representatives[c] >= hi) {
      throw ValidationError(std::string(name) + ": representative of class " + std::to_string(c) +
                            " lies outside its interval");
    }
  }
  if (domain == DomainKind::Signed) {
    if (k % 2 == 0) throw ValidationError(std::string(name) + ": signed spec needs odd class count");
    const int half = (k - 1) / 2;
    for (int j = 0; j < half; ++j) {
      double neg = boundaries[half - 1 - j];
      double pos = boundaries[half + j];
      if (std::abs(neg + pos) > 1e-9 * std::max(1.0, std::abs(pos))) {
        throw ValidationError(std::string(name) + ": signed boundaries not symmetric about 0");
      }
    }
    if (representatives[half] != 0.0) {
      throw ValidationError(std::string(name) + ": zero-class representative must be 0");
    }
  }
}

void CodecConfig::validate() const {
  time_shift.validate("time_shift");
  duration.validate("duration");
  velocity_change.validate("velocity_change");
  if (time_shift.class_count() != kFieldClasses[kFieldT]) {
    throw ValidationError("CodecConfig: time_shift must have 105 classes");
  }
  if (duration.class_count() != kFieldClasses[kFieldD]) {
    throw ValidationError("CodecConfig: duration must have 120 classes");
  }
  if (velocity_change.class_count() != kFieldClasses[kFieldV]) {
    throw ValidationError("CodecConfig: velocity_change must have 47 classes");
  }
  if (velocity_change.domain != DomainKind::Signed) {
    throw ValidationError("CodecConfig: velocity_change must be a signed spec");
  }
  if (reference_velocity < 1 || reference_velocity > 127) {
    throw ValidationError("CodecConfig: reference_velocity outside [1,127]");
  }
}

BinSpec calibrate(std::span<const double> values, int class_count, DomainKind domain,
                  std::string_view field_name) {
  if (values.empty()) {
    throw ValidationError("calibrate: field '" + std::string(field_name) + "' has no values");
  }
  if (class_count < 2) throw ValidationError("calibrate: class count must be at least 2");
  for (double v : values) {
    if (std::isnan(v)) throw ValidationError("calibrate: NaN value in field '" + std::string(field_name) + "'");
    if (domain == DomainKind::Nonnegative && v < 0.0) {
      throw ValidationError("calibrate: negative value in nonnegative field '" +
                            std::string(field_name) + "'");
    }
  }
  if (domain == DomainKind::Signed) return calibrate_signed(values, class_count, field_name);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return calibrate_nonnegative(sorted, class_count, field_name);
}

std::vector<WeberViolation> weber_diagnostic(const BinSpec& spec) {
  spec.validate();
  // Widths in increasing |value| order. For nonnegative specs the innermost
  // class spans [0, b0]; for signed specs the zero class spans [0, b_half)
  // in magnitude. The outermost class is unbounded and skipped.
  std::vector<std::pair<int, double>> widths;  // (class index, width)
  if (spec.domain == DomainKind::Nonnegative) {
    widths.emplace_back(0, spec.boundaries.front());
    for (std::size_t i = 1; i < spec.boundaries.size(); ++i) {
      widths.emplace_back(static_cast<int>(i), spec.boundaries[i] - spec.boundaries[i - 1]);
    }
  } else {
    const int half = (spec.class_count() - 1) / 2;
    widths.emplace_back(half, spec.boundaries[half]);  // zero class, magnitude half-width
    for (int j = 1; j < half; ++j) {
      widths.emplace_back(half + j, spec.boundaries[half + j] - spec.boundaries[half + j - 1]);
    }
  }
  std::vector<WeberViolation> violations;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    if (widths[i].second < widths[i - 1].second) {
      violations.push_back({widths[i].first, widths[i].second / widths[i - 1].second});
    }
  }
  return violations;
}

int quantize(double value, const BinSpec& spec) {
  if (std::isnan(value)) throw ValidationError("quantize: NaN value");
  auto it = std::upper_bound(spec.boundaries.begin(), spec.boundaries.end(), value);
  return static_cast<int>(it - spec.boundaries.begin());
}

double dequantize(int cls, const BinSpec& spec) {
  if (cls < 0 || cls >= spec.class_count()) {
    throw ValidationError("dequantize: class " + std::to_string(cls) + " outside [0," +
                          std::to_string(spec.class_count() - 1) + "]");
  }
  return spec.representatives[static_cast<std::size_t>(cls)];
}

EncodeResult encode(std::span<const NoteEvent> notes, const CodecConfig& config) {
  config.validate();
  // Non-decreasing onsets are required; equal-onset ties may arrive in any
  // pitch order (decode emits them in token order, and the round trip must
  // still hold).
  for (std::size_t i = 1; i < notes.size(); ++i) {
    if (notes[i].onset_ms < notes[i - 1].onset_ms) {
      throw ValidationError("encode: notes must be sorted by onset");
    }
  }

  EncodeResult result;
  result.tokens.reserve(notes.size());
  double prev_onset = 0.0;
  int prev_velocity = config.reference_velocity;
  for (const NoteEvent& note : notes) {
    NoteToken tok;
    int n = note.pitch - 21;
    if (n < 0 || n > 87) {
      ++result.clamped_pitch_count;
      n = std::clamp(n, 0, 87);
    }
    tok.n = n;
    tok.t = quantize(note.onset_ms - prev_onset, config.time_shift);
    tok.d = quantize(note.duration_ms, config.duration);
    tok.v = quantize(static_cast<double>(note.velocity - prev_velocity), config.velocity_change);
    tok.p = note.pedal_on ? 1 : 0;
    result.tokens.push_back(tok);
    prev_onset = note.onset_ms;
    prev_velocity = note.velocity;
  }
  return result;
}

std::vector<NoteEvent> decode(std::span<const NoteToken> tokens, const CodecConfig& config) {
  config.validate();
  std::vector<NoteEvent> notes;
  notes.reserve(tokens.size());
  double onset = 0.0;
  int velocity = config.reference_velocity;
  for (const NoteToken& tok : tokens) {
    validate_token(tok);
    onset += dequantize(tok.t, config.time_shift);
    // Velocities stay integral: deltas are rounded half away from zero, which
    // keeps the rounded value inside its class for integer-calibrated bins.
    velocity = std::clamp(velocity + static_cast<int>(std::llround(dequantize(tok.v, config.velocity_change))),
                          1, 127);
    NoteEvent note;
    note.pitch = tok.n + 21;
    note.onset_ms = onset;
    note.duration_ms = dequantize(tok.d, config.duration);
    note.velocity = velocity;
    note.pedal_on = tok.p != 0;
    notes.push_back(note);
  }
  return notes;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

namespace {

const char* domain_name(DomainKind d) {
  return d == DomainKind::Nonnegative ? "nonnegative" : "signed";
}

void write_values(std::ostream& os, const char* key, std::span<const double> values) {
  os << key;
  for (double v : values) os << ' ' << fmt_double(v);
  os << '\n';
}

void write_field(std::ostream& os, const char* name, const BinSpec& spec) {
  os << "field " << name << ' ' << domain_name(spec.domain) << ' ' << spec.class_count() << '\n';
  write_values(os, "boundaries", spec.boundaries);
  write_values(os, "representatives", spec.representatives);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string word;
  while (ss >> word) out.push_back(word);
  return out;
}

}  // namespace

void save_codec_config(const CodecConfig& config, const std::filesystem::path& path) {
  config.validate();
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "xmg-codec v1\n";
  os << "reference_velocity " << config.reference_velocity << '\n';
  write_field(os, "time_shift", config.time_shift);
  write_field(os, "duration", config.duration);
  write_field(os, "velocity_change", config.velocity_change);
  if (!os) throw Error("failed writing " + path.string());
}

CodecConfig load_codec_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != "xmg-codec v1") {
    throw ParseError("expected 'xmg-codec v1' header", line_no);
  }

  CodecConfig config;
  bool have_ref = false, have_t = false, have_d = false, have_v = false;
  while (next_line()) {
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (words[0] == "reference_velocity") {
      if (words.size() != 2) throw ParseError("reference_velocity takes one value", line_no);
      config.reference_velocity = static_cast<int>(parse_double(words[1], line_no));
      have_ref = true;
    } else if (words[0] == "field") {
      if (words.size() != 4) throw ParseError("field line needs: field <name> <domain> <classes>", line_no);
      BinSpec spec;
      if (words[2] == "nonnegative") spec.domain = DomainKind::Nonnegative;
      else if (words[2] == "signed") spec.domain = DomainKind::Signed;
      else throw ParseError("unknown domain '" + words[2] + "'", line_no);
      int classes = static_cast<int>(parse_double(words[3], line_no));

      for (const char* key : {"boundaries", "representatives"}) {
        if (!next_line()) throw ParseError(std::string("missing ") + key + " line", line_no);
        auto vals = split_ws(line);
        if (vals.empty() || vals[0] != key) throw ParseError(std::string("expected ") + key, line_no);
        std::vector<double> parsed;
        for (std::size_t i = 1; i < vals.size(); ++i) parsed.push_back(parse_double(vals[i], line_no));
        if (std::string(key) == "boundaries") spec.boundaries = std::move(parsed);
        else spec.representatives = std::move(parsed);
      }
      if (spec.class_count() != classes) {
        throw ParseError("declared class count does not match representatives", line_no);
      }
      if (words[1] == "time_shift") { config.time_shift = std::move(spec); have_t = true; }
      else if (words[1] == "duration") { config.duration = std::move(spec); have_d = true; }
      else if (words[1] == "velocity_change") { config.velocity_change = std::move(spec); have_v = true; }
      else throw ParseError("unknown field '" + words[1] + "'", line_no);
    } else {
      throw ParseError("unknown key '" + words[0] + "'", line_no);
    }
  }
  if (!have_ref || !have_t || !have_d || !have_v) {
    throw ParseError("config is missing required entries", line_no);
  }
  config.validate();
  return config;
}

void write_token_csv(std::span<const NoteToken> tokens, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "n,t,d,v,p\n";
  for (const NoteToken& tok : tokens) {
    os << tok.n << ',' << tok.t << ',' << tok.d << ',' << tok.v << ',' << tok.p << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<NoteToken> read_token_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "n,t,d,v,p") {
    throw ParseError("token CSV must start with header 'n,t,d,v,p'", 1);
  }
  std::vector<NoteToken> tokens;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    NoteToken tok;
    int fields[5];
    std::size_t pos = 0;
    for (int f = 0; f < 5; ++f) {
      std::size_t comma = f < 4 ? line.find(',', pos) : line.size();
      if (comma == std::string::npos) throw ParseError("token row needs 5 fields", line_no);
      fields[f] = static_cast<int>(parse_double(std::string_view(line).substr(pos, comma - pos), line_no));
      pos = comma + 1;
    }
    tok.n = fields[0]; tok.t = fields[1]; tok.d = fields[2]; tok.v = fields[3]; tok.p = fields[4];
    validate_token(tok);
    tokens.push_back(tok);
  }
  return tokens;
}

}  // namespace xmg
