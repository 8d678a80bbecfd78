#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xmg/errors.hpp"
#include "xmg/midi_io.hpp"
#include "xmg/token.hpp"

namespace xmg {

enum class DomainKind { Nonnegative, Signed };

/// Categorical bins for one continuous field: K-1 ascending interior cut
/// points plus one representative value per class. Class k covers
/// [boundaries[k-1], boundaries[k]) — left-closed, right-open — and the edge
/// classes absorb everything below/above.
struct BinSpec {
  std::vector<double> boundaries;
  std::vector<double> representatives;
  DomainKind domain = DomainKind::Nonnegative;

  int class_count() const { return static_cast<int>(representatives.size()); }
  void validate(std::string_view name = "bin spec") const;
};

/// Calibrated quantizers for the three continuous fields plus the velocity
/// reference the first note's delta is taken against.
struct CodecConfig {
  BinSpec time_shift;       // 105 classes, nonnegative
  BinSpec duration;         // 120 classes, nonnegative
  BinSpec velocity_change;  // 47 classes, signed
  int reference_velocity = 64;

  void validate() const;
};

/// Equal-frequency bin calibration. Boundaries are placed between distinct
/// values so each class receives a near-equal share of the corpus (within
/// one quantile step, barring ties); representatives are per-class medians.
/// For the signed domain, calibration runs on |values|: (K-1)/2 positive
/// classes are cut, mirrored about zero, and joined by a dedicated zero
/// class whose representative is exactly 0.
BinSpec calibrate(std::span<const double> values, int class_count, DomainKind domain,
                  std::string_view field_name = "field");

struct WeberViolation {
  int class_index = 0;
  double width_ratio = 0.0;  // width / previous width, < 1 for a violation
};

/// Flags classes whose width shrinks relative to the preceding class when
/// walking outward in |value| (bin widths should grow with magnitude). The
/// unbounded outermost class is skipped; for signed specs only the positive
/// side is reported (the negative side mirrors it).
std::vector<WeberViolation> weber_diagnostic(const BinSpec& spec);

/// Binary-search quantization; out-of-range values clamp to the edge
/// classes. Rejects NaN.
int quantize(double value, const BinSpec& spec);

/// The representative value of a class.
double dequantize(int cls, const BinSpec& spec);

struct EncodeResult {
  std::vector<NoteToken> tokens;
  int clamped_pitch_count = 0;  // pitches outside [21,108], clamped into range
};

/// Notes (sorted by onset, then pitch) to tokens. Time shifts difference
/// consecutive onsets, the first note against time 0; velocity changes
/// difference consecutive velocities, the first note against
/// reference_velocity.
EncodeResult encode(std::span<const NoteEvent> notes, const CodecConfig& config);

/// Tokens back to notes: onsets are cumulative sums of dequantized time
/// shifts, velocities accumulate rounded dequantized deltas from
/// reference_velocity (clamped to [1,127]), pitch = n + 21.
std::vector<NoteEvent> decode(std::span<const NoteToken> tokens, const CodecConfig& config);

// Versioned, human-diffable text persistence for CodecConfig. Rewriting the
// same config is byte-identical.
void save_codec_config(const CodecConfig& config, const std::filesystem::path& path);
CodecConfig load_codec_config(const std::filesystem::path& path);

// Token sequences as CSV with header "n,t,d,v,p", one row per note.
void write_token_csv(std::span<const NoteToken> tokens, const std::filesystem::path& path);
std::vector<NoteToken> read_token_csv(const std::filesystem::path& path);

}  // namespace xmg
