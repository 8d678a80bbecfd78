#pragma once

#include <array>
#include <string>

#include "xmg/errors.hpp"

namespace xmg {

// Categorical note fields, in sampling order.
enum Field : int { kFieldN = 0, kFieldT = 1, kFieldD = 2, kFieldV = 3, kFieldP = 4 };

inline constexpr int kNumFields = 5;
inline constexpr std::array<int, kNumFields> kFieldClasses = {88, 105, 120, 47, 2};
inline constexpr std::array<const char*, kNumFields> kFieldNames = {"n", "t", "d", "v", "p"};

/// One note as five categorical classes: pitch class n, time-shift class t,
/// duration class d, velocity-change class v, pedal state p.
struct NoteToken {
  int n = 0;  // [0,87]
  int t = 0;  // [0,104]
  int d = 0;  // [0,119]
  int v = 0;  // [0,46]
  int p = 0;  // {0,1}

  int field(int f) const {
    switch (f) {
      case kFieldN: return n;
      case kFieldT: return t;
      case kFieldD: return d;
      case kFieldV: return v;
      case kFieldP: return p;
    }
    throw ValidationError("NoteToken: field index out of range");
  }

  void set_field(int f, int value) {
    switch (f) {
      case kFieldN: n = value; return;
      case kFieldT: t = value; return;
      case kFieldD: d = value; return;
      case kFieldV: v = value; return;
      case kFieldP: p = value; return;
    }
    throw ValidationError("NoteToken: field index out of range");
  }

  bool operator==(const NoteToken&) const = default;
};

inline bool token_in_range(const NoteToken& tok) {
  for (int f = 0; f < kNumFields; ++f) {
    if (tok.field(f) < 0 || tok.field(f) >= kFieldClasses[f]) return false;
  }
  return true;
}

inline void validate_token(const NoteToken& tok) {
  for (int f = 0; f < kNumFields; ++f) {
    if (tok.field(f) < 0 || tok.field(f) >= kFieldClasses[f]) {
      throw ValidationError(std::string("NoteToken: field ") + kFieldNames[f] + " = " +
                            std::to_string(tok.field(f)) + " outside [0," +
                            std::to_string(kFieldClasses[f] - 1) + "]");
    }
  }
}

}  // namespace xmg
