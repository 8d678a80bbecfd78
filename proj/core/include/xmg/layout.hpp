#pragma once

#include <array>
#include <string>
#include <vector>

#include "xmg/errors.hpp"
#include "xmg/token.hpp"

namespace xmg {

/// One-hot input layout shared by the five submodels.
///
/// Every submodel sees the previous note's five fields as concatenated
/// one-hot blocks (88+105+120+47+2 = 362 dims). Submodel m additionally sees
/// the current note's already-decided fields 0..m-1 appended as one-hot
/// blocks, so its input width is 362 + sum of those class counts:
/// 362 / 450 / 555 / 675 / 722 for m = 0..4.
struct FieldLayout {
  static constexpr int kPrevTotal = kFieldClasses[0] + kFieldClasses[1] + kFieldClasses[2] +
                                    kFieldClasses[3] + kFieldClasses[4];

  static constexpr int prev_offset(int field) {
    int off = 0;
    for (int f = 0; f < field; ++f) off += kFieldClasses[f];
    return off;
  }

  // Offset of the current-note block for `field` (valid for field < 4; the
  // last field p is never an input).
  static constexpr int cur_offset(int field) {
    int off = kPrevTotal;
    for (int f = 0; f < field; ++f) off += kFieldClasses[f];
    return off;
  }

  static constexpr int input_dim(int submodel) {
    int dim = kPrevTotal;
    for (int f = 0; f < submodel; ++f) dim += kFieldClasses[f];
    return dim;
  }

  static constexpr int output_classes(int submodel) { return kFieldClasses[submodel]; }
};

static_assert(FieldLayout::kPrevTotal == 362);
static_assert(FieldLayout::input_dim(0) == 362);
static_assert(FieldLayout::input_dim(1) == 450);
static_assert(FieldLayout::input_dim(2) == 555);
static_assert(FieldLayout::input_dim(3) == 675);
static_assert(FieldLayout::input_dim(4) == 722);

/// One contiguous column block of a submodel's input, attributable to a
/// single field of either the previous or the current note.
struct InputBlock {
  int row = 0;      // 0..4 = previous-note n,t,d,v,p; 5..8 = current-note n,t,d,v
  int offset = 0;   // first input column
  int width = 0;    // number of classes
};

inline constexpr int kNumInputBlockRows = 9;
inline constexpr std::array<const char*, kNumInputBlockRows> kInputBlockNames = {
    "prev_n", "prev_t", "prev_d", "prev_v", "prev_p", "cur_n", "cur_t", "cur_d", "cur_v"};

/// The input blocks present in submodel m's layout, in column order.
inline std::vector<InputBlock> input_blocks(int submodel) {
  if (submodel < 0 || submodel >= kNumFields) {
    throw ValidationError("input_blocks: submodel id outside [0,4]");
  }
  std::vector<InputBlock> blocks;
  for (int f = 0; f < kNumFields; ++f) {
    blocks.push_back({f, FieldLayout::prev_offset(f), kFieldClasses[f]});
  }
  for (int f = 0; f < submodel; ++f) {
    blocks.push_back({kNumFields + f, FieldLayout::cur_offset(f), kFieldClasses[f]});
  }
  return blocks;
}

}  // namespace xmg
