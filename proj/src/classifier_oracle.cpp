// Reference rule over raw mask bits.

#include "sldx/classifier.hpp"

namespace sldx {

BinaryLabel brute_force_oracle(const FeatureSet& fs) {
  const unsigned mask = fs.mask();
  const bool has_f1 = (mask & 0x001u) != 0;  // bit 0
  const bool has_f9 = (mask & 0x100u) != 0;  // bit 8
  if (has_f1) return BinaryLabel::One;
  if (has_f9) return BinaryLabel::One;

  int others = 0;
  for (unsigned bit = 0; bit < 10; ++bit) {
    if (bit == 0 || bit == 8) continue;
    if ((mask >> bit) & 1u) others = others + 1;
  }
  if (others >= 3) return BinaryLabel::One;
  return BinaryLabel::Zero;
}

}  // namespace sldx
