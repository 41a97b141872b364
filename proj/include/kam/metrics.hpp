#pragma once

#include "kam/audio_io.hpp"

namespace kam {

struct EvalScore {
  double sdr_db = 0.0;
  bool scale_invariant = false;
};

// 10 log10(sum s^2 / sum (s - e)^2). The estimate is trimmed or zero-padded to
// the reference length and channels are concatenated. +inf for a perfect
// estimate. Throws NumericalError for a silent reference and ConfigError for
// mismatched channel counts or sample rates.
EvalScore sdr(const AudioBuffer& reference, const AudioBuffer& estimate);

// SDR against the projection a*s of the estimate onto the reference,
// a = <e, s> / <s, s>. -inf when the estimate is orthogonal to the reference.
EvalScore si_sdr(const AudioBuffer& reference, const AudioBuffer& estimate);

}  // namespace kam
