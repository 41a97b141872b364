#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

#include "kam/audio_io.hpp"

namespace kam {

enum class VocalKind { VibratoTone, Glide, Pulsed };

VocalKind parse_vocal_kind(std::string_view name);
std::string_view vocal_kind_name(VocalKind kind);

// Synthetic mixture with a looped, energy-dominant harmonic accompaniment and
// a non-repeating frequency-modulated vocal line.
struct SynthSpec {
  double duration_s = 20.0;
  unsigned sample_rate = 44100;
  std::uint64_t seed = 0;
  double accomp_period_s = 1.0;
  // Vocal RMS relative to accompaniment RMS. -inf mutes the vocal.
  double vocal_gain_db = -6.0;
  VocalKind vocal_kind = VocalKind::VibratoTone;

  // duration >= 4 periods, positive rate, finite or -inf gain. Throws
  // ConfigError.
  void validate() const;
};

struct SynthTriple {
  AudioBuffer mixture;
  AudioBuffer vocals;
  AudioBuffer accompaniment;
};

// Deterministic in the spec. Every sample lies on a 2^-23 grid inside
// (-1, 1), so mixture == vocals + accompaniment exactly and all three survive
// a float32 WAV round trip unchanged.
SynthTriple generate(const SynthSpec& spec);

}  // namespace kam
