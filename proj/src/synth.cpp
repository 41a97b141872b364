#include "kam/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kam/errors.hpp"

namespace kam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// 2^23: samples on this grid inside (-1, 1) are exact float32 values and
// pairwise sums stay exact.
constexpr double kGrid = 8388608.0;
constexpr double kPeak = 0.45;

double midi_to_hz(double note) { return 440.0 * std::pow(2.0, (note - 69.0) / 12.0); }

// Linear fade-in/out of `ramp` samples over a segment of `length` samples.
double fade(std::size_t i, std::size_t length, std::size_t ramp) {
  if (ramp == 0) return 1.0;
  const double in = static_cast<double>(i) / static_cast<double>(ramp);
  const double out = static_cast<double>(length - i) / static_cast<double>(ramp);
  return std::clamp(std::min(in, out), 0.0, 1.0);
}

// One period of the accompaniment: 2-4 consecutive notes with 3-5 harmonics
// each, re-struck on a quarter-period grid. The first note is the loudest, the
// others sit up to 20 dB below it, so the vocal dominates some frames locally.
// Every stroke fades to zero before the next one.
std::vector<double> accompaniment_period(std::size_t period, unsigned rate,
                                         std::mt19937_64& rng) {
  static constexpr int kScale[] = {0, 2, 3, 5, 7, 8, 10};
  constexpr int kPulses = 4;
  std::uniform_int_distribution<int> note_count(2, 4);
  std::uniform_int_distribution<int> partial_count(3, 5);
  std::uniform_int_distribution<int> degree(0, 6);
  std::uniform_int_distribution<int> octave(0, 1);
  std::uniform_real_distribution<double> decay(0.5, 1.5);
  std::uniform_real_distribution<double> level_db(-20.0, 0.0);

  std::vector<double> out(period, 0.0);
  const int notes = note_count(rng);
  const std::size_t ramp = rate / 200;  // 5 ms
  for (int n = 0; n < notes; ++n) {
    const double f0 = midi_to_hz(45 + 12 * octave(rng) + kScale[degree(rng)]);
    const int partials = partial_count(rng);
    const double tau = decay(rng);
    const double gain = n == 0 ? 1.0 : std::pow(10.0, level_db(rng) / 20.0);
    const int first = kPulses * n / notes;
    const int last = kPulses * (n + 1) / notes;
    for (int pulse = first; pulse < last; ++pulse) {
      const std::size_t begin = period * static_cast<std::size_t>(pulse) / kPulses;
      const std::size_t end = period * static_cast<std::size_t>(pulse + 1) / kPulses;
      for (int h = 1; h <= partials; ++h) {
        const double f = f0 * h;
        if (f >= 0.45 * rate) break;
        const double amp = gain / h;
        for (std::size_t i = begin; i < end; ++i) {
          const double t = static_cast<double>(i - begin) / rate;
          out[i] += amp * std::exp(-tau * t) *
                    fade(i - begin, end - begin, ramp) * std::sin(kTwoPi * f * t);
        }
      }
    }
  }
  return out;
}

// Renders one phrase of the vocal line with 5-7 Hz, +-30 cent vibrato.
void render_phrase(std::vector<double>& out, std::size_t begin,
                   std::size_t length, double start_note, double end_note,
                   unsigned rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> vib_rate(5.0, 7.0);
  std::uniform_real_distribution<double> vib_phase(0.0, kTwoPi);
  const double rate_hz = vib_rate(rng);
  const double phase0 = vib_phase(rng);
  constexpr double kDepthCents = 30.0;
  constexpr int kHarmonics = 8;
  const std::size_t ramp = rate / 50;  // 20 ms

  std::vector<double> phase(kHarmonics, 0.0);
  for (std::size_t i = 0; i < length && begin + i < out.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double frac = length > 1 ? static_cast<double>(i) / (length - 1) : 0.0;
    const double note = start_note + (end_note - start_note) * frac;
    const double cents = kDepthCents * std::sin(kTwoPi * rate_hz * t + phase0);
    const double f0 = midi_to_hz(note + cents / 100.0);
    double v = 0.0;
    for (int h = 0; h < kHarmonics; ++h) {
      const double f = f0 * (h + 1);
      if (f < 0.45 * rate) v += std::sin(phase[h]) / (h + 1);
      phase[h] += kTwoPi * f / rate;
    }
    out[begin + i] += v * fade(i, length, ramp);
  }
}

// Phrases of legato notes drawn from a five-note set, separated by rests so
// roughly half of the clip carries voice. Phrase and note lengths are random,
// so the line never repeats with the accompaniment loop.
std::vector<double> vocal_line(std::size_t total, unsigned rate,
                               VocalKind kind, std::mt19937_64& rng) {
  static constexpr int kMelody[] = {62, 64, 67, 69, 72};
  std::uniform_real_distribution<double> phrase_s(1.0, 3.0);
  std::uniform_real_distribution<double> gap_s(0.8, 2.4);
  std::uniform_real_distribution<double> note_s(0.25, 0.7);
  std::uniform_real_distribution<double> syllable_s(0.12, 0.3);
  std::uniform_real_distribution<double> pause_s(0.05, 0.15);
  std::uniform_int_distribution<int> pick(0, 4);

  std::vector<double> out(total, 0.0);
  std::size_t pos = static_cast<std::size_t>(gap_s(rng) * rate / 2);
  while (pos < total) {
    const auto phrase_end = pos + static_cast<std::size_t>(phrase_s(rng) * rate);
    std::size_t p = pos;
    double note = kMelody[pick(rng)];
    while (p < phrase_end && p < total) {
      const double next = kMelody[pick(rng)];
      std::size_t length = 0;
      switch (kind) {
        case VocalKind::VibratoTone:
          length = static_cast<std::size_t>(note_s(rng) * rate);
          render_phrase(out, p, std::min(length, phrase_end - p), note, note,
                        rate, rng);
          break;
        case VocalKind::Glide:
          length = static_cast<std::size_t>(note_s(rng) * rate);
          render_phrase(out, p, std::min(length, phrase_end - p), note, next,
                        rate, rng);
          break;
        case VocalKind::Pulsed:
          length = static_cast<std::size_t>(syllable_s(rng) * rate);
          render_phrase(out, p, std::min(length, phrase_end - p), note, note,
                        rate, rng);
          length += static_cast<std::size_t>(pause_s(rng) * rate);
          break;
      }
      p += length;
      note = next;
    }
    pos = phrase_end + static_cast<std::size_t>(gap_s(rng) * rate);
  }
  return out;
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

VocalKind parse_vocal_kind(std::string_view name) {
  if (name == "vibrato-tone") return VocalKind::VibratoTone;
  if (name == "glide") return VocalKind::Glide;
  if (name == "pulsed") return VocalKind::Pulsed;
  throw ConfigError("unknown vocal kind: " + std::string(name));
}

std::string_view vocal_kind_name(VocalKind kind) {
  switch (kind) {
    case VocalKind::VibratoTone:
      return "vibrato-tone";
    case VocalKind::Glide:
      return "glide";
    case VocalKind::Pulsed:
      return "pulsed";
  }
  return "unknown";
}

void SynthSpec::validate() const {
  if (sample_rate == 0) throw ConfigError("sample rate must be positive");
  if (!(accomp_period_s > 0.0) || !std::isfinite(accomp_period_s))
    throw ConfigError("accompaniment period must be positive");
  if (!std::isfinite(duration_s) || duration_s < 4.0 * accomp_period_s)
    throw ConfigError("duration must cover at least 4 accompaniment periods");
  if (std::isnan(vocal_gain_db) || vocal_gain_db == INFINITY)
    throw ConfigError("vocal gain must be finite or -inf");
  if (std::llround(accomp_period_s * sample_rate) < 1)
    throw ConfigError("accompaniment period is shorter than one sample");
}

SynthTriple generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const unsigned rate = spec.sample_rate;
  const auto total = static_cast<std::size_t>(std::llround(spec.duration_s * rate));
  const auto period =
      static_cast<std::size_t>(std::llround(spec.accomp_period_s * rate));

  const auto loop = accompaniment_period(period, rate, rng);
  std::vector<double> accomp(total);
  for (std::size_t i = 0; i < total; ++i) accomp[i] = loop[i % period];

  std::vector<double> vocal(total, 0.0);
  const bool muted = std::isinf(spec.vocal_gain_db);
  if (!muted) {
    vocal = vocal_line(total, rate, spec.vocal_kind, rng);
    const double target = rms(accomp) * std::pow(10.0, spec.vocal_gain_db / 20.0);
    const double current = rms(vocal);
    const double gain = current > 0.0 ? target / current : 0.0;
    for (auto& v : vocal) v *= gain;
  }

  std::vector<double> mix(total);
  for (std::size_t i = 0; i < total; ++i) mix[i] = accomp[i] + vocal[i];
  const double top = std::max({peak(accomp), peak(vocal), peak(mix)});
  const double scale = top > 0.0 ? kPeak / top : 1.0;
  const auto quantize = [&](double v) {
    return std::round(v * scale * kGrid) / kGrid;
  };
  for (std::size_t i = 0; i < total; ++i) {
    accomp[i] = quantize(accomp[i]);
    vocal[i] = quantize(vocal[i]);
    mix[i] = accomp[i] + vocal[i];
  }

  return {AudioBuffer::mono(std::move(mix), rate),
          AudioBuffer::mono(std::move(vocal), rate),
          AudioBuffer::mono(std::move(accomp), rate)};
}

}  // namespace kam
