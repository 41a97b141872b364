#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "kam/errors.hpp"
#include "kam/stft.hpp"
#include "kam/synth.hpp"
#include "oracles.hpp"

using namespace kam;

namespace {

SynthSpec short_spec(std::uint64_t seed = 3) {
  SynthSpec s;
  s.duration_s = 6.0;
  s.seed = seed;
  return s;
}

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / x.size());
}

}  // namespace

TEST(Synth, DefaultsDescribeTwentySecondClip) {
  const SynthSpec s;
  EXPECT_EQ(s.duration_s, 20.0);
  EXPECT_EQ(s.sample_rate, 44100u);
  const auto t = generate(short_spec());
  EXPECT_EQ(t.mixture.frames(), 6u * 44100u);
  EXPECT_EQ(t.mixture.channels(), 1u);
}

TEST(Synth, DeterministicInSeed) {
  EXPECT_EQ(generate(short_spec(4)).mixture, generate(short_spec(4)).mixture);
  EXPECT_NE(generate(short_spec(4)).mixture, generate(short_spec(5)).mixture);
}

TEST(Synth, MixtureIsExactSum) {
  for (auto kind : {VocalKind::VibratoTone, VocalKind::Glide, VocalKind::Pulsed}) {
    auto spec = short_spec();
    spec.vocal_kind = kind;
    const auto t = generate(spec);
    for (std::size_t n = 0; n < t.mixture.frames(); ++n)
      ASSERT_EQ(t.mixture.channel(0)[n],
                t.vocals.channel(0)[n] + t.accompaniment.channel(0)[n]);
    double peak = 0.0;
    for (double v : t.mixture.channel(0)) peak = std::max(peak, std::abs(v));
    // Scaled to 0.45, then each part rounded to the 2^-23 grid.
    EXPECT_LE(peak, 0.45 + std::ldexp(1.0, -22));
    EXPECT_GT(rms(t.vocals.channel(0)), 0.0);
  }
}

TEST(Synth, MutedVocalLeavesAccompaniment) {
  auto spec = short_spec();
  spec.vocal_gain_db = -std::numeric_limits<double>::infinity();
  const auto t = generate(spec);
  EXPECT_EQ(t.mixture, t.accompaniment);
  EXPECT_EQ(rms(t.vocals.channel(0)), 0.0);
}

TEST(Synth, VocalGainIsHonored) {
  const auto t = generate(short_spec());
  const double ratio = rms(t.vocals.channel(0)) / rms(t.accompaniment.channel(0));
  EXPECT_NEAR(20 * std::log10(ratio), -6.0, 0.05);
}

TEST(Synth, VocalIsActiveAboutHalfTheTime) {
  auto spec = short_spec();
  spec.duration_s = 20.0;
  const auto t = generate(spec);
  const auto v = t.vocals.channel(0);
  const std::size_t block = 441;
  std::size_t active = 0, blocks = 0;
  for (std::size_t i = 0; i + block <= v.size(); i += block, ++blocks)
    if (rms(std::span<const double>(v).subspan(i, block)) > 1e-4) ++active;
  const double fraction = static_cast<double>(active) / blocks;
  EXPECT_GT(fraction, 0.3);
  EXPECT_LT(fraction, 0.8);
}

TEST(Synth, AccompanimentRepeatsEveryPeriod) {
  auto spec = short_spec();
  // 22 hops, so frames one period apart see identical samples.
  spec.accomp_period_s = 22.0 * 2048.0 / 44100.0;
  spec.duration_s = 5 * spec.accomp_period_s;
  const auto t = generate(spec);
  const auto x = magnitude(stft(t.accompaniment.channel(0), StftParams{}));
  double off = 0.0, same = 0.0;
  std::size_t off_count = 0, same_count = 0;
  for (std::size_t k = 2; k + 22 + 2 < x.frames(); ++k)
    for (std::size_t l = k + 1; l + 2 < x.frames(); ++l) {
      double d = 0.0;
      for (std::size_t m = 0; m < x.bins(); ++m) {
        const double diff = x.values(m, k) - x.values(m, l);
        d += diff * diff;
      }
      if (l == k + 22) {
        same = std::max(same, d);
        ++same_count;
      } else {
        off += d;
        ++off_count;
      }
    }
  ASSERT_GT(same_count, 0u);
  EXPECT_LE(same, 1e-6 * off / off_count);
}

TEST(Synth, FloatWavRoundTripIsExact) {
  const auto dir = oracle::scratch_dir("synth");
  const auto t = generate(short_spec());
  write_wav(dir / "mix.wav", t.mixture, SampleFormat::Float32);
  EXPECT_EQ(read_wav(dir / "mix.wav"), t.mixture);
  std::filesystem::remove_all(dir);
}

TEST(Synth, RejectsInvalidSpecs) {
  auto s = short_spec();
  s.duration_s = 2.0;
  EXPECT_THROW(generate(s), ConfigError);
  s = short_spec();
  s.sample_rate = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = short_spec();
  s.vocal_gain_db = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(s.validate(), ConfigError);
  s = short_spec();
  s.accomp_period_s = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(parse_vocal_kind("yodel"), ConfigError);
  EXPECT_EQ(parse_vocal_kind(vocal_kind_name(VocalKind::Glide)), VocalKind::Glide);
}
