#include "kam/separation.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <cmath>
#include <limits>
#include <string>

#include "kam/errors.hpp"
#include "kam/log.hpp"
#include "kam/parallel.hpp"

namespace kam {

void SeparationConfig::validate() const {
  stft.validate();
  if (neighbors < 1) throw ConfigError("neighbor count must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be positive");
  if (!(mag_floor > 0.0) || !std::isfinite(mag_floor))
    throw ConfigError("magnitude floor must be positive");
  if (!(radius_ms >= 0.0) || !std::isfinite(radius_ms))
    throw ConfigError("radius must be a nonnegative number of ms");
}

std::size_t SeparationConfig::radius_frames() const {
  const double frames = radius_ms / 1000.0 * stft.sample_rate /
                        static_cast<double>(stft.hop);
  return static_cast<std::size_t>(std::llround(frames));
}

namespace {

// Position of the n-th (0-based) set bit across `words`.
std::size_t nth_set_bit(std::span<const std::uint64_t> words, std::size_t n) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    const auto count = static_cast<std::size_t>(std::popcount(bits));
    if (n >= count) {
      n -= count;
      continue;
    }
    for (; n > 0; --n) bits &= bits - 1;
    return w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
  }
  return words.size() * 64;
}

bool has_repeats(std::span<const std::size_t> row) {
  std::vector<std::size_t> copy(row.begin(), row.end());
  std::sort(copy.begin(), copy.end());
  return std::adjacent_find(copy.begin(), copy.end()) != copy.end();
}

// Direct selection for rows that list a frame more than once.
void median_by_selection(const MagnitudeSpectrogram& x,
                         std::span<const std::size_t> row,
                         std::span<double> out) {
  const std::size_t p = row.size();
  const std::size_t half = p / 2;
  std::vector<double> values(p);
  for (std::size_t m = 0; m < out.size(); ++m) {
    for (std::size_t j = 0; j < p; ++j) values[j] = x.values(m, row[j]);
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(half);
    std::nth_element(values.begin(), mid, values.end());
    out[m] = p % 2 == 1
                 ? *mid
                 : (*std::max_element(values.begin(), mid) + *mid) / 2.0;
  }
}

}  // namespace

MagnitudeSpectrogram median_estimate(const MagnitudeSpectrogram& x,
                                     const NeighborTable& neighbors) {
  const std::size_t bins = x.bins();
  const std::size_t frames = x.frames();
  const std::size_t p = neighbors.neighbors();
  if (neighbors.frames() != frames)
    throw ConfigError("neighbor table does not match the spectrogram");
  for (std::size_t k = 0; k < frames; ++k)
    for (std::size_t j : neighbors.row(k))
      if (j >= frames) throw ConfigError("neighbor index out of range");

  // Order statistics are read off per-bin ranks: rank(m, j) is the position
  // of X[m][j] among all frames at bin m (ties by frame index), and
  // sorted(m, r) the value at rank r. Selecting among P neighbors then
  // reduces to finding set bits in an N-bit mask.
  Matrix<std::uint32_t> rank(bins, frames);
  Matrix<double> sorted(frames, bins);
  parallel_for(0, bins, [&](std::size_t m) {
    std::vector<std::uint32_t> order(frames);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = x.values(m, a);
      const double vb = x.values(m, b);
      return va < vb || (va == vb && a < b);
    });
    auto values = sorted.col(m);
    for (std::uint32_t r = 0; r < frames; ++r) {
      rank(m, order[r]) = r;
      values[r] = x.values(m, order[r]);
    }
  });

  MagnitudeSpectrogram y{Matrix<double>(bins, frames), x.params};
  const std::size_t words = (frames + 63) / 64;
  const std::size_t half = p / 2;
  constexpr std::size_t kBlock = 64;
  parallel_for(0, frames, [&](std::size_t k) {
    const auto row = neighbors.row(k);
    auto out = y.values.col(k);
    if (has_repeats(row)) {
      median_by_selection(x, row, out);
      return;
    }
    std::vector<std::uint64_t> masks(kBlock * words);
    for (std::size_t m0 = 0; m0 < bins; m0 += kBlock) {
      const std::size_t width = std::min(kBlock, bins - m0);
      std::fill(masks.begin(), masks.end(), 0);
      for (std::size_t j : row) {
        const auto ranks = rank.col(j).subspan(m0, width);
        for (std::size_t i = 0; i < width; ++i)
          masks[i * words + ranks[i] / 64] |= std::uint64_t{1} << (ranks[i] % 64);
      }
      for (std::size_t i = 0; i < width; ++i) {
        const std::span<const std::uint64_t> mask(masks.data() + i * words, words);
        const auto values = sorted.col(m0 + i);
        const double upper = values[nth_set_bit(mask, half)];
        if (p % 2 == 1) {
          out[m0 + i] = upper;
        } else {
          const double lower = values[nth_set_bit(mask, half - 1)];
          out[m0 + i] = (lower + upper) / 2.0;
        }
      }
    }
  });
  return y;
}

SoftMask soft_mask(const MagnitudeSpectrogram& x, const MagnitudeSpectrogram& y,
                   double lambda, double mag_floor) {
  if (!x.values.same_shape(y.values))
    throw ConfigError("mixture and estimate shapes differ");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(mag_floor > 0.0)) throw ConfigError("magnitude floor must be positive");

  SoftMask w{Matrix<double>(x.bins(), x.frames())};
  const auto xs = x.values.data();
  const auto ys = y.values.data();
  auto ws = w.values.data();
  const double denom = 2.0 * lambda * lambda;
  constexpr double kSmallest = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double diff =
        std::log(std::max(xs[i], mag_floor)) - std::log(std::max(ys[i], mag_floor));
    ws[i] = std::max(std::exp(-diff * diff / denom), kSmallest);
  }
  return w;
}

std::pair<Spectrogram, Spectrogram> apply_masks(const Spectrogram& c,
                                                const SoftMask& w) {
  if (c.bins.rows() != w.values.rows() || c.bins.cols() != w.values.cols())
    throw ConfigError("mask shape does not match the spectrogram");
  Spectrogram b = c;
  Spectrogram v = c;
  const auto src = c.bins.data();
  const auto ws = w.values.data();
  auto bs = b.bins.data();
  auto vs = v.bins.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    bs[i] = ws[i] * src[i];
    vs[i] = (1.0 - ws[i]) * src[i];
  }
  return {std::move(b), std::move(v)};
}

namespace {

Spectrogram checked_stft(std::span<const double> signal,
                         const StftParams& params) {
  if (signal.size() < params.fft_size)
    throw ConfigError("input of " + std::to_string(signal.size()) +
                      " samples is shorter than one FFT frame (" +
                      std::to_string(params.fft_size) + ")");
  return stft(signal, params);
}

}  // namespace

ChannelAnalysis::ChannelAnalysis(std::span<const double> signal,
                                 const StftParams& params)
    : spec_(checked_stft(signal, params)),
      mag_(magnitude(spec_)),
      single_(single_frame_distance(mag_)) {}

ChannelAnalysis::Output ChannelAnalysis::separate(
    std::size_t radius_frames, const SeparationConfig& config,
    bool retain) const {
  const std::size_t frames = mag_.frames();
  std::size_t p = config.neighbors;
  if (p > frames) {
    log_warning("neighbor count " + std::to_string(p) + " clamped to the " +
                std::to_string(frames) + " available frames");
    p = frames;
  }

  const DistanceMatrix context = group_distance_fast(single_, radius_frames);
  const NeighborTable table = nearest_frames(context, p);
  MagnitudeSpectrogram estimate = median_estimate(mag_, table);
  SoftMask mask = soft_mask(mag_, estimate, config.lambda, config.mag_floor);
  auto [accomp, vocal] = apply_masks(spec_, mask);

  Output out;
  out.accompaniment = istft(accomp);
  out.vocals = istft(vocal);
  out.neighbors_used = p;
  if (retain) {
    out.mask = std::move(mask);
    out.estimate = std::move(estimate);
  }
  return out;
}

SeparationResult separate(const AudioBuffer& mixture,
                          const SeparationConfig& config) {
  if (mixture.channels() == 0 || mixture.frames() == 0)
    throw ConfigError("empty mixture");
  SeparationConfig cfg = config;
  cfg.stft.sample_rate = mixture.sample_rate();
  cfg.validate();

  const AudioBuffer input = cfg.downmix ? to_mono(mixture) : mixture;
  const std::size_t radius = cfg.radius_frames();

  SeparationResult result;
  result.radius_frames = radius;
  std::vector<std::vector<double>> accomp;
  std::vector<std::vector<double>> vocals;
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const ChannelAnalysis analysis(input.channel(c), cfg.stft);
    auto out = analysis.separate(radius, cfg, cfg.retain_intermediates);
    accomp.push_back(std::move(out.accompaniment));
    vocals.push_back(std::move(out.vocals));
    result.neighbors_used = out.neighbors_used;
    if (out.mask) result.masks.push_back(std::move(*out.mask));
    if (out.estimate)
      result.accompaniment_estimates.push_back(std::move(*out.estimate));
  }
  result.accompaniment = AudioBuffer(std::move(accomp), input.sample_rate());
  result.vocals = AudioBuffer(std::move(vocals), input.sample_rate());
  return result;
}

}  // namespace kam
