#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "kam/audio_io.hpp"
#include "kam/kernel.hpp"
#include "kam/matrix.hpp"
#include "kam/stft.hpp"

namespace kam {

struct SeparationConfig {
  StftParams stft;
  std::size_t neighbors = 100;
  double radius_ms = 372.0;
  double lambda = 1.0;
  double mag_floor = 1e-10;
  // Downmix to mono before separating instead of running per channel.
  bool downmix = false;
  // Keep W and Y for every processed channel in the result.
  bool retain_intermediates = false;

  // Throws ConfigError.
  void validate() const;
  // round(radius_ms / 1000 * sample_rate / hop).
  std::size_t radius_frames() const;
};

// Soft mask values in (0, 1].
struct SoftMask {
  Matrix<double> values;
};

struct SeparationResult {
  AudioBuffer accompaniment;
  AudioBuffer vocals;
  std::size_t radius_frames = 0;
  std::size_t neighbors_used = 0;
  // One entry per processed channel when retain_intermediates is set.
  std::vector<SoftMask> masks;
  std::vector<MagnitudeSpectrogram> accompaniment_estimates;
};

// Y[m][k] = median of X[m][j] over the neighbors j of frame k. For an even
// neighbor count the two central order statistics are averaged.
MagnitudeSpectrogram median_estimate(const MagnitudeSpectrogram& x,
                                     const NeighborTable& neighbors);

// W = exp(-(log max(X, floor) - log max(Y, floor))^2 / (2 lambda^2)),
// bounded below by the smallest normal double so W never reaches 0.
SoftMask soft_mask(const MagnitudeSpectrogram& x, const MagnitudeSpectrogram& y,
                   double lambda, double mag_floor);

// (W * C, (1 - W) * C), elementwise.
std::pair<Spectrogram, Spectrogram> apply_masks(const Spectrogram& c,
                                                const SoftMask& w);

// Analysis of one channel that does not depend on the context radius. Lets a
// radius sweep reuse the transform and the single-frame distances.
class ChannelAnalysis {
 public:
  ChannelAnalysis(std::span<const double> signal, const StftParams& params);

  const Spectrogram& spectrogram() const { return spec_; }
  const MagnitudeSpectrogram& magnitudes() const { return mag_; }
  const DistanceMatrix& single_frame() const { return single_; }

  struct Output {
    std::vector<double> accompaniment;
    std::vector<double> vocals;
    std::size_t neighbors_used = 0;
    std::optional<SoftMask> mask;
    std::optional<MagnitudeSpectrogram> estimate;
  };

  // Neighbor counts above the frame count are clamped with a warning.
  Output separate(std::size_t radius_frames, const SeparationConfig& config,
                  bool retain) const;

 private:
  Spectrogram spec_;
  MagnitudeSpectrogram mag_;
  DistanceMatrix single_;
};

// One pass of median-kernel separation. Channels are processed independently
// unless config.downmix is set. Throws ConfigError when the input is shorter
// than one FFT frame.
SeparationResult separate(const AudioBuffer& mixture,
                          const SeparationConfig& config);

}  // namespace kam
