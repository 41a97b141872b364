#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kam/audio_io.hpp"
#include "kam/matrix.hpp"

namespace kam {

enum class WindowType { Hann, Hamming, Rectangular };

WindowType parse_window(std::string_view name);
std::string_view window_name(WindowType type);

// Periodic window of the given length.
std::vector<double> make_window(WindowType type, std::size_t length);

struct StftParams {
  std::size_t fft_size = 4096;
  std::size_t hop = 2048;
  WindowType window = WindowType::Hann;
  unsigned sample_rate = 44100;

  std::size_t bins() const { return fft_size / 2 + 1; }
  // Frames covering a signal of `length` samples with centered framing.
  std::size_t frames_for(std::size_t length) const;

  // fft_size a power of two, 0 < hop <= fft_size, sample_rate > 0, and the
  // overlapped squared window stays above 1e-12 everywhere so the weighted
  // overlap-add inverse is defined. Throws ConfigError.
  void validate() const;

  friend bool operator==(const StftParams&, const StftParams&) = default;
};

// Complex one-sided spectrogram, bins() x frames.
struct Spectrogram {
  Matrix<std::complex<double>> bins;
  StftParams params;
  std::size_t original_length = 0;
};

// Frame t is centered on sample t * hop; samples outside the signal are zero.
Spectrogram stft(std::span<const double> signal, const StftParams& params);
Spectrogram stft(const AudioBuffer& buffer, const StftParams& params);

// Weighted overlap-add with squared-window normalization, trimmed to
// original_length. Throws NumericalError when the normalization drops below
// 1e-12 at any output sample.
std::vector<double> istft(const Spectrogram& spec);

// Nonnegative magnitudes, frames as columns.
struct MagnitudeSpectrogram {
  Matrix<double> values;
  StftParams params;

  std::size_t bins() const { return values.rows(); }
  std::size_t frames() const { return values.cols(); }

  // Throws ConfigError on any negative or non-finite entry.
  static MagnitudeSpectrogram from_values(Matrix<double> values,
                                          StftParams params = {});
};

MagnitudeSpectrogram magnitude(const Spectrogram& spec);

}  // namespace kam
