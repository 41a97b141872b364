#include "kam/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <type_traits>

#include "kam/errors.hpp"
#include "kam/parallel.hpp"

namespace kam {
namespace {

// FFTW's planner is not thread-safe; execution with new-array calls is.
std::mutex planner_mutex;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(p);
  }
};

using RealBuf = std::unique_ptr<double[], FftwFree>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

RealBuf alloc_real(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
ComplexBuf alloc_complex(std::size_t n) {
  return ComplexBuf(fftw_alloc_complex(n));
}

Plan forward_plan(std::size_t n) {
  auto in = alloc_real(n);
  auto out = alloc_complex(n / 2 + 1);
  std::lock_guard lock(planner_mutex);
  return Plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(),
                                   FFTW_ESTIMATE));
}

Plan inverse_plan(std::size_t n) {
  auto in = alloc_complex(n / 2 + 1);
  auto out = alloc_real(n);
  std::lock_guard lock(planner_mutex);
  return Plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(),
                                   FFTW_ESTIMATE));
}

constexpr std::size_t kFramesPerTask = 8;

// Signed start sample of frame t.
std::ptrdiff_t frame_start(const StftParams& p, std::size_t t) {
  return static_cast<std::ptrdiff_t>(t * p.hop) -
         static_cast<std::ptrdiff_t>(p.fft_size / 2);
}

}  // namespace

WindowType parse_window(std::string_view name) {
  if (name == "hann") return WindowType::Hann;
  if (name == "hamming") return WindowType::Hamming;
  if (name == "rect" || name == "rectangular") return WindowType::Rectangular;
  throw ConfigError("unknown window: " + std::string(name));
}

std::string_view window_name(WindowType type) {
  switch (type) {
    case WindowType::Hann:
      return "hann";
    case WindowType::Hamming:
      return "hamming";
    case WindowType::Rectangular:
      return "rect";
  }
  return "unknown";
}

std::vector<double> make_window(WindowType type, std::size_t length) {
  std::vector<double> w(length, 1.0);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double c = std::cos(step * static_cast<double>(n));
    if (type == WindowType::Hann) w[n] = 0.5 - 0.5 * c;
    if (type == WindowType::Hamming) w[n] = 0.54 - 0.46 * c;
  }
  return w;
}

std::size_t StftParams::frames_for(std::size_t length) const {
  return 1 + (length + hop - 1) / hop;
}

void StftParams::validate() const {
  if (fft_size < 2 || !std::has_single_bit(fft_size))
    throw ConfigError("fft size must be a power of two >= 2, got " +
                      std::to_string(fft_size));
  if (hop == 0 || hop > fft_size)
    throw ConfigError("hop must be in (0, fft_size], got " +
                      std::to_string(hop));
  if (sample_rate == 0) throw ConfigError("sample rate must be positive");

  const auto w = make_window(window, fft_size);
  double floor = INFINITY;
  for (std::size_t n = 0; n < hop; ++n) {
    double acc = 0.0;
    for (std::size_t i = n; i < fft_size; i += hop) acc += w[i] * w[i];
    floor = std::min(floor, acc);
  }
  if (floor < 1e-12)
    throw ConfigError("window " + std::string(window_name(window)) +
                      " with hop " + std::to_string(hop) +
                      " cannot be inverted by overlap-add");
}

Spectrogram stft(std::span<const double> signal, const StftParams& params) {
  params.validate();
  if (signal.empty()) throw ConfigError("cannot transform an empty signal");

  const std::size_t n_fft = params.fft_size;
  const std::size_t frames = params.frames_for(signal.size());
  const auto window = make_window(params.window, n_fft);
  const auto plan = forward_plan(n_fft);
  const auto len = static_cast<std::ptrdiff_t>(signal.size());

  Spectrogram spec{Matrix<std::complex<double>>(params.bins(), frames), params,
                   signal.size()};
  const std::size_t tasks = (frames + kFramesPerTask - 1) / kFramesPerTask;
  parallel_for(0, tasks, [&](std::size_t task) {
    auto in = alloc_real(n_fft);
    auto out = alloc_complex(params.bins());
    const std::size_t end = std::min(frames, (task + 1) * kFramesPerTask);
    for (std::size_t t = task * kFramesPerTask; t < end; ++t) {
      const std::ptrdiff_t start = frame_start(params, t);
      for (std::size_t n = 0; n < n_fft; ++n) {
        const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(n);
        in[n] = (s >= 0 && s < len) ? signal[s] * window[n] : 0.0;
      }
      fftw_execute_dft_r2c(plan.get(), in.get(), out.get());
      auto col = spec.bins.col(t);
      for (std::size_t m = 0; m < col.size(); ++m)
        col[m] = {out[m][0], out[m][1]};
    }
  });
  return spec;
}

Spectrogram stft(const AudioBuffer& buffer, const StftParams& params) {
  if (buffer.channels() != 1)
    throw ConfigError("stft expects a single-channel buffer");
  if (buffer.sample_rate() != params.sample_rate)
    throw ConfigError("buffer sample rate does not match stft parameters");
  return stft(buffer.channel(0), params);
}

std::vector<double> istft(const Spectrogram& spec) {
  const StftParams& params = spec.params;
  params.validate();
  const std::size_t n_fft = params.fft_size;
  const std::size_t frames = spec.bins.cols();
  if (spec.bins.rows() != params.bins())
    throw ConfigError("spectrogram bin count does not match fft size");

  const auto window = make_window(params.window, n_fft);
  const auto plan = inverse_plan(n_fft);

  // Windowed inverse frames first, then a sequential overlap-add so the
  // summation order is fixed.
  Matrix<double> segments(n_fft, frames);
  const double scale = 1.0 / static_cast<double>(n_fft);
  const std::size_t tasks = (frames + kFramesPerTask - 1) / kFramesPerTask;
  parallel_for(0, tasks, [&](std::size_t task) {
    auto in = alloc_complex(params.bins());
    auto out = alloc_real(n_fft);
    const std::size_t end = std::min(frames, (task + 1) * kFramesPerTask);
    for (std::size_t t = task * kFramesPerTask; t < end; ++t) {
      const auto col = spec.bins.col(t);
      for (std::size_t m = 0; m < col.size(); ++m) {
        in[m][0] = col[m].real();
        in[m][1] = col[m].imag();
      }
      fftw_execute_dft_c2r(plan.get(), in.get(), out.get());
      auto seg = segments.col(t);
      for (std::size_t n = 0; n < n_fft; ++n)
        seg[n] = out[n] * scale * window[n];
    }
  });

  const auto len = static_cast<std::ptrdiff_t>(spec.original_length);
  std::vector<double> signal(spec.original_length, 0.0);
  std::vector<double> norm(spec.original_length, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = frame_start(params, t);
    const auto seg = segments.col(t);
    for (std::size_t n = 0; n < n_fft; ++n) {
      const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(n);
      if (s < 0 || s >= len) continue;
      signal[s] += seg[n];
      norm[s] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (norm[i] < 1e-12)
      throw NumericalError("overlap-add normalization vanishes at sample " +
                           std::to_string(i));
    signal[i] /= norm[i];
  }
  return signal;
}

MagnitudeSpectrogram MagnitudeSpectrogram::from_values(Matrix<double> values,
                                                       StftParams params) {
  for (double v : values.data())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("magnitudes must be finite and nonnegative");
  return {std::move(values), params};
}

MagnitudeSpectrogram magnitude(const Spectrogram& spec) {
  Matrix<double> values(spec.bins.rows(), spec.bins.cols());
  const auto src = spec.bins.data();
  auto dst = values.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]);
  return {std::move(values), spec.params};
}

}  // namespace kam
