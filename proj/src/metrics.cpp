#include "kam/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "kam/errors.hpp"

namespace kam {
namespace {

struct Aligned {
  std::vector<double> reference;
  std::vector<double> estimate;
};

// Channels concatenated; estimate trimmed or zero-padded per channel.
Aligned align(const AudioBuffer& reference, const AudioBuffer& estimate) {
  if (reference.channels() != estimate.channels())
    throw ConfigError("reference and estimate channel counts differ");
  if (reference.sample_rate() != estimate.sample_rate())
    throw ConfigError("reference and estimate sample rates differ");
  const std::size_t n = reference.frames();
  Aligned out;
  out.reference.reserve(n * reference.channels());
  out.estimate.reserve(n * reference.channels());
  for (std::size_t c = 0; c < reference.channels(); ++c) {
    const auto& s = reference.channel(c);
    const auto& e = estimate.channel(c);
    out.reference.insert(out.reference.end(), s.begin(), s.end());
    for (std::size_t i = 0; i < n; ++i)
      out.estimate.push_back(i < e.size() ? e[i] : 0.0);
  }
  return out;
}

double energy(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double ratio_db(double signal, double noise) {
  if (signal == 0.0) return -std::numeric_limits<double>::infinity();
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

}  // namespace

EvalScore sdr(const AudioBuffer& reference, const AudioBuffer& estimate) {
  const Aligned a = align(reference, estimate);
  const double target = energy(a.reference);
  if (target == 0.0) throw NumericalError("reference signal is silent");
  double noise = 0.0;
  for (std::size_t i = 0; i < a.reference.size(); ++i) {
    const double d = a.reference[i] - a.estimate[i];
    noise += d * d;
  }
  return {ratio_db(target, noise), false};
}

EvalScore si_sdr(const AudioBuffer& reference, const AudioBuffer& estimate) {
  const Aligned a = align(reference, estimate);
  const double ref_energy = energy(a.reference);
  if (ref_energy == 0.0) throw NumericalError("reference signal is silent");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.reference.size(); ++i)
    dot += a.estimate[i] * a.reference[i];
  const double alpha = dot / ref_energy;

  double target = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < a.reference.size(); ++i) {
    const double t = alpha * a.reference[i];
    const double d = a.estimate[i] - t;
    target += t * t;
    noise += d * d;
  }
  return {ratio_db(target, noise), true};
}

}  // namespace kam
