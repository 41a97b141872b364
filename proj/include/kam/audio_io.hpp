#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace kam {

// Time-domain audio, one sample vector per channel, double precision.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Throws ConfigError when channels differ in length, there are no channels,
  // or sample_rate is zero.
  AudioBuffer(std::vector<std::vector<double>> channels, unsigned sample_rate);

  static AudioBuffer mono(std::vector<double> samples, unsigned sample_rate);

  std::size_t channels() const { return samples_.size(); }
  std::size_t frames() const {
    return samples_.empty() ? 0 : samples_.front().size();
  }
  unsigned sample_rate() const { return sample_rate_; }
  double duration_s() const {
    return static_cast<double>(frames()) / sample_rate_;
  }

  const std::vector<double>& channel(std::size_t c) const {
    return samples_.at(c);
  }
  const std::vector<std::vector<double>>& samples() const { return samples_; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<std::vector<double>> samples_;
  unsigned sample_rate_ = 0;
};

enum class SampleFormat { Pcm16, Pcm24, Float32 };

struct WriteReport {
  std::size_t clipped_samples = 0;
};

// Reads RIFF/WAVE with PCM16, PCM24 or IEEE float32 samples, 1 or 2 channels.
// Integer samples are divided by 2^(bits-1).
AudioBuffer read_wav(const std::filesystem::path& path);

// Integer formats clamp to the representable range; every sample with
// |x| > 1 (or NaN) is counted in the returned report. Float32 writes values
// as-is apart from NaN, which is written as 0 and counted.
WriteReport write_wav(const std::filesystem::path& path,
                      const AudioBuffer& buffer, SampleFormat format);

// Mean over channels.
AudioBuffer to_mono(const AudioBuffer& buffer);

}  // namespace kam
