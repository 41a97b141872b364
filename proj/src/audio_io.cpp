#include "kam/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "kam/errors.hpp"

namespace kam {

AudioBuffer::AudioBuffer(std::vector<std::vector<double>> channels,
                         unsigned sample_rate)
    : samples_(std::move(channels)), sample_rate_(sample_rate) {
  if (samples_.empty()) throw ConfigError("audio buffer needs a channel");
  if (sample_rate_ == 0) throw ConfigError("sample rate must be positive");
  const auto n = samples_.front().size();
  for (const auto& ch : samples_)
    if (ch.size() != n) throw ConfigError("channel lengths differ");
}

AudioBuffer AudioBuffer::mono(std::vector<double> samples,
                              unsigned sample_rate) {
  std::vector<std::vector<double>> ch;
  ch.push_back(std::move(samples));
  return AudioBuffer(std::move(ch), sample_rate);
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct Format {
  std::uint16_t code = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    return IoError(path.string() + ": " + why);
  };

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  Format fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = get_u32(chunk + 4);
    const std::size_t available = bytes.size() - (pos + 8);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > available) throw fail("truncated fmt chunk");
      fmt.code = get_u16(chunk + 8);
      fmt.channels = get_u16(chunk + 10);
      fmt.sample_rate = get_u32(chunk + 12);
      fmt.bits = get_u16(chunk + 22);
      if (fmt.code == kFormatExtensible) {
        if (size < 40) throw fail("truncated extensible fmt chunk");
        // The first two bytes of the subformat GUID carry the format code.
        fmt.code = get_u16(chunk + 32);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      // Streaming writers sometimes leave the size oversized; keep what exists.
      data_size = std::min(size, available);
      break;
    }
    pos += 8 + size + (size & 1);
  }

  if (!have_fmt) throw fail("missing fmt chunk");
  if (data == nullptr) throw fail("missing data chunk");
  if (fmt.channels < 1 || fmt.channels > 2)
    throw fail("unsupported channel count " + std::to_string(fmt.channels));
  if (fmt.sample_rate == 0) throw fail("zero sample rate");

  const bool pcm16 = fmt.code == kFormatPcm && fmt.bits == 16;
  const bool pcm24 = fmt.code == kFormatPcm && fmt.bits == 24;
  const bool f32 = fmt.code == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !pcm24 && !f32)
    throw fail("unsupported codec " + std::to_string(fmt.code) + " with " +
               std::to_string(fmt.bits) + " bits");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw fail("no audio samples");

  std::vector<std::vector<double>> channels(fmt.channels,
                                            std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(get_u16(p)) / 32768.0;
      } else if (pcm24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = std::bit_cast<float>(get_u32(p));
      }
      channels[c][i] = v;
    }
  }
  return AudioBuffer(std::move(channels), fmt.sample_rate);
}

WriteReport write_wav(const std::filesystem::path& path,
                      const AudioBuffer& buffer, SampleFormat format) {
  if (buffer.channels() == 0 || buffer.sample_rate() == 0)
    throw ConfigError("cannot write an empty audio buffer");

  const std::uint16_t bits = format == SampleFormat::Pcm16   ? 16
                             : format == SampleFormat::Pcm24 ? 24
                                                             : 32;
  const std::uint16_t code =
      format == SampleFormat::Float32 ? kFormatFloat : kFormatPcm;
  const auto channels = static_cast<std::uint16_t>(buffer.channels());
  const std::uint16_t block_align = channels * (bits / 8);
  const std::size_t data_bytes = buffer.frames() * block_align;
  if (data_bytes > 0xFFFFFFF0u) throw ConfigError("audio too long for WAV");

  std::vector<std::uint8_t> out;
  out.reserve(data_bytes + 64);
  const std::uint32_t fmt_size = code == kFormatFloat ? 18 : 16;
  const std::uint32_t fact_bytes = code == kFormatFloat ? 12 : 0;
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(4 + 8 + fmt_size + fact_bytes + 8 +
                                          data_bytes + (data_bytes & 1)));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, fmt_size);
  put_u16(out, code);
  put_u16(out, channels);
  put_u32(out, buffer.sample_rate());
  put_u32(out, buffer.sample_rate() * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  if (code == kFormatFloat) {
    put_u16(out, 0);
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(buffer.frames()));
  }
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_bytes));

  WriteReport report;
  const double scale = format == SampleFormat::Pcm16 ? 32768.0 : 8388608.0;
  for (std::size_t i = 0; i < buffer.frames(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      double v = buffer.channel(c)[i];
      if (std::isnan(v)) {
        v = 0.0;
        ++report.clipped_samples;
      } else if (format != SampleFormat::Float32 && std::abs(v) > 1.0) {
        ++report.clipped_samples;
      }
      if (format == SampleFormat::Float32) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        continue;
      }
      const double q =
          std::clamp(std::round(v * scale), -scale, scale - 1.0);
      const auto s = static_cast<std::int32_t>(q);
      if (format == SampleFormat::Pcm16) {
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
      } else {
        const auto u = static_cast<std::uint32_t>(s);
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
      }
    }
  }
  if (data_bytes & 1) out.push_back(0);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
  return report;
}

AudioBuffer to_mono(const AudioBuffer& buffer) {
  if (buffer.channels() == 1) return buffer;
  std::vector<double> mix(buffer.frames(), 0.0);
  for (const auto& ch : buffer.samples())
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += ch[i];
  const double n = static_cast<double>(buffer.channels());
  for (auto& v : mix) v /= n;
  return AudioBuffer::mono(std::move(mix), buffer.sample_rate());
}

}  // namespace kam
