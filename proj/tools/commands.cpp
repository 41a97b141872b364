#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kam/audio_io.hpp"
#include "kam/errors.hpp"
#include "kam/kernel.hpp"
#include "kam/matrix_io.hpp"
#include "kam/metrics.hpp"
#include "kam/separation.hpp"
#include "kam/stft.hpp"
#include "kam/sweep.hpp"
#include "kam/synth.hpp"

namespace kamsep {
namespace {

namespace fs = std::filesystem;

struct SeparationFlags {
  kam::SeparationConfig config;
  std::string window = "hann";
  int threads = 0;

  kam::SeparationConfig resolve() const {
    kam::SeparationConfig c = config;
    c.stft.window = kam::parse_window(window);
    return c;
  }
};

void add_separation_flags(CLI::App* cmd, SeparationFlags& f) {
  cmd->add_option("--fft-size", f.config.stft.fft_size, "FFT size (power of two)")
      ->capture_default_str();
  cmd->add_option("--hop", f.config.stft.hop, "Hop size in samples")
      ->capture_default_str();
  cmd->add_option("--window", f.window, "Analysis window: hann, hamming, rect")
      ->capture_default_str();
  cmd->add_option("-P,--neighbors", f.config.neighbors,
                  "Similar frames fed to the median")
      ->capture_default_str();
  cmd->add_option("--lambda", f.config.lambda, "Mask width on log magnitudes")
      ->capture_default_str();
  cmd->add_option("--mag-floor", f.config.mag_floor,
                  "Magnitude floor applied before the logarithm")
      ->capture_default_str();
  cmd->add_flag("--mono", f.config.downmix, "Downmix to mono before separating");
  cmd->add_option("--threads", f.threads,
                  "Worker threads (overrides KAMSEP_THREADS)");
}

void apply_threads(int threads) {
  if (threads > 0) setenv("KAMSEP_THREADS", std::to_string(threads).c_str(), 1);
}

kam::SampleFormat parse_depth(const std::string& depth) {
  if (depth == "16") return kam::SampleFormat::Pcm16;
  if (depth == "24") return kam::SampleFormat::Pcm24;
  if (depth == "float32" || depth == "32") return kam::SampleFormat::Float32;
  throw kam::ConfigError("unsupported bit depth: " + depth);
}

void write_audio(const fs::path& path, const kam::AudioBuffer& buffer,
                 kam::SampleFormat format, std::ostream& err) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto report = kam::write_wav(path, buffer, format);
  if (report.clipped_samples > 0)
    err << "warning: " << report.clipped_samples << " samples clipped in "
        << path.string() << '\n';
}

std::string format_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << db;
  return s.str();
}

nlohmann::json json_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  return db;
}

struct SeparateArgs {
  SeparationFlags flags;
  std::string input;
  std::string vocals;
  std::string accompaniment;
  std::string bit_depth = "float32";
  std::string dump_dir;
  long dump_row = -1;
};

int cmd_separate(const SeparateArgs& a, std::ostream& out, std::ostream& err) {
  apply_threads(a.flags.threads);
  kam::SeparationConfig config = a.flags.resolve();
  config.retain_intermediates = !a.dump_dir.empty();
  const auto format = parse_depth(a.bit_depth);

  const auto start = std::chrono::steady_clock::now();
  const kam::AudioBuffer mixture = kam::read_wav(a.input);
  const auto result = kam::separate(mixture, config);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  write_audio(a.vocals, result.vocals, format, err);
  write_audio(a.accompaniment, result.accompaniment, format, err);

  if (!a.dump_dir.empty()) {
    const fs::path dir = a.dump_dir;
    fs::create_directories(dir);
    for (std::size_t c = 0; c < result.masks.size(); ++c) {
      const auto tag = "_ch" + std::to_string(c) + ".kmat";
      kam::write_matrix(dir / ("mask" + tag), result.masks[c].values);
      kam::write_matrix(dir / ("accompaniment_estimate" + tag),
                        result.accompaniment_estimates[c].values);
    }
    if (a.dump_row >= 0) {
      kam::SeparationConfig c = config;
      c.stft.sample_rate = mixture.sample_rate();
      const kam::AudioBuffer input =
          config.downmix ? kam::to_mono(mixture) : mixture;
      const kam::ChannelAnalysis analysis(input.channel(0), c.stft);
      const auto d =
          kam::group_distance_fast(analysis.single_frame(), result.radius_frames);
      std::ofstream csv(dir / ("distance_row_" + std::to_string(a.dump_row) +
                               "_ch0.csv"));
      if (!csv) throw kam::IoError("cannot write distance row dump");
      kam::write_distance_row_csv(csv, d, static_cast<std::size_t>(a.dump_row));
    }
  }

  out << "radius_frames: " << result.radius_frames << '\n'
      << "neighbors: " << result.neighbors_used << '\n'
      << "channels: " << result.vocals.channels() << '\n'
      << "duration_s: " << mixture.duration_s() << '\n'
      << "elapsed_s: " << std::fixed << std::setprecision(3) << elapsed
      << std::defaultfloat << '\n';
  return kOk;
}

struct SweepArgs {
  SeparationFlags flags;
  std::string data;
  std::string out = "-";
  std::string per_clip;
  std::vector<double> radii = kam::default_sweep_radii_ms();
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
  apply_threads(a.flags.threads);
  const auto config = a.flags.resolve();
  config.stft.validate();
  const auto clips = kam::load_sweep_clips(a.data);
  const auto report = kam::run_sweep(clips, a.radii, config);

  if (a.out == "-") {
    kam::write_sweep_csv(out, report);
  } else {
    std::ofstream csv(a.out);
    if (!csv) throw kam::IoError("cannot write " + a.out);
    kam::write_sweep_csv(csv, report);
  }
  if (!a.per_clip.empty()) {
    std::ofstream csv(a.per_clip);
    if (!csv) throw kam::IoError("cannot write " + a.per_clip);
    kam::write_per_clip_csv(csv, report);
  }
  return kOk;
}

struct EvaluateArgs {
  std::string reference;
  std::string estimate;
  bool json = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  const auto reference = kam::read_wav(a.reference);
  const auto estimate = kam::read_wav(a.estimate);
  const double plain = kam::sdr(reference, estimate).sdr_db;
  const double scale_invariant = kam::si_sdr(reference, estimate).sdr_db;
  if (a.json) {
    out << nlohmann::json{{"sdr_db", json_db(plain)},
                          {"si_sdr_db", json_db(scale_invariant)}}
               .dump()
        << '\n';
  } else {
    out << "sdr_db: " << format_db(plain) << '\n'
        << "si_sdr_db: " << format_db(scale_invariant) << '\n';
  }
  return kOk;
}

struct SynthArgs {
  kam::SynthSpec spec;
  std::string vocal_kind = "vibrato-tone";
  int count = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.count < 1) throw kam::ConfigError("count must be >= 1");
  kam::SynthSpec spec = a.spec;
  spec.vocal_kind = kam::parse_vocal_kind(a.vocal_kind);
  spec.validate();

  const fs::path root = a.out;
  for (int i = 0; i < a.count; ++i) {
    spec.seed = a.spec.seed + static_cast<std::uint64_t>(i);
    const auto triple = kam::generate(spec);
    std::ostringstream name;
    name << "clip_" << std::setw(3) << std::setfill('0') << i;
    const fs::path dir = root / name.str();
    fs::create_directories(dir);
    write_audio(dir / "mixture.wav", triple.mixture, kam::SampleFormat::Float32, err);
    write_audio(dir / "vocals.wav", triple.vocals, kam::SampleFormat::Float32, err);
    write_audio(dir / "accompaniment.wav", triple.accompaniment,
                kam::SampleFormat::Float32, err);
    out << dir.string() << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Vocal/accompaniment separation with temporal-context kernels",
               "kamsep"};
  app.require_subcommand(1);

  SeparateArgs sep;
  auto* separate = app.add_subcommand("separate", "Separate a mixture WAV");
  separate->add_option("-i,--input", sep.input, "Mixture WAV")->required();
  separate->add_option("--vocals", sep.vocals, "Vocal output WAV")->required();
  separate->add_option("--accompaniment", sep.accompaniment,
                       "Accompaniment output WAV")
      ->required();
  separate->add_option("--radius-ms", sep.flags.config.radius_ms,
                       "Temporal context radius in ms (0 = single frame)")
      ->capture_default_str();
  separate->add_option("--bit-depth", sep.bit_depth, "16, 24 or float32")
      ->capture_default_str();
  separate->add_option("--dump-dir", sep.dump_dir,
                       "Write mask and accompaniment estimate matrices here");
  separate->add_option("--dump-row", sep.dump_row,
                       "Also dump this frame's distance row as CSV")
      ->needs(separate->get_option("--dump-dir"));
  add_separation_flags(separate, sep.flags);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "SDR over a list of context radii");
  sweep->add_option("--data", sw.data, "Directory of reference triples")
      ->required();
  sweep->add_option("-o,--out", sw.out, "CSV output path ('-' for stdout)")
      ->capture_default_str();
  sweep->add_option("--radii", sw.radii, "Radii in ms, comma separated")
      ->delimiter(',');
  sweep->add_option("--per-clip", sw.per_clip, "Per-clip CSV output path");
  add_separation_flags(sweep, sw.flags);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "SDR of an estimate");
  evaluate->add_option("--reference", ev.reference, "Reference WAV")->required();
  evaluate->add_option("--estimate", ev.estimate, "Estimate WAV")->required();
  evaluate->add_flag("--json", ev.json, "Print a JSON object");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write synthetic reference triples");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--count", sy.count, "Number of clips")->capture_default_str();
  synth->add_option("--seed", sy.spec.seed, "Seed of the first clip")
      ->capture_default_str();
  synth->add_option("--duration-s", sy.spec.duration_s, "Clip length")
      ->capture_default_str();
  synth->add_option("--sample-rate", sy.spec.sample_rate, "Hz")
      ->capture_default_str();
  synth->add_option("--accomp-period-s", sy.spec.accomp_period_s,
                    "Accompaniment loop length")
      ->capture_default_str();
  synth->add_option("--vocal-gain-db", sy.spec.vocal_gain_db,
                    "Vocal level relative to the accompaniment (-inf mutes)")
      ->capture_default_str();
  synth->add_option("--vocal-kind", sy.vocal_kind,
                    "vibrato-tone, glide or pulsed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*separate) return cmd_separate(sep, out, err);
    if (*sweep) return cmd_sweep(sw, out, err);
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*synth) return cmd_synth(sy, out, err);
  } catch (const kam::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const kam::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const kam::NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kUsage;
}

}  // namespace kamsep
