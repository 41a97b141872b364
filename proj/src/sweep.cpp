#include "kam/sweep.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "kam/errors.hpp"
#include "kam/metrics.hpp"

namespace kam {

const std::vector<double>& default_sweep_radii_ms() {
  static const std::vector<double> radii = {0,   93,  139, 232, 325,  372,  464,
                                            604, 697, 789, 929, 1161, 1393, 1626};
  return radii;
}

namespace {

SweepClip load_clip(const std::filesystem::path& dir) {
  const auto need = [&](const char* name) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p))
      throw IoError("missing " + p.string());
    return read_wav(p);
  };
  return {dir.filename().string(), need("mixture.wav"), need("vocals.wav"),
          need("accompaniment.wav")};
}

AudioBuffer as_channels(const AudioBuffer& b, bool downmix) {
  return downmix ? to_mono(b) : b;
}

}  // namespace

std::vector<SweepClip> load_sweep_clips(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError(dir.string() + " is not a directory");
  if (std::filesystem::exists(dir / "mixture.wav")) return {load_clip(dir)};

  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "mixture.wav"))
      subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty())
    throw IoError("no mixture.wav found in " + dir.string());

  std::vector<SweepClip> clips;
  for (const auto& d : subdirs) clips.push_back(load_clip(d));
  return clips;
}

SweepReport run_sweep(const std::vector<SweepClip>& clips,
                      std::vector<double> radii_ms,
                      const SeparationConfig& config) {
  if (clips.empty()) throw ConfigError("sweep needs at least one clip");
  radii_ms.push_back(0.0);
  for (double r : radii_ms)
    if (!(r >= 0.0)) throw ConfigError("radii must be nonnegative");
  std::sort(radii_ms.begin(), radii_ms.end());
  radii_ms.erase(std::unique(radii_ms.begin(), radii_ms.end()), radii_ms.end());

  SweepReport report;
  for (double r : radii_ms) {
    SeparationConfig cfg = config;
    cfg.radius_ms = r;
    cfg.stft.sample_rate = clips.front().mixture.sample_rate();
    report.rows.push_back({r, cfg.radius_frames(), 0.0, 0.0});
  }

  for (const auto& clip : clips) {
    SeparationConfig cfg = config;
    cfg.stft.sample_rate = clip.mixture.sample_rate();
    cfg.validate();
    const AudioBuffer mixture = as_channels(clip.mixture, cfg.downmix);
    const AudioBuffer vocals_ref = as_channels(clip.vocals, cfg.downmix);
    const AudioBuffer accomp_ref = as_channels(clip.accompaniment, cfg.downmix);

    std::vector<ChannelAnalysis> analyses;
    for (std::size_t c = 0; c < mixture.channels(); ++c)
      analyses.emplace_back(mixture.channel(c), cfg.stft);

    for (std::size_t i = 0; i < radii_ms.size(); ++i) {
      cfg.radius_ms = radii_ms[i];
      const std::size_t frames = cfg.radius_frames();
      std::vector<std::vector<double>> accomp;
      std::vector<std::vector<double>> vocals;
      for (const auto& a : analyses) {
        auto out = a.separate(frames, cfg, false);
        accomp.push_back(std::move(out.accompaniment));
        vocals.push_back(std::move(out.vocals));
      }
      const AudioBuffer accomp_est(std::move(accomp), mixture.sample_rate());
      const AudioBuffer vocals_est(std::move(vocals), mixture.sample_rate());
      const SweepRow row{radii_ms[i], frames,
                         sdr(vocals_ref, vocals_est).sdr_db,
                         sdr(accomp_ref, accomp_est).sdr_db};
      report.per_clip.push_back({clip.name, row});
      report.rows[i].vocal_sdr_db += row.vocal_sdr_db;
      report.rows[i].accomp_sdr_db += row.accomp_sdr_db;
    }
  }

  const double n = static_cast<double>(clips.size());
  for (auto& row : report.rows) {
    row.vocal_sdr_db /= n;
    row.accomp_sdr_db /= n;
  }
  return report;
}

namespace {

void write_row(std::ostream& out, const SweepRow& row) {
  out << row.radius_ms << ',' << row.radius_frames << ',' << std::fixed
      << std::setprecision(6) << row.vocal_sdr_db << ',' << row.accomp_sdr_db
      << std::defaultfloat << std::setprecision(6) << '\n';
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "radius_ms,radius_frames,vocal_sdr_db,accomp_sdr_db\n";
  for (const auto& row : report.rows) write_row(out, row);
}

void write_per_clip_csv(std::ostream& out, const SweepReport& report) {
  out << "clip,radius_ms,radius_frames,vocal_sdr_db,accomp_sdr_db\n";
  for (const auto& c : report.per_clip) {
    out << c.clip << ',';
    write_row(out, c.row);
  }
}

}  // namespace kam
