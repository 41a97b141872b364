#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kam/audio_io.hpp"
#include "kam/separation.hpp"

namespace kam {

// Radii in ms sampled by the reference temporal-context sweep.
const std::vector<double>& default_sweep_radii_ms();

struct SweepClip {
  std::string name;
  AudioBuffer mixture;
  AudioBuffer vocals;
  AudioBuffer accompaniment;
};

struct SweepRow {
  double radius_ms = 0.0;
  std::size_t radius_frames = 0;
  double vocal_sdr_db = 0.0;
  double accomp_sdr_db = 0.0;
};

struct ClipRow {
  std::string clip;
  SweepRow row;
};

struct SweepReport {
  // Sorted by radius, one per distinct radius, radius 0 always present.
  std::vector<SweepRow> rows;
  std::vector<ClipRow> per_clip;
};

// Loads mixture.wav / vocals.wav / accompaniment.wav either from `dir` itself
// or from each immediate subdirectory that holds a mixture.wav, in name order.
// Throws IoError when the set is empty or a reference is missing.
std::vector<SweepClip> load_sweep_clips(const std::filesystem::path& dir);

// Separates every clip at every radius and averages plain SDR over clips.
SweepReport run_sweep(const std::vector<SweepClip>& clips,
                      std::vector<double> radii_ms,
                      const SeparationConfig& config);

void write_sweep_csv(std::ostream& out, const SweepReport& report);
void write_per_clip_csv(std::ostream& out, const SweepReport& report);

}  // namespace kam
