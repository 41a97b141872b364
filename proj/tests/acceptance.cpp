// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if
// any criterion fails. argv[1] is the path of the kamsep executable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kam/kernel.hpp"
#include "kam/log.hpp"
#include "kam/separation.hpp"
#include "kam/stft.hpp"
#include "kam/sweep.hpp"
#include "kam/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace kam;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome stft_round_trip() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> dur(1.0, 10.0);
  const StftParams params;
  const auto start = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<std::size_t>(dur(rng) * 44100);
    const auto x = oracle::white_noise(n, rng);
    const auto y = istft(stft(x, params));
    worst = y.size() == x.size() ? std::max(worst, oracle::relative_l2(x, y)) : 1.0;
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-10 && elapsed < 10.0,
          fmt("20 signals, worst relative L2 %.3g, %.2f s", worst, elapsed)};
}

Outcome kernel_correctness() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> bins(1, 32), frames(1, 64), radius(0, 8);
  double worst_direct = 0.0, worst_fast = 0.0;
  bool exact = true;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = frames(rng);
    const std::size_t r = radius(rng);
    const auto raw = oracle::random_magnitudes(bins(rng), n, rng);
    const auto x = MagnitudeSpectrogram::from_values(raw);
    const auto single = single_frame_distance(x);
    const auto direct = group_distance(x, r);
    const auto fast = group_distance_fast(single, r);
    worst_direct = std::max(worst_direct,
                            oracle::max_relative_diff(oracle::group_distance(raw, r), direct.values));
    worst_fast = std::max(worst_fast, oracle::max_relative_diff(direct.values, fast.values));
    for (const auto* d : {&direct, &fast})
      for (std::size_t k = 0; k < n; ++k) {
        exact = exact && d->values(k, k) == 0.0;
        for (std::size_t l = 0; l < n; ++l)
          exact = exact && d->values(k, l) == d->values(l, k);
      }
    exact = exact && group_distance(x, 0).values == single.values &&
            group_distance_fast(single, 0).values == single.values;
  }
  return {worst_direct <= 1e-9 && worst_fast <= 1e-9 && exact,
          fmt("50 matrices, direct vs oracle %.3g, fast vs direct %.3g, exact checks %s",
              worst_direct, worst_fast, exact ? "hold" : "broken")};
}

Outcome neighbor_selection() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> frames(1, 200);
  std::size_t mismatches = 0, ties = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = frames(rng);
    // Every other matrix draws from four levels only, forcing ties.
    const bool coarse = i % 2 == 0;
    std::uniform_int_distribution<int> level(1, 4);
    std::uniform_real_distribution<double> fine(0.0, 1.0);
    DistanceMatrix d;
    d.values = Matrix<double>(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = k + 1; l < n; ++l)
        d.values(k, l) = d.values(l, k) = coarse ? level(rng) : fine(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    const auto table = nearest_frames(d, p);
    for (std::size_t k = 0; k < n; ++k) {
      const auto expected = oracle::nearest_row(d.values, k, p);
      if (!std::equal(expected.begin(), expected.end(), table.row(k).begin()))
        ++mismatches;
      if (coarse && p > 2 && d.values(k, expected[p - 1]) == d.values(k, expected[p - 2]))
        ++ties;
    }
  }
  return {mismatches == 0 && ties > 0,
          fmt("50 matrices, %zu mismatched rows, %zu rows with ties at the cut", mismatches,
              ties)};
}

Outcome median_robustness() {
  std::mt19937_64 rng(104);
  std::size_t wrong = 0, checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t bins = 1 + rng() % 100, frames = 60, p = 2 + rng() % 40;
    const std::size_t max_bad = (p - 1) / 2;  // strictly fewer than half
    std::vector<double> clean(bins);
    for (auto& v : clean) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Matrix<double> x(bins, frames);
    // The first half of the frames is clean, the second half corrupted at a
    // random subset of bins.
    std::vector<bool> corrupted_bin(bins);
    for (std::size_t m = 0; m < bins; ++m) corrupted_bin[m] = rng() % 2;
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t m = 0; m < bins; ++m) {
        const bool bad = t >= frames / 2 && corrupted_bin[m];
        x(m, t) = bad ? clean[m] * (rng() % 2 ? 1e3 : 0.0) + (rng() % 7) : clean[m];
      }
    NeighborTable table(frames, p);
    for (std::size_t k = 0; k < frames; ++k) {
      const std::size_t bad = rng() % (max_bad + 1);
      std::vector<std::size_t> row;
      for (std::size_t i = 0; i < bad; ++i) row.push_back(frames / 2 + rng() % (frames / 2));
      while (row.size() < p) row.push_back(rng() % (frames / 2));
      std::shuffle(row.begin(), row.end(), rng);
      std::copy(row.begin(), row.end(), table.row(k).begin());
    }
    const auto y = median_estimate(MagnitudeSpectrogram::from_values(x), table);
    for (std::size_t k = 0; k < frames; ++k)
      for (std::size_t m = 0; m < bins; ++m, ++checked)
        if (y.values(m, k) != clean[m]) ++wrong;
  }
  return {wrong == 0, fmt("%zu of %zu estimates differ from the clean value", wrong, checked)};
}

Outcome mask_and_additivity() {
  double worst = 0.0, lowest = 1.0, highest = 0.0;
  int runs = 0;
  auto check = [&](const AudioBuffer& mix, SeparationConfig cfg) {
    cfg.retain_intermediates = true;
    const auto result = separate(mix, cfg);
    for (const auto& w : result.masks)
      for (double v : w.values.data()) {
        lowest = std::min(lowest, v);
        highest = std::max(highest, v);
      }
    for (std::size_t c = 0; c < mix.channels(); ++c) {
      StftParams p = cfg.stft;
      p.sample_rate = mix.sample_rate();
      const auto rebuilt = istft(stft(mix.channel(c), p));
      std::vector<double> sum(rebuilt.size());
      for (std::size_t n = 0; n < sum.size(); ++n)
        sum[n] = result.vocals.channel(c)[n] + result.accompaniment.channel(c)[n];
      worst = std::max(worst, oracle::relative_l2(rebuilt, sum));
    }
    ++runs;
  };
  std::mt19937_64 rng(105);
  for (int i = 0; i < 3; ++i) {
    SynthSpec spec;
    spec.duration_s = 8.0;
    spec.seed = 500 + i;
    spec.vocal_kind = static_cast<VocalKind>(i);
    SeparationConfig cfg;
    cfg.radius_ms = std::vector<double>{0, 372, 1000}[i];
    check(generate(spec).mixture, cfg);
  }
  SeparationConfig small;
  small.stft.fft_size = 1024;
  small.stft.hop = 256;
  small.neighbors = 15;
  small.lambda = 0.3;
  check(AudioBuffer({oracle::white_noise(40000, rng), oracle::white_noise(40000, rng)}, 22050),
        small);
  const bool in_range = lowest > 0.0 && highest <= 1.0;
  return {in_range && worst <= 1e-9,
          fmt("%d runs, W in [%.3g, %.3g], worst relative L2 of sum %.3g", runs, lowest,
              highest, worst)};
}

Outcome trend() {
  const auto start = Clock::now();
  std::vector<SweepClip> clips;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    auto t = generate(spec);
    clips.push_back({"seed_" + std::to_string(seed), std::move(t.mixture), std::move(t.vocals),
                     std::move(t.accompaniment)});
  }
  const auto report = run_sweep(clips, default_sweep_radii_ms(), SeparationConfig{});
  const SweepRow* base = nullptr;
  const SweepRow* ctx = nullptr;
  const SweepRow* best = &report.rows.front();
  for (const auto& row : report.rows) {
    if (row.radius_ms == 0.0) base = &row;
    if (row.radius_ms == 372.0) ctx = &row;
    if (row.vocal_sdr_db > best->vocal_sdr_db) best = &row;
  }
  std::ostringstream curve;
  write_sweep_csv(curve, report);
  std::cout << curve.str();
  if (!base || !ctx) return {false, "sweep is missing radius 0 or 372"};
  const bool pass = ctx->vocal_sdr_db > base->vocal_sdr_db &&
                    ctx->accomp_sdr_db > base->accomp_sdr_db && best->radius_ms > 0.0;
  return {pass, fmt("10 clips; vocal %.3f -> %.3f dB, accompaniment %.3f -> %.3f dB, "
                    "vocal max at %g ms; %.1f s",
                    base->vocal_sdr_db, ctx->vocal_sdr_db, base->accomp_sdr_db,
                    ctx->accomp_sdr_db, best->radius_ms, seconds_since(start))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const std::string& exe) {
  if (exe.empty()) return {false, "no kamsep executable given"};
  const auto dir = oracle::scratch_dir("acceptance_cli");
  const auto data = dir / "data";
  auto sh = [&](const std::string& threads, const std::string& args) {
    const std::string cmd =
        "KAMSEP_THREADS=" + threads + " '" + exe + "' " + args + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
  };
  bool ok = sh("1", "synth --out '" + data.string() + "' --count 2 --duration-s 8");
  std::vector<std::string> files;
  for (const std::string threads : {"1", "4"}) {
    const auto out = dir / ("t" + threads);
    const auto clip = data / "clip_000";
    ok = ok && sh(threads, "separate -i '" + (clip / "mixture.wav").string() + "' --vocals '" +
                               (out / "v.wav").string() + "' --accompaniment '" +
                               (out / "a.wav").string() + "' --dump-dir '" +
                               (out / "dump").string() + "' --dump-row 10");
    ok = ok && sh(threads, "sweep --data '" + data.string() + "' --radii 0,139,372 -o '" +
                               (out / "sweep.csv").string() + "' --per-clip '" +
                               (out / "per_clip.csv").string() + "'");
    files.push_back(slurp(out / "v.wav") + slurp(out / "a.wav") +
                    slurp(out / "dump" / "distance_row_10_ch0.csv") +
                    slurp(out / "dump" / "mask_ch0.kmat") + slurp(out / "sweep.csv") +
                    slurp(out / "per_clip.csv"));
  }
  fs::remove_all(dir);
  if (!ok) return {false, "a CLI invocation failed"};
  const bool same = files[0] == files[1] && !files[0].empty();
  return {same, fmt("separate and sweep with 1 and 4 threads: %zu bytes %s", files[0].size(),
                    same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  set_log_sink([](std::string_view) {});
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"stft round trip", stft_round_trip},
      {"kernel correctness", kernel_correctness},
      {"neighbor selection", neighbor_selection},
      {"median robustness", median_robustness},
      {"mask range and additivity", mask_and_additivity},
      {"context improves separation", trend},
      {"determinism across thread counts", [&] { return determinism(exe); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " ("
              << criteria[i].first << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
