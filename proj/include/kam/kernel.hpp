#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "kam/matrix.hpp"
#include "kam/stft.hpp"

namespace kam {

// Pairwise frame distances. radius_frames == 0 is the single-frame distance;
// larger radii compare groups of 2R+1 frames. frame_norms holds the squared
// norm of every frame and is filled by single_frame_distance so the
// context-aggregated distance can be derived from this matrix alone.
struct DistanceMatrix {
  Matrix<double> values;
  std::size_t radius_frames = 0;
  std::vector<double> frame_norms;

  std::size_t frames() const { return values.rows(); }
  std::span<const double> row(std::size_t k) const { return values.col(k); }
};

// D[k][l] = sum_m (X[m][k] - X[m][l])^2.
DistanceMatrix single_frame_distance(const MagnitudeSpectrogram& x);

// D[k][l] = sum_r sum_m (X[m][k+r] - X[m][l+r])^2 for r in [-R, R], with
// frames outside the signal treated as zero columns. Evaluated directly in
// O(N^2 M R). With R == 0 the result equals single_frame_distance bit for bit.
DistanceMatrix group_distance(const MagnitudeSpectrogram& x,
                              std::size_t radius);

// Same quantity as group_distance, summed along the diagonals of a
// single-frame matrix: D~[k][l] = sum_r D[k+r][l+r], where an entry with one
// frame out of range is the squared norm of the other frame and an entry with
// both out of range is zero. O(N^2 R). Requires radius_frames == 0 and
// frame_norms. A radius reaching past the signal length is allowed and logged.
DistanceMatrix group_distance_fast(const DistanceMatrix& single,
                                   std::size_t radius);

// Row k holds P frame indices in nondecreasing distance to k. Frame k itself
// comes first; the rest are ordered by (distance, index).
class NeighborTable {
 public:
  NeighborTable(std::size_t frames, std::size_t neighbors)
      : frames_(frames), neighbors_(neighbors), indices_(frames * neighbors) {}

  std::size_t frames() const { return frames_; }
  std::size_t neighbors() const { return neighbors_; }

  std::span<std::size_t> row(std::size_t k) {
    return {indices_.data() + k * neighbors_, neighbors_};
  }
  std::span<const std::size_t> row(std::size_t k) const {
    return {indices_.data() + k * neighbors_, neighbors_};
  }

 private:
  std::size_t frames_;
  std::size_t neighbors_;
  std::vector<std::size_t> indices_;
};

// Throws ConfigError unless 1 <= neighbors <= N.
NeighborTable nearest_frames(const DistanceMatrix& d, std::size_t neighbors);

// CSV "frame_index,distance" for one row of d.
void write_distance_row_csv(std::ostream& out, const DistanceMatrix& d,
                            std::size_t frame);

}  // namespace kam
