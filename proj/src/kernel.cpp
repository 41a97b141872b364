#include "kam/kernel.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include "kam/errors.hpp"
#include "kam/log.hpp"
#include "kam/parallel.hpp"

namespace kam {

DistanceMatrix single_frame_distance(const MagnitudeSpectrogram& x) {
  const std::size_t n = x.frames();
  DistanceMatrix d{Matrix<double>(n, n), 0, std::vector<double>(n, 0.0)};
  parallel_for(0, n, [&](std::size_t k) {
    const auto a = x.values.col(k);
    double norm = 0.0;
    for (double v : a) norm += v * v;
    d.frame_norms[k] = norm;
    for (std::size_t l = k + 1; l < n; ++l) {
      const auto b = x.values.col(l);
      double acc = 0.0;
      for (std::size_t m = 0; m < a.size(); ++m) {
        const double diff = a[m] - b[m];
        acc += diff * diff;
      }
      d.values(k, l) = acc;
      d.values(l, k) = acc;
    }
  });
  return d;
}

DistanceMatrix group_distance(const MagnitudeSpectrogram& x,
                              std::size_t radius) {
  const std::size_t n = x.frames();
  const std::size_t bins = x.bins();
  const auto r_max = static_cast<std::ptrdiff_t>(radius);
  const auto in_range = [n](std::ptrdiff_t t) {
    return t >= 0 && t < static_cast<std::ptrdiff_t>(n);
  };

  DistanceMatrix d{Matrix<double>(n, n), radius, {}};
  parallel_for(0, n, [&](std::size_t k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      double acc = 0.0;
      for (std::ptrdiff_t r = -r_max; r <= r_max; ++r) {
        const std::ptrdiff_t a = static_cast<std::ptrdiff_t>(k) + r;
        const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(l) + r;
        const bool has_a = in_range(a);
        const bool has_b = in_range(b);
        if (!has_a && !has_b) continue;
        for (std::size_t m = 0; m < bins; ++m) {
          const double xa = has_a ? x.values(m, a) : 0.0;
          const double xb = has_b ? x.values(m, b) : 0.0;
          const double diff = xa - xb;
          acc += diff * diff;
        }
      }
      d.values(k, l) = acc;
      d.values(l, k) = acc;
    }
  });
  return d;
}

DistanceMatrix group_distance_fast(const DistanceMatrix& single,
                                   std::size_t radius) {
  const std::size_t n = single.frames();
  if (single.radius_frames != 0)
    throw ConfigError("context aggregation needs a single-frame distance");
  if (single.frame_norms.size() != n)
    throw ConfigError("single-frame distance is missing frame norms");
  if (radius == 0) return single;
  if (radius >= n)
    log_warning("context radius " + std::to_string(radius) +
                " frames reaches past the " + std::to_string(n) +
                "-frame signal; every pair compares the whole signal");

  const auto r_max = static_cast<std::ptrdiff_t>(radius);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const auto entry = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
    const bool has_a = a >= 0 && a < sn;
    const bool has_b = b >= 0 && b < sn;
    if (has_a && has_b) return single.values(a, b);
    if (has_a) return single.frame_norms[a];
    if (has_b) return single.frame_norms[b];
    return 0.0;
  };

  DistanceMatrix d{Matrix<double>(n, n), radius, {}};
  parallel_for(0, n, [&](std::size_t k) {
    const auto sk = static_cast<std::ptrdiff_t>(k);
    for (std::ptrdiff_t l = sk + 1; l < sn; ++l) {
      double acc = 0.0;
      for (std::ptrdiff_t r = -r_max; r <= r_max; ++r)
        acc += entry(sk + r, l + r);
      d.values(k, l) = acc;
      d.values(l, k) = acc;
    }
  });
  return d;
}

NeighborTable nearest_frames(const DistanceMatrix& d, std::size_t neighbors) {
  const std::size_t n = d.frames();
  if (neighbors < 1 || neighbors > n)
    throw ConfigError("neighbor count " + std::to_string(neighbors) +
                      " outside [1, " + std::to_string(n) + "]");

  NeighborTable table(n, neighbors);
  parallel_for(0, n, [&](std::size_t k) {
    const auto dist = d.row(k);
    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t l = 0; l < n; ++l)
      if (l != k) others.push_back(l);
    const auto closer = [&](std::size_t a, std::size_t b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    const auto keep = static_cast<std::ptrdiff_t>(neighbors - 1);
    std::partial_sort(others.begin(), others.begin() + keep, others.end(),
                      closer);
    auto row = table.row(k);
    row[0] = k;
    std::copy_n(others.begin(), keep, row.begin() + 1);
  });
  return table;
}

void write_distance_row_csv(std::ostream& out, const DistanceMatrix& d,
                            std::size_t frame) {
  if (frame >= d.frames())
    throw ConfigError("frame " + std::to_string(frame) + " out of range");
  const auto precision = out.precision(17);
  out << "frame_index,distance\n";
  const auto row = d.row(frame);
  for (std::size_t l = 0; l < row.size(); ++l) out << l << ',' << row[l] << '\n';
  out.precision(precision);
}

}  // namespace kam
