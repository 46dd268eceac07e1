#include "bsmvdr/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bsmvdr/fft.hpp"

namespace bsmvdr {

int RangeDopplerMap::velocity_column(int doppler_bin) const {
  const int v = velocity_bins;
  return ((doppler_bin + zero_velocity_bin()) % v + v) % v;
}

RangeDopplerMap range_doppler_map(const WidebandSeries& output, std::span<const cd> replica,
                                  const ChirpParams& cp, OpCounter* counter) {
  const int S = output.samples;
  const int P = output.pulses;
  if (static_cast<int>(replica.size()) != S) {
    throw DimensionError("range_doppler_map: replica length " + std::to_string(replica.size()) +
                         " != pulse length " + std::to_string(S));
  }
  if (S < 1 || P < 1) throw DimensionError("range_doppler_map: empty input");

  const FftPlan fast(S);
  const FftPlan slow(P);
  std::vector<cd> ref(replica.begin(), replica.end());
  fast.forward(ref, counter);
  for (cd& v : ref) v = std::conj(v);

  // Compressed pulses, [pulse][range].
  std::vector<cd> compressed(static_cast<std::size_t>(S) * P);
  const double inv_s = 1.0 / S;
  for (int m = 0; m < P; ++m) {
    std::span<cd> buf(compressed.data() + static_cast<std::size_t>(m) * S, S);
    std::span<const cd> in = output.pulse(m);
    std::copy(in.begin(), in.end(), buf.begin());
    fast.forward(buf, counter);
    for (int k = 0; k < S; ++k) buf[k] = cmul(buf[k], ref[k]);
    count(counter, S);
    fast.inverse(buf, counter);
    for (cd& v : buf) v *= inv_s;
  }

  RangeDopplerMap map(S, P);
  map.range_resolution = cp.range_resolution();
  map.velocity_resolution = cp.velocity_resolution();
  std::vector<cd> col(P);
  const int shift = map.zero_velocity_bin();
  for (int r = 0; r < S; ++r) {
    for (int m = 0; m < P; ++m) col[m] = compressed[static_cast<std::size_t>(m) * S + r];
    slow.forward(col, counter);
    for (int q = 0; q < P; ++q) map.at(r, (q + shift) % P) = std::norm(col[q]);
  }
  return map;
}

namespace {

// Median of the values left after removing the entries at `excluded_ranks`
// (sorted, unique ranks into `sorted`).
double median_excluding(const std::vector<double>& sorted, const std::vector<int>& excluded_ranks) {
  const int remaining = static_cast<int>(sorted.size() - excluded_ranks.size());
  if (remaining <= 0) return 0.0;
  auto kth = [&](int k) {
    int idx = k;
    for (int x : excluded_ranks) {
      if (x <= idx) {
        ++idx;
      } else {
        break;
      }
    }
    return sorted[idx];
  };
  if (remaining % 2 == 1) return kth(remaining / 2);
  return 0.5 * (kth(remaining / 2 - 1) + kth(remaining / 2));
}

double median_of(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> cfar_floor(std::span<const double> column, const CfarParams& params) {
  const int n = static_cast<int>(column.size());
  std::vector<double> floor(n, 0.0);
  if (n == 0) return floor;
  const int guard = std::max(params.guard, 0);
  auto wrap = [n](int i) { return ((i % n) + n) % n; };

  // Guard region [r-G, r+G] as unique indices.
  auto guard_cells = [&](int r) {
    std::vector<int> cells;
    const int span = std::min(2 * guard + 1, n);
    cells.reserve(span);
    for (int d = 0; d < span; ++d) cells.push_back(wrap(r - guard + d));
    return cells;
  };

  if (params.window > 0) {
    std::vector<char> excluded(n, 0);
    std::vector<double> ref;
    for (int r = 0; r < n; ++r) {
      const auto cells = guard_cells(r);
      for (int c : cells) excluded[c] = 1;
      ref.clear();
      for (int d = 1; d <= params.window; ++d) {
        for (int idx : {r - guard - d, r + guard + d}) {
          const int w = wrap(idx);
          if (!excluded[w]) {
            excluded[w] = 2;
            ref.push_back(column[w]);
          }
        }
      }
      for (int c = 0; c < n; ++c) excluded[c] = 0;
      if (params.floor == FloorEstimator::Median) {
        floor[r] = median_of(ref);
      } else {
        floor[r] = ref.empty() ? 0.0 : std::accumulate(ref.begin(), ref.end(), 0.0) / ref.size();
      }
    }
    return floor;
  }

  if (params.floor == FloorEstimator::Mean) {
    const double total = std::accumulate(column.begin(), column.end(), 0.0);
    for (int r = 0; r < n; ++r) {
      const auto cells = guard_cells(r);
      double ex = 0.0;
      for (int c : cells) ex += column[c];
      const int remaining = n - static_cast<int>(cells.size());
      floor[r] = remaining > 0 ? (total - ex) / remaining : 0.0;
    }
    return floor;
  }

  // Whole-column median: sort once, then walk past the excluded ranks.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return column[a] < column[b] || (column[a] == column[b] && a < b);
  });
  std::vector<double> sorted(n);
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) {
    sorted[i] = column[order[i]];
    rank[order[i]] = i;
  }
  std::vector<int> ex;
  for (int r = 0; r < n; ++r) {
    ex.clear();
    for (int c : guard_cells(r)) ex.push_back(rank[c]);
    std::sort(ex.begin(), ex.end());
    floor[r] = median_excluding(sorted, ex);
  }
  return floor;
}

std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const CfarParams& params) {
  const int R = map.range_bins;
  const int V = map.velocity_bins;
  std::vector<Detection> out;
  if (R == 0 || V == 0) return out;
  const double factor = std::pow(10.0, params.threshold_db / 10.0);

  std::vector<double> floor(static_cast<std::size_t>(R) * V);
  std::vector<char> hit(static_cast<std::size_t>(R) * V, 0);
  std::vector<double> column(R);
  for (int v = 0; v < V; ++v) {
    for (int r = 0; r < R; ++r) column[r] = map.at(r, v);
    const std::vector<double> f = cfar_floor(column, params);
    for (int r = 0; r < R; ++r) {
      const double p = column[r];
      floor[static_cast<std::size_t>(r) * V + v] = f[r];
      hit[static_cast<std::size_t>(r) * V + v] = (p > 0 && p >= f[r] * factor) ? 1 : 0;
    }
  }

  for (int r = 0; r < R; ++r) {
    for (int v = 0; v < V; ++v) {
      const std::size_t idx = static_cast<std::size_t>(r) * V + v;
      if (!hit[idx]) continue;
      const double p = map.power[idx];
      bool peak = true;
      for (int dr = -1; dr <= 1 && peak; ++dr) {
        for (int dv = -1; dv <= 1; ++dv) {
          const int rr = ((r + dr) % R + R) % R;
          const int vv = ((v + dv) % V + V) % V;
          const std::size_t nidx = static_cast<std::size_t>(rr) * V + vv;
          if (nidx == idx) continue;
          const double q = map.power[nidx];
          // Plateaus resolve to the cell with the smallest flat index.
          if (q > p || (q == p && nidx < idx)) {
            peak = false;
            break;
          }
        }
      }
      if (!peak) continue;
      const double f = floor[idx];
      const double db = f > 0 ? 10.0 * std::log10(p / f) : std::numeric_limits<double>::infinity();
      out.push_back({r, v, db});
    }
  }
  return out;
}

TruthCell truth_cell(const TargetSpec& t, int target_id, const ChirpParams& cp, const RangeDopplerMap& map) {
  const TargetTruth tt = target_truth(t, cp);
  return {target_id, tt.range_bin, map.velocity_column(tt.doppler_bin)};
}

DetectionScore score_detections(const std::vector<Detection>& dets, const TruthCell& truth,
                                const RangeDopplerMap& map, const Gate& gate) {
  DetectionScore score;
  score.target_id = truth.target_id;
  score.range_error_m = std::numeric_limits<double>::infinity();
  score.velocity_error_mps = std::numeric_limits<double>::infinity();
  auto cdist = [](int a, int b, int n) {
    const int d = std::abs(a - b) % n;
    return std::min(d, n - d);
  };
  const Detection* best = nullptr;
  int best_dr = 0;
  int best_dv = 0;
  long best_d2 = 0;
  for (const Detection& d : dets) {
    const int dr = cdist(d.range_bin, truth.range_bin, map.range_bins);
    const int dv = cdist(d.velocity_bin, truth.velocity_bin, map.velocity_bins);
    if (dr > gate.range_bins || dv > gate.velocity_bins) continue;
    const long d2 = static_cast<long>(dr) * dr + static_cast<long>(dv) * dv;
    if (best == nullptr || d2 < best_d2 || (d2 == best_d2 && d.power_db_over_floor > best->power_db_over_floor)) {
      best = &d;
      best_d2 = d2;
      best_dr = dr;
      best_dv = dv;
    }
  }
  if (best != nullptr) {
    score.detected = true;
    score.range_error_m = best_dr * map.range_resolution;
    score.velocity_error_mps = best_dv * map.velocity_resolution;
  }
  return score;
}

}  // namespace bsmvdr
