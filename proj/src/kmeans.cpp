#include "harnn/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "harnn/rng.hpp"

namespace harnn {

namespace {

constexpr std::uint64_t kSeedingSeed = 0x6b6d65616e7331ULL;
constexpr int kMaxIterations = 100;
constexpr double kTolerance = 1e-9;

int nearest_center(const std::vector<double>& centers, double v) {
  int best = 0;
  double best_d = std::abs(v - centers[0]);
  for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
    const double d = std::abs(v - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans_1d(const std::vector<double>& values, int k) {
  if (values.empty()) throw std::invalid_argument("kmeans_1d: empty input");
  if (k < 1) throw std::invalid_argument("kmeans_1d: k must be >= 1");

  KMeansResult result;
  std::set<double> distinct(values.begin(), values.end());
  if (k > static_cast<int>(distinct.size())) {
    k = static_cast<int>(distinct.size());
    result.reduced_k = true;
  }

  const int n = static_cast<int>(values.size());
  std::vector<double> centers;
  centers.reserve(k);

  // k-means++ seeding: first center uniform, then D^2-weighted
  Rng rng(kSeedingSeed);
  centers.push_back(values[rng.uniform_int(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = values[i] - centers[nearest_center(centers, values[i])];
      d2[i] = d * d;
      total += d2[i];
    }
    double r = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (int i = 0; i < n; ++i) assign[i] = nearest_center(centers, values[i]);

    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sum[assign[i]] += values[i];
      count[assign[i]] += 1;
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its center
      const double updated = sum[c] / count[c];
      movement = std::max(movement, std::abs(updated - centers[c]));
      centers[c] = updated;
    }

    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = values[i] - centers[nearest_center(centers, values[i])];
      sse += d * d;
    }
    result.sse_trace.push_back(sse);
    if (movement < kTolerance) break;
  }

  // canonical form: ascending centers, assignments re-derived against them
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  for (int i = 0; i < n; ++i) assign[i] = nearest_center(centers, values[i]);

  result.centers = std::move(centers);
  result.assignments = std::move(assign);
  return result;
}

}  // namespace harnn
