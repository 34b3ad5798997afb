#pragma once

#include <vector>

namespace harnn {

struct KMeansResult {
  std::vector<double> centers;      // ascending
  std::vector<int> assignments;     // per input value, index into centers
  std::vector<double> sse_trace;    // within-cluster SSE after each iteration
  bool reduced_k = false;           // k was larger than the distinct count
};

// 1-D Lloyd's k-means with k-means++ seeding. Deterministic: the seeding RNG
// uses a fixed internal constant, so results are a pure function of the
// input values and k. Caps at 100 iterations or center movement < 1e-9.
KMeansResult kmeans_1d(const std::vector<double>& values, int k);

}  // namespace harnn
