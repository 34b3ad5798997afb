#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harnn/config.hpp"
#include "harnn/dataset.hpp"

namespace harnn {

// One augmentation level of the subsequence-sampling sweep. copies == 0 is
// the untouched training set and anchors the relative scores.
struct SamplingLevelRow {
  int copies = 0;
  double retention = 1.0;  // measured kept-item fraction across the copies
  std::vector<double> ndcg;      // per seed, ndcg@30 on the test split
  std::vector<double> relative;  // per seed, ndcg / same-seed copies==0 ndcg
  double mean_ndcg = 0.0;
  double mean_relative = 0.0;
};

struct SamplingStudyResult {
  std::vector<std::uint64_t> seeds;
  double drop_prob = 0.5;
  std::vector<SamplingLevelRow> rows;

  std::string to_tsv() const;
};

// Trains one model per (seed, level) on subsampled variants of the training
// sequences; dev and test stay untouched. Scores are relative ndcg@30
// against the same seed's copies==0 run.
SamplingStudyResult run_sampling_study(const Dataset& ds,
                                       const TrainConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::vector<int>& levels,
                                       double drop_prob);

// Seed-mean test metrics for one (fraction, model) pair. The evaluation
// set is fixed: the users of the smallest fraction, so growing the
// training pool only ever adds observations around them.
struct ScalingCell {
  double fraction = 1.0;
  ModelKind model = ModelKind::Harnn;
  double precision10 = 0.0;
  double recall30 = 0.0;
  double map30 = 0.0;
  double ndcg30 = 0.0;
  std::vector<double> ndcg_per_seed;
};

struct ScalingStudyResult {
  std::vector<std::uint64_t> seeds;
  double target_fraction = 0.0;
  std::vector<ScalingCell> cells;  // fraction-major, harnn before nhmf

  std::string to_tsv() const;
};

// User fractions are nested subsets drawn with cfg.seed; each run trains on
// the induced interaction subset and is scored on the smallest subset's
// users against the full-data test split.
ScalingStudyResult run_scaling_study(const Dataset& ds, const TrainConfig& cfg,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::vector<double>& fractions);

}  // namespace harnn
