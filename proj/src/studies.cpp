#include "harnn/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "harnn/evaluator.hpp"
#include "harnn/sequences.hpp"
#include "harnn/trainer.hpp"

namespace harnn {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

// Runs fn(0..n-1) across a few worker threads. Runs only share read-only
// inputs, so this changes wall time, never results.
void parallel_runs(int n, const std::function<void(int)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  int workers = std::min<int>(n, hw == 0 ? 1 : static_cast<int>(hw));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::size_t total_items(const std::vector<UserSequence>& seqs) {
  std::size_t n = 0;
  for (const auto& s : seqs) n += s.items.size();
  return n;
}

}  // namespace

SamplingStudyResult run_sampling_study(const Dataset& ds,
                                       const TrainConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::vector<int>& levels,
                                       double drop_prob) {
  if (seeds.empty() || levels.empty())
    throw std::invalid_argument("sampling study needs seeds and levels");
  if (std::find(levels.begin(), levels.end(), 0) == levels.end())
    throw std::invalid_argument("sampling study needs the copies=0 anchor");

  SplitData split = prepare_split(ds.interactions, cfg);
  EvalData eval = make_eval_data(split.train_all, split.test);
  const std::size_t base_items = total_items(split.train_seqs);

  const int n_seeds = static_cast<int>(seeds.size());
  const int n_levels = static_cast<int>(levels.size());

  // Augmented corpora are deterministic per (seed, level) and reused
  // across nothing, so they are built inside the run.
  std::vector<std::vector<double>> ndcg(n_levels,
                                        std::vector<double>(n_seeds, 0.0));
  std::vector<std::vector<double>> kept(n_levels,
                                        std::vector<double>(n_seeds, 1.0));

  parallel_runs(n_levels * n_seeds, [&](int run) {
    const int li = run / n_seeds;
    const int si = run % n_seeds;
    const int copies = levels[li];

    TrainConfig run_cfg = cfg;
    run_cfg.model = ModelKind::Harnn;
    run_cfg.seed = seeds[si];

    std::vector<UserSequence> seqs;
    const std::vector<UserSequence>* train = &split.train_seqs;
    // drop_prob 0 makes every copy equal the original, so cloning would only
    // repeat gradient steps; all levels collapse to the anchor run
    if (copies > 0 && drop_prob > 0.0) {
      Rng parent(seeds[si]);
      Rng aug = parent.split(900 + static_cast<std::uint64_t>(copies));
      seqs = subsample_sequences(split.train_seqs, copies, drop_prob,
                                 /*keep_original=*/false, aug);
      if (base_items > 0)
        kept[li][si] = static_cast<double>(total_items(seqs)) /
                       (static_cast<double>(copies) *
                        static_cast<double>(base_items));
      train = &seqs;
    }

    TrainedModel model = train_harnn_on(ds, run_cfg, split, *train);
    RankingReport report =
        evaluate_ranker(model.ranker(), eval, /*exclude_history=*/true, {30});
    ndcg[li][si] = report.ndcg;
  });

  int anchor = -1;
  for (int li = 0; li < n_levels; ++li)
    if (levels[li] == 0) anchor = li;

  SamplingStudyResult out;
  out.seeds = seeds;
  out.drop_prob = drop_prob;
  for (int li = 0; li < n_levels; ++li) {
    SamplingLevelRow row;
    row.copies = levels[li];
    row.retention = mean(kept[li]);
    row.ndcg = ndcg[li];
    row.relative.resize(n_seeds);
    for (int si = 0; si < n_seeds; ++si) {
      const double base = ndcg[anchor][si];
      row.relative[si] = base > 0.0 ? ndcg[li][si] / base : 0.0;
    }
    row.mean_ndcg = mean(row.ndcg);
    row.mean_relative = mean(row.relative);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string SamplingStudyResult::to_tsv() const {
  std::string s;
  s += "# subsequence augmentation sweep; score = ndcg@30 relative to the "
       "copies=0 run with the same seed\n";
  s += "# drop_prob\t" + fmt(drop_prob) + "\n";
  s += "# seeds";
  for (auto seed : seeds) s += "\t" + std::to_string(seed);
  s += "\n";
  s += "level\tcopies\tretention\tmean_ndcg\tmean_relative";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    s += "\trelative_seed" + std::to_string(seeds[i]);
  s += "\n";
  for (const auto& row : rows) {
    s += row.copies == 0 ? "original" : "x" + std::to_string(row.copies);
    s += "\t" + std::to_string(row.copies);
    s += "\t" + fmt(row.retention);
    s += "\t" + fmt(row.mean_ndcg);
    s += "\t" + fmt(row.mean_relative);
    for (double r : row.relative) s += "\t" + fmt(r);
    s += "\n";
  }
  return s;
}

ScalingStudyResult run_scaling_study(const Dataset& ds, const TrainConfig& cfg,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::vector<double>& fractions) {
  if (seeds.empty() || fractions.empty())
    throw std::invalid_argument("scaling study needs seeds and fractions");

  SplitData split = prepare_split(ds.interactions, cfg);
  EvalData eval = make_eval_data(split.train_all, split.test);

  double min_fraction = fractions[0];
  for (double f : fractions) min_fraction = std::min(min_fraction, f);
  const std::vector<int> target =
      subsample_users(ds.num_users(), min_fraction, cfg.seed);

  const int n_seeds = static_cast<int>(seeds.size());
  const int n_fracs = static_cast<int>(fractions.size());
  const ModelKind kinds[2] = {ModelKind::Harnn, ModelKind::Nhmf};

  // Filtered splits per fraction, shared read-only by the runs.
  std::vector<SplitData> splits(n_fracs);
  for (int fi = 0; fi < n_fracs; ++fi) {
    const std::vector<int> users =
        subsample_users(ds.num_users(), fractions[fi], cfg.seed);
    SplitData& sp = splits[fi];
    sp.train_all = filter_by_users(split.train_all, users);
    sp.train2 = filter_by_users(split.train2, users);
    sp.dev = filter_by_users(split.dev, users);
    sp.test = filter_by_users(split.test, users);
    sp.train_seqs = build_sequences(sp.train2);
  }

  struct RunOut {
    double p10 = 0, r30 = 0, map30 = 0, ndcg30 = 0;
  };
  std::vector<RunOut> outs(n_fracs * 2 * n_seeds);

  parallel_runs(n_fracs * 2 * n_seeds, [&](int run) {
    const int fi = run / (2 * n_seeds);
    const int mi = (run / n_seeds) % 2;
    const int si = run % n_seeds;

    TrainConfig run_cfg = cfg;
    run_cfg.model = kinds[mi];
    run_cfg.seed = seeds[si];

    TrainedModel model = train_on(ds, run_cfg, splits[fi]);
    RankingReport report = evaluate_ranker(model.ranker(), eval,
                                           /*exclude_history=*/true, {10, 30},
                                           target);
    RunOut& o = outs[run];
    o.p10 = report.precision[0];
    o.r30 = report.recall[1];
    o.map30 = report.map;
    o.ndcg30 = report.ndcg;
  });

  ScalingStudyResult out;
  out.seeds = seeds;
  out.target_fraction = min_fraction;
  for (int fi = 0; fi < n_fracs; ++fi) {
    for (int mi = 0; mi < 2; ++mi) {
      ScalingCell cell;
      cell.fraction = fractions[fi];
      cell.model = kinds[mi];
      for (int si = 0; si < n_seeds; ++si) {
        const RunOut& o = outs[(fi * 2 + mi) * n_seeds + si];
        cell.precision10 += o.p10;
        cell.recall30 += o.r30;
        cell.map30 += o.map30;
        cell.ndcg30 += o.ndcg30;
        cell.ndcg_per_seed.push_back(o.ndcg30);
      }
      cell.precision10 /= n_seeds;
      cell.recall30 /= n_seeds;
      cell.map30 /= n_seeds;
      cell.ndcg30 /= n_seeds;
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

std::string ScalingStudyResult::to_tsv() const {
  std::string s;
  s += "# training-scale sweep; seed-mean test metrics on the fraction " +
       fmt(target_fraction) + " user subset\n";
  s += "# seeds";
  for (auto seed : seeds) s += "\t" + std::to_string(seed);
  s += "\n";
  s += "fraction\tmodel\tprecision@10\trecall@30\tmap@30\tndcg@30\n";
  for (const auto& c : cells) {
    s += fmt(c.fraction);
    s += "\t" + to_string(c.model);
    s += "\t" + fmt(c.precision10);
    s += "\t" + fmt(c.recall30);
    s += "\t" + fmt(c.map30);
    s += "\t" + fmt(c.ndcg30);
    s += "\n";
  }
  return s;
}

}  // namespace harnn
