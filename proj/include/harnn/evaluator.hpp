#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "harnn/dataset.hpp"
#include "harnn/ranker.hpp"

namespace harnn {

// ranked: item ids best-first; relevant: held-out items
double precision_at_k(const std::vector<int>& ranked,
                      const std::set<int>& relevant, int k);
double recall_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                   int k);
// mean of precision@r over the ranks r <= k that hit, divided by
// min(|relevant|, k)
double map_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                int k);
// gains 1/log2(rank + 1), ideal list packs hits at the top
double ndcg_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                 int k);

// per-user context (earlier interactions) and targets (held-out, in time
// order), for the users that have at least one target
struct EvalData {
  std::vector<int> users;
  std::vector<std::vector<int>> context;
  std::vector<std::vector<int>> targets;
};

EvalData make_eval_data(const std::vector<Interaction>& context_rows,
                        const std::vector<Interaction>& target_rows);

struct UserResult {
  int user = 0;
  std::vector<double> precision;  // aligned with report ks
  std::vector<double> recall;
  double map = 0.0;
  double ndcg = 0.0;
};

struct RankingReport {
  std::vector<int> ks;
  std::vector<double> precision;  // means over evaluated users, per k
  std::vector<double> recall;
  double map = 0.0;   // at ks.back()
  double ndcg = 0.0;  // at ks.back()
  int evaluated_users = 0;
  int skipped_users = 0;  // nothing left to retrieve for them
  double test_nll_sum = 0.0;
  std::int64_t test_positions = 0;
  std::vector<UserResult> per_user;

  double perplexity() const;
  std::string to_tsv() const;
  std::string to_json() const;
};

// Ranks once per user (to the largest k), excluding the user's context
// items from the candidates when exclude_history is set. Users whose
// targets are entirely excluded are skipped and tallied. restrict_users,
// when non-empty, limits evaluation to those user ids.
RankingReport evaluate_ranker(Ranker& model, const EvalData& data,
                              bool exclude_history,
                              const std::vector<int>& ks = {2, 10, 30},
                              const std::vector<int>& restrict_users = {});

}  // namespace harnn
