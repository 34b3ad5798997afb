#include "harnn/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace harnn {

std::vector<UserSequence> build_sequences(const std::vector<Interaction>& rows) {
  std::map<int, std::vector<std::pair<std::int64_t, int>>> per_user;
  for (const auto& r : rows) per_user[r.user].emplace_back(r.time, r.item);
  std::vector<UserSequence> out;
  out.reserve(per_user.size());
  for (auto& [user, events] : per_user) {
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    UserSequence s;
    s.user = user;
    s.items.reserve(events.size());
    s.times.reserve(events.size());
    for (const auto& [t, item] : events) {
      s.items.push_back(item);
      s.times.push_back(t);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Split time_split(const std::vector<Interaction>& rows, double test_fraction) {
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::invalid_argument("time_split: no interactions");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rows[a].time < rows[b].time;
  });
  const int test_count =
      static_cast<int>(std::ceil(test_fraction * n - 1e-9));
  if (test_count <= 0) {
    throw std::invalid_argument("time_split: test side is empty");
  }
  if (test_count >= n) {
    throw std::invalid_argument("time_split: train side is empty");
  }
  Split split;
  split.train.reserve(n - test_count);
  split.test.reserve(test_count);
  for (int i = 0; i < n - test_count; ++i) split.train.push_back(rows[order[i]]);
  for (int i = n - test_count; i < n; ++i) split.test.push_back(rows[order[i]]);
  return split;
}

std::vector<UserSequence> subsample_sequences(
    const std::vector<UserSequence>& seqs, int copies, double drop_prob,
    bool keep_original, Rng& rng) {
  if (copies == 0) return seqs;
  std::vector<UserSequence> out;
  for (const auto& s : seqs) {
    if (keep_original) out.push_back(s);
    for (int c = 0; c < copies; ++c) {
      UserSequence v;
      v.user = s.user;
      for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (rng.bernoulli(drop_prob)) continue;
        v.items.push_back(s.items[i]);
        v.times.push_back(s.times[i]);
      }
      if (!v.items.empty()) out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<int> subsample_users(int num_users, double fraction,
                                 std::uint64_t seed) {
  std::vector<int> perm(num_users);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  int count = static_cast<int>(std::llround(fraction * num_users));
  count = std::clamp(count, 1, num_users);
  perm.resize(count);
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<Interaction> filter_by_users(const std::vector<Interaction>& rows,
                                         const std::vector<int>& users) {
  std::vector<Interaction> out;
  for (const auto& r : rows) {
    if (std::binary_search(users.begin(), users.end(), r.user)) {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<SequenceBatch> make_batches(const std::vector<UserSequence>& seqs,
                                        int batch_size, int max_seq_len,
                                        int start_id) {
  std::vector<SequenceBatch> batches;
  for (std::size_t begin = 0; begin < seqs.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, seqs.size());
    std::vector<int> order(end - begin);
    std::iota(order.begin(), order.end(), static_cast<int>(begin));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return seqs[a].items.size() > seqs[b].items.size();
    });

    SequenceBatch batch;
    std::size_t longest = 0;
    for (int idx : order) {
      const auto& items = seqs[idx].items;
      const std::size_t keep =
          std::min<std::size_t>(items.size(), max_seq_len);
      const std::size_t from = items.size() - keep;
      std::vector<int> in(keep), tgt(keep);
      in[0] = start_id;
      for (std::size_t t = 0; t < keep; ++t) {
        if (t + 1 < keep) in[t + 1] = items[from + t];
        tgt[t] = items[from + t];
      }
      longest = std::max(longest, keep);
      batch.users.push_back(seqs[idx].user);
      batch.inputs.push_back(std::move(in));
      batch.targets.push_back(std::move(tgt));
    }
    batch.active.resize(longest);
    for (std::size_t t = 0; t < longest; ++t) {
      int n = 0;
      for (const auto& row : batch.inputs) {
        if (row.size() > t) ++n;
      }
      batch.active[t] = n;
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace harnn
