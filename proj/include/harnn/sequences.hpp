#pragma once

#include <cstdint>
#include <vector>

#include "harnn/dataset.hpp"
#include "harnn/rng.hpp"

namespace harnn {

struct UserSequence {
  int user = 0;
  std::vector<int> items;           // time-ordered, ties keep file order
  std::vector<std::int64_t> times;  // aligned with items
};

// Users with no rows are omitted; sequences come back sorted by user id.
std::vector<UserSequence> build_sequences(const std::vector<Interaction>& rows);

struct Split {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
};

// Global time-ordered split: the last ceil(test_fraction * n) rows by
// (time, file order) become the test side. Throws if either side is empty.
Split time_split(const std::vector<Interaction>& rows, double test_fraction);

// Sequence-level data augmentation: each sequence gains `copies` variants
// with items dropped independently with probability drop_prob. Empty
// variants are discarded; copies == 0 passes the input through untouched.
std::vector<UserSequence> subsample_sequences(
    const std::vector<UserSequence>& seqs, int copies, double drop_prob,
    bool keep_original, Rng& rng);

// First max(1, round(fraction * num_users)) entries of a seeded permutation,
// sorted. The same seed nests the subsets across fractions.
std::vector<int> subsample_users(int num_users, double fraction,
                                 std::uint64_t seed);

std::vector<Interaction> filter_by_users(const std::vector<Interaction>& rows,
                                         const std::vector<int>& users);

// Training batch. Rows are sorted by length descending so that each step
// runs on a prefix of rows; active[t] counts the rows whose sequence is
// still running at step t.
struct SequenceBatch {
  std::vector<int> users;
  std::vector<std::vector<int>> inputs;   // row r: [start, i_1, ..]
  std::vector<std::vector<int>> targets;  // row r: [i_1, ..., i_L]
  std::vector<int> active;

  int steps() const { return static_cast<int>(active.size()); }
  int rows() const { return static_cast<int>(users.size()); }
};

// Chunks sequences in their incoming order, truncating each to its last
// max_seq_len items and prepending the start symbol on the input side.
std::vector<SequenceBatch> make_batches(const std::vector<UserSequence>& seqs,
                                        int batch_size, int max_seq_len,
                                        int start_id);

}  // namespace harnn
