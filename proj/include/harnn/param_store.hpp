#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "harnn/config.hpp"
#include "harnn/dataset.hpp"
#include "harnn/rng.hpp"

namespace harnn {

// Embedding tables. Item rows carry two reserved ids past the real items:
// start = |I| (learned) and pad = |I|+1 (held at zero). The out_* tables
// exist only under separate sharing and start as copies of the input
// tables, so the first forward pass matches the shared configuration.
struct ParamStore {
  int dim = 0;
  int num_items = 0;
  Eigen::MatrixXd user_emb;
  Eigen::MatrixXd item_emb;
  Eigen::MatrixXd user_attr;
  Eigen::MatrixXd item_attr;
  Eigen::MatrixXd out_item_emb;
  Eigen::MatrixXd out_item_attr;

  int start_id() const { return num_items; }
  int pad_id() const { return num_items + 1; }
  bool separate_out() const { return out_item_emb.rows() > 0; }
  const Eigen::MatrixXd& out_emb() const {
    return separate_out() ? out_item_emb : item_emb;
  }
  const Eigen::MatrixXd& out_attr() const {
    return out_item_attr.rows() > 0 ? out_item_attr : item_attr;
  }

  void init(int num_users, int items, int user_vocab_size, int item_vocab_size,
            int d, Sharing sharing, Placement placement, Rng& rng);
  std::int64_t parameter_count() const;
};

struct TokenCoef {
  int index = 0;     // row in the side's attribute table
  double coef = 1.0;
};

// Canonical per-entity folding recipe. Tokens are unique and ascending, so
// two entities with proportionally replicated attribute multisets fold to
// bit-identical vectors under the normalized modes.
struct EntityCode {
  std::vector<TokenCoef> input_attr;
  std::vector<TokenCoef> output_static;
  std::vector<std::vector<int>> max_groups;  // unique tokens per pooled group
  double max_group_coef = 1.0;
  double out_identity_coef = 1.0;
};

struct EntityCodes {
  std::vector<EntityCode> users;
  std::vector<EntityCode> items;
  // prefix sums of items' max-pooled group counts, size |I| + 1
  std::vector<int> item_group_offset;
  int total_groups = 0;
};

// Derives coefficient lists from the dataset's attribute multisets.
// mode mix: coefficient is the token's multiplicity. mode het: multiplicity
// over the type's multiset size, so each type contributes a mean.
// Output side: max pooling diverts multi-hot types into max_groups; average
// reduction divides every output term, identity included, by one plus the
// number of item attribute types.
EntityCodes build_entity_codes(const Dataset& ds, CombinationMode mode,
                               Pooling pooling, Reduction reduction);

// Reference combinators over raw token lists (one list per side-local type
// slot, multiplicities kept).
Eigen::VectorXd combine_mix(const Eigen::VectorXd& identity,
                            const Eigen::MatrixXd& attr_table,
                            const std::vector<std::vector<int>>& tokens_by_type);
Eigen::VectorXd combine_het(const Eigen::VectorXd& identity,
                            const Eigen::MatrixXd& attr_table,
                            const std::vector<std::vector<int>>& tokens_by_type);

// identity + coefficient-weighted attribute rows
Eigen::VectorXd fold_input(const Eigen::VectorXd& identity,
                           const Eigen::MatrixXd& attr_table,
                           const EntityCode& code);

// Input representation of every item id including start (row |I|), built
// from the input tables. With attributes off the rows are the identity
// embeddings.
Eigen::MatrixXd item_input_matrix(const ParamStore& store,
                                  const EntityCodes& codes, bool attrs_on_input);

// Static part of the per-item output representation: identity plus the
// non-pooled attribute terms, against the output-side tables.
Eigen::MatrixXd output_item_matrix(const ParamStore& store,
                                   const EntityCodes& codes, bool attrs_on_output);

// argmax positions chosen by max pooling, needed to route gradients;
// flat layout: row * codes.total_groups + codes.item_group_offset[item] + g
struct MaxPoolTrace {
  std::vector<int> argmax;
};

// Scores over all real items for a batch of (post-dropout) hidden rows.
// v is output_item_matrix; trace may be null when gradients are not needed.
Eigen::MatrixXd output_scores(const Eigen::MatrixXd& h_rows,
                              const Eigen::MatrixXd& v,
                              const ParamStore& store, const EntityCodes& codes,
                              bool attrs_on_output, MaxPoolTrace* trace);

// Top-k item ids by score, descending, ties broken by ascending id.
// Excluded ids are skipped.
std::vector<int> predict_top_k(const Eigen::VectorXd& scores, int k,
                               const std::vector<int>& exclude);

// Items closest to the query item by cosine similarity of their input
// representations; the query itself is excluded.
std::vector<std::pair<int, double>> nearest_neighbors(
    const Eigen::MatrixXd& item_matrix, int item, int k);

}  // namespace harnn
