#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "harnn/schema.hpp"

namespace harnn {

struct Interaction {
  int user = 0;
  int item = 0;
  std::int64_t time = 0;
};

// interactions.tsv parsed as-is: entity names mapped to dense ids in
// first-appearance order, rows kept in file order, duplicates kept
struct LoadedInteractions {
  std::vector<std::string> user_names;
  std::vector<std::string> item_names;
  std::vector<Interaction> interactions;
};

LoadedInteractions load_interactions(const std::string& path);

// one row of attrs_user.tsv / attrs_item.tsv
struct AttrRow {
  std::string entity;
  std::string type_name;
  std::string token;
  std::string file = "<memory>";
  int line = 0;
};

std::vector<AttrRow> load_attr_rows(const std::string& path);

// Per-side token table. Entries are sorted by (slot, token) where slot is
// the side-local attribute type slot; indexes are contiguous from 0. Every
// slot carries an "<unk>" token.
class Vocab {
 public:
  struct Entry {
    int slot = 0;
    std::string token;
  };

  Vocab() = default;
  explicit Vocab(std::vector<Entry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  int find(int slot, const std::string& token) const;  // -1 if absent
  int unk(int slot) const;
  const std::vector<Entry>& entries() const { return entries_; }

  std::string to_tsv() const;
  static Vocab from_tsv(const std::string& text);

 private:
  std::vector<Entry> entries_;
  std::map<std::pair<int, std::string>, int> index_;
  std::vector<int> unk_;
};

// Interactions plus per-entity attribute token multisets, resolved against
// per-side vocabs. attrs[entity][slot] is a sorted list of vocab indexes,
// never empty: a missing or fully pruned value falls back to that slot's
// "<unk>". Multi-hot duplicates are kept, so the lists are multisets.
struct Dataset {
  AttributeSchema schema;
  std::vector<std::string> user_names;
  std::vector<std::string> item_names;
  std::vector<Interaction> interactions;
  Vocab user_vocab;
  Vocab item_vocab;
  std::vector<std::vector<std::vector<int>>> user_attrs;
  std::vector<std::vector<std::vector<int>>> item_attrs;
  // per numerical type name: cluster centers, ascending (token c%04d is the
  // index into this list)
  std::map<std::string, std::vector<double>> quantizer_centers;

  int num_users() const { return static_cast<int>(user_names.size()); }
  int num_items() const { return static_cast<int>(item_names.size()); }
};

// Resolves attribute rows, quantizes numerical values, prunes tokens held
// by fewer than min_count distinct entities, and builds the vocabs.
// Rows naming entities absent from the interactions are skipped; a note per
// skipped row is appended to *warnings when given.
Dataset build_dataset(LoadedInteractions loaded,
                      const std::vector<AttrRow>& user_rows,
                      const std::vector<AttrRow>& item_rows,
                      const AttributeSchema& schema, int min_count,
                      std::vector<std::string>* warnings = nullptr);

// Reads interactions.tsv plus attrs_user.tsv / attrs_item.tsv (each attrs
// file optional) from data_dir and assembles the dataset.
Dataset load_dataset(const std::string& data_dir, const AttributeSchema& schema,
                     int min_count,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace harnn
