#include "harnn/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "harnn/kmeans.hpp"
#include "harnn/tsv.hpp"

namespace harnn {

LoadedInteractions load_interactions(const std::string& path) {
  LoadedInteractions out;
  std::unordered_map<std::string, int> user_ids;
  std::unordered_map<std::string, int> item_ids;
  for (const auto& [line_no, fields] : read_tsv_rows(path, 3)) {
    auto uit = user_ids.find(fields[0]);
    if (uit == user_ids.end()) {
      uit = user_ids.emplace(fields[0], static_cast<int>(out.user_names.size()))
                .first;
      out.user_names.push_back(fields[0]);
    }
    auto iit = item_ids.find(fields[1]);
    if (iit == item_ids.end()) {
      iit = item_ids.emplace(fields[1], static_cast<int>(out.item_names.size()))
                .first;
      out.item_names.push_back(fields[1]);
    }
    Interaction row;
    row.user = uit->second;
    row.item = iit->second;
    row.time = parse_int64(fields[2], path, line_no);
    out.interactions.push_back(row);
  }
  if (out.interactions.empty()) throw IoError(path + ": no interactions");
  return out;
}

std::vector<AttrRow> load_attr_rows(const std::string& path) {
  std::vector<AttrRow> rows;
  for (auto& [line_no, fields] : read_tsv_rows(path, 3)) {
    AttrRow row;
    row.entity = std::move(fields[0]);
    row.type_name = std::move(fields[1]);
    row.token = std::move(fields[2]);
    row.file = path;
    row.line = line_no;
    rows.push_back(std::move(row));
  }
  return rows;
}

Vocab::Vocab(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.slot != b.slot) return a.slot < b.slot;
    return a.token < b.token;
  });
  entries_.erase(std::unique(entries_.begin(), entries_.end(),
                             [](const Entry& a, const Entry& b) {
                               return a.slot == b.slot && a.token == b.token;
                             }),
                 entries_.end());
  int max_slot = -1;
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    index_[{entries_[i].slot, entries_[i].token}] = i;
    max_slot = std::max(max_slot, entries_[i].slot);
  }
  unk_.assign(max_slot + 1, -1);
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    if (entries_[i].token == "<unk>") unk_[entries_[i].slot] = i;
  }
}

int Vocab::find(int slot, const std::string& token) const {
  auto it = index_.find({slot, token});
  return it == index_.end() ? -1 : it->second;
}

int Vocab::unk(int slot) const {
  if (slot < 0 || slot >= static_cast<int>(unk_.size()) || unk_[slot] < 0) {
    throw std::out_of_range("vocab has no <unk> for slot " +
                            std::to_string(slot));
  }
  return unk_[slot];
}

std::string Vocab::to_tsv() const {
  std::string out;
  for (const auto& e : entries_) {
    out += std::to_string(e.slot);
    out += '\t';
    out += e.token;
    out += '\n';
  }
  return out;
}

Vocab Vocab::from_tsv(const std::string& text) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2) throw ParseError("<vocab>", 0, "expected 2 fields");
    Entry e;
    e.slot = static_cast<int>(parse_int64(fields[0], "<vocab>", 0));
    e.token = fields[1];
    entries.push_back(std::move(e));
  }
  return Vocab(std::move(entries));
}

namespace {

std::string cluster_token(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%04d", index);
  return buf;
}

struct SideRows {
  // per side-local slot: (entity id, token) in file order
  std::vector<std::vector<std::pair<int, std::string>>> by_slot;
};

// resolve rows to (slot, entity id, token), quantizing numerical values
SideRows resolve_side(const std::vector<AttrRow>& rows, EntitySide side,
                      const AttributeSchema& schema,
                      const std::unordered_map<std::string, int>& entity_ids,
                      std::map<std::string, std::vector<double>>* centers,
                      std::vector<std::string>* warnings) {
  const std::vector<int> slots = schema.type_slots(side);
  std::unordered_map<std::string, int> slot_of;
  for (int k = 0; k < static_cast<int>(slots.size()); ++k) {
    slot_of[schema.types[slots[k]].name] = k;
  }

  SideRows out;
  out.by_slot.resize(slots.size());
  // numerical rows held back until all values of a type are known
  std::vector<std::vector<std::pair<int, double>>> numeric(slots.size());

  for (const auto& row : rows) {
    auto sit = slot_of.find(row.type_name);
    if (sit == slot_of.end()) {
      throw ParseError(row.file, row.line,
                       "attribute type '" + row.type_name +
                           "' not declared for side " +
                           std::string(to_string(side)));
    }
    auto eit = entity_ids.find(row.entity);
    if (eit == entity_ids.end()) {
      if (warnings) {
        warnings->push_back(row.file + ":" + std::to_string(row.line) +
                            ": entity '" + row.entity +
                            "' absent from interactions; row skipped");
      }
      continue;
    }
    const int k = sit->second;
    const AttributeType& type = schema.types[slots[k]];
    if (type.kind == AttributeKind::Numerical) {
      numeric[k].emplace_back(eit->second,
                              parse_double(row.token, row.file, row.line));
    } else {
      out.by_slot[k].emplace_back(eit->second, row.token);
    }
  }

  for (int k = 0; k < static_cast<int>(slots.size()); ++k) {
    const AttributeType& type = schema.types[slots[k]];
    if (type.kind != AttributeKind::Numerical || numeric[k].empty()) continue;
    std::vector<double> values;
    values.reserve(numeric[k].size());
    for (const auto& [id, v] : numeric[k]) values.push_back(v);
    KMeansResult km = kmeans_1d(values, type.quantize_k);
    if (km.reduced_k && warnings) {
      warnings->push_back("numerical attribute '" + type.name + "': only " +
                          std::to_string(km.centers.size()) +
                          " distinct cluster(s) formed, below the requested " +
                          std::to_string(type.quantize_k));
    }
    (*centers)[type.name] = km.centers;
    for (std::size_t i = 0; i < numeric[k].size(); ++i) {
      out.by_slot[k].emplace_back(numeric[k][i].first,
                                  cluster_token(km.assignments[i]));
    }
  }
  return out;
}

// token survival, vocab assembly and per-entity index lists for one side
void finish_side(const SideRows& rows, EntitySide side,
                 const AttributeSchema& schema, int num_entities, int min_count,
                 Vocab* vocab, std::vector<std::vector<std::vector<int>>>* attrs) {
  const std::vector<int> slots = schema.type_slots(side);
  const int n_slots = static_cast<int>(slots.size());

  // distinct-entity counts decide which tokens survive
  std::vector<std::map<std::string, std::set<int>>> holders(n_slots);
  for (int k = 0; k < n_slots; ++k) {
    for (const auto& [entity, token] : rows.by_slot[k]) {
      holders[k][token].insert(entity);
    }
  }

  std::vector<Vocab::Entry> entries;
  for (int k = 0; k < n_slots; ++k) {
    entries.push_back({k, "<unk>"});
    for (const auto& [token, ents] : holders[k]) {
      if (static_cast<int>(ents.size()) >= min_count && token != "<unk>") {
        entries.push_back({k, token});
      }
    }
  }
  *vocab = Vocab(std::move(entries));

  // per entity, per slot: surviving tokens with multiplicity;
  // single-valued kinds keep the last row, multi-hot keeps all rows
  attrs->assign(num_entities,
                std::vector<std::vector<int>>(n_slots));
  for (int k = 0; k < n_slots; ++k) {
    const AttributeType& type = schema.types[slots[k]];
    if (type.kind == AttributeKind::MultiHot) {
      for (const auto& [entity, token] : rows.by_slot[k]) {
        const int idx = vocab->find(k, token);
        if (idx >= 0) (*attrs)[entity][k].push_back(idx);
      }
    } else {
      std::vector<std::string> last(num_entities);
      for (const auto& [entity, token] : rows.by_slot[k]) last[entity] = token;
      for (int e = 0; e < num_entities; ++e) {
        if (last[e].empty()) continue;
        const int idx = vocab->find(k, last[e]);
        if (idx >= 0) (*attrs)[e][k].push_back(idx);
      }
    }
    for (int e = 0; e < num_entities; ++e) {
      auto& list = (*attrs)[e][k];
      if (list.empty()) list.push_back(vocab->unk(k));
      std::sort(list.begin(), list.end());
    }
  }
}

}  // namespace

Dataset build_dataset(LoadedInteractions loaded,
                      const std::vector<AttrRow>& user_rows,
                      const std::vector<AttrRow>& item_rows,
                      const AttributeSchema& schema, int min_count,
                      std::vector<std::string>* warnings) {
  schema.validate();
  Dataset ds;
  ds.schema = schema;
  ds.user_names = std::move(loaded.user_names);
  ds.item_names = std::move(loaded.item_names);
  ds.interactions = std::move(loaded.interactions);

  std::unordered_map<std::string, int> user_ids;
  std::unordered_map<std::string, int> item_ids;
  for (int i = 0; i < ds.num_users(); ++i) user_ids[ds.user_names[i]] = i;
  for (int i = 0; i < ds.num_items(); ++i) item_ids[ds.item_names[i]] = i;

  SideRows u = resolve_side(user_rows, EntitySide::User, schema, user_ids,
                            &ds.quantizer_centers, warnings);
  SideRows it = resolve_side(item_rows, EntitySide::Item, schema, item_ids,
                             &ds.quantizer_centers, warnings);
  finish_side(u, EntitySide::User, schema, ds.num_users(), min_count,
              &ds.user_vocab, &ds.user_attrs);
  finish_side(it, EntitySide::Item, schema, ds.num_items(), min_count,
              &ds.item_vocab, &ds.item_attrs);
  return ds;
}

Dataset load_dataset(const std::string& data_dir, const AttributeSchema& schema,
                     int min_count, std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  LoadedInteractions loaded =
      load_interactions((fs::path(data_dir) / "interactions.tsv").string());
  std::vector<AttrRow> user_rows;
  std::vector<AttrRow> item_rows;
  const fs::path up = fs::path(data_dir) / "attrs_user.tsv";
  const fs::path ip = fs::path(data_dir) / "attrs_item.tsv";
  if (fs::exists(up)) user_rows = load_attr_rows(up.string());
  if (fs::exists(ip)) item_rows = load_attr_rows(ip.string());
  return build_dataset(std::move(loaded), user_rows, item_rows, schema,
                       min_count, warnings);
}

}  // namespace harnn
