#pragma once

#include <string>
#include <vector>

namespace harnn {

enum class AttributeKind { Categorical, MultiHot, Numerical };
enum class EntitySide { User, Item };

const char* to_string(AttributeKind k);
const char* to_string(EntitySide s);
AttributeKind attribute_kind_from_string(const std::string& s);
EntitySide entity_side_from_string(const std::string& s);

struct AttributeType {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  EntitySide side = EntitySide::Item;
  int quantize_k = 32;  // Numerical only: number of 1-D clusters
};

// Declared attribute types. Type names are unique within a side; the
// declaration order fixes the per-side type slots used everywhere else.
struct AttributeSchema {
  std::vector<AttributeType> types;

  std::vector<int> type_slots(EntitySide side) const;  // indexes into `types`
  int find(EntitySide side, const std::string& name) const;  // -1 if absent
  void validate() const;

  std::string to_json() const;
  static AttributeSchema from_json(const std::string& json_text);
  static AttributeSchema load(const std::string& path);
};

}  // namespace harnn
