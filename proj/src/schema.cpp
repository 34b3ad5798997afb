#include "harnn/schema.hpp"

#include <set>
#include <stdexcept>

#include "harnn/tsv.hpp"
#include "json.hpp"

namespace harnn {

const char* to_string(AttributeKind k) {
  switch (k) {
    case AttributeKind::Categorical: return "categorical";
    case AttributeKind::MultiHot: return "multi_hot";
    case AttributeKind::Numerical: return "numerical";
  }
  return "?";
}

const char* to_string(EntitySide s) {
  return s == EntitySide::User ? "user" : "item";
}

AttributeKind attribute_kind_from_string(const std::string& s) {
  if (s == "categorical") return AttributeKind::Categorical;
  if (s == "multi_hot" || s == "multihot") return AttributeKind::MultiHot;
  if (s == "numerical") return AttributeKind::Numerical;
  throw std::invalid_argument("unknown attribute kind: '" + s + "'");
}

EntitySide entity_side_from_string(const std::string& s) {
  if (s == "user") return EntitySide::User;
  if (s == "item") return EntitySide::Item;
  throw std::invalid_argument("unknown entity side: '" + s + "'");
}

std::vector<int> AttributeSchema::type_slots(EntitySide side) const {
  std::vector<int> slots;
  for (int i = 0; i < static_cast<int>(types.size()); ++i) {
    if (types[i].side == side) slots.push_back(i);
  }
  return slots;
}

int AttributeSchema::find(EntitySide side, const std::string& name) const {
  for (int i = 0; i < static_cast<int>(types.size()); ++i) {
    if (types[i].side == side && types[i].name == name) return i;
  }
  return -1;
}

void AttributeSchema::validate() const {
  std::set<std::pair<int, std::string>> seen;
  for (const auto& t : types) {
    if (t.name.empty()) {
      throw std::invalid_argument("schema: empty attribute type name");
    }
    if (!seen.insert({static_cast<int>(t.side), t.name}).second) {
      throw std::invalid_argument("schema: duplicate attribute type '" + t.name +
                               "' on side " + to_string(t.side));
    }
    if (t.kind == AttributeKind::Numerical && t.quantize_k < 1) {
      throw std::invalid_argument("schema: numerical type '" + t.name +
                               "' needs k >= 1");
    }
  }
}

std::string AttributeSchema::to_json() const {
  nlohmann::json j;
  j["attributes"] = nlohmann::json::array();
  for (const auto& t : types) {
    nlohmann::json e;
    e["name"] = t.name;
    e["kind"] = to_string(t.kind);
    e["side"] = to_string(t.side);
    if (t.kind == AttributeKind::Numerical) e["k"] = t.quantize_k;
    j["attributes"].push_back(e);
  }
  return j.dump(2) + "\n";
}

AttributeSchema AttributeSchema::from_json(const std::string& json_text) {
  AttributeSchema schema;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("schema: invalid json: ") + e.what());
  }
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw std::invalid_argument("schema: missing 'attributes' array");
  }
  for (const auto& e : j["attributes"]) {
    AttributeType t;
    t.name = e.at("name").get<std::string>();
    t.kind = attribute_kind_from_string(e.at("kind").get<std::string>());
    t.side = entity_side_from_string(e.at("side").get<std::string>());
    if (t.kind == AttributeKind::Numerical) {
      t.quantize_k = e.value("k", 32);
    }
    schema.types.push_back(std::move(t));
  }
  schema.validate();
  return schema;
}

AttributeSchema AttributeSchema::load(const std::string& path) {
  return from_json(read_file(path));
}

}  // namespace harnn
