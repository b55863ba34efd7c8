// Copyright 2026 The emsrt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emsrt/protocol/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "emsrt/common/error.hpp"

namespace emsrt::protocol {
namespace {

using nlohmann::json;

const std::map<std::string, NodeKind> kKinds = {{"protocol", NodeKind::Protocol},
                                                {"symptom", NodeKind::Symptom},
                                                {"medication", NodeKind::Medication},
                                                {"procedure", NodeKind::Procedure}};

const std::map<std::string, Relation> kRelations = {{"has_symptom", Relation::HasSymptom},
                                                    {"uses_medication", Relation::UsesMedication},
                                                    {"uses_procedure", Relation::UsesProcedure},
                                                    {"has_intervention", Relation::HasIntervention}};

NodeKind target_kind(Relation r) {
  switch (r) {
    case Relation::HasSymptom: return NodeKind::Symptom;
    case Relation::UsesMedication: return NodeKind::Medication;
    case Relation::UsesProcedure:
    case Relation::HasIntervention: return NodeKind::Procedure;
  }
  return NodeKind::Procedure;
}

std::string str_field(const json& obj, const char* key, const std::string& where,
                      std::vector<std::string>& out) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    out.push_back("schema: " + where + " needs a non-empty string '" + key + "'");
    return {};
  }
  return it->get<std::string>();
}

struct Parsed {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<ProtocolGroup> groups;
  std::map<std::string, std::vector<std::string>> interventions;
};

Parsed parse(const json& doc, std::vector<std::string>& v) {
  Parsed p;
  if (!doc.is_object()) {
    v.push_back("schema: document must be an object");
    return p;
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "version" && key != "nodes" && key != "edges" && key != "groups" && key != "interventions")
      v.push_back("schema: unknown top-level key '" + key + "'");
  }
  if (doc.contains("version") && doc["version"] != 1) v.push_back("schema: unsupported version");

  const json empty_array = json::array();
  auto section = [&](const char* key) -> const json& {
    if (!doc.contains(key)) return empty_array;
    if (!doc[key].is_array()) {
      v.push_back(std::string("schema: '") + key + "' must be an array");
      return empty_array;
    }
    return doc[key];
  };

  std::size_t i = 0;
  for (const auto& jn : section("nodes")) {
    const std::string where = "nodes[" + std::to_string(i++) + "]";
    if (!jn.is_object()) {
      v.push_back("schema: " + where + " must be an object");
      continue;
    }
    Node n;
    n.id = str_field(jn, "id", where, v);
    const auto kind = str_field(jn, "kind", where, v);
    if (auto k = kKinds.find(kind); k != kKinds.end()) {
      n.kind = k->second;
    } else if (!kind.empty()) {
      v.push_back("schema: " + where + " has unknown kind '" + kind + "'");
      continue;
    } else {
      continue;
    }
    n.name = jn.value("name", n.id);
    if (jn.contains("terms")) {
      if (!jn["terms"].is_array()) {
        v.push_back("schema: " + where + " terms must be an array of strings");
      } else {
        for (const auto& t : jn["terms"]) {
          if (t.is_string()) n.terms.push_back(t.get<std::string>());
          else v.push_back("schema: " + where + " terms must be an array of strings");
        }
      }
    }
    if (jn.contains("vision_enabled")) {
      if (!jn["vision_enabled"].is_boolean()) v.push_back("schema: " + where + " vision_enabled must be a boolean");
      else n.vision_enabled = jn["vision_enabled"].get<bool>();
      if (n.vision_enabled && n.kind != NodeKind::Protocol)
        v.push_back("vision enabled: " + where + " is not a protocol");
    }
    if (!n.id.empty()) p.nodes.push_back(std::move(n));
  }

  i = 0;
  for (const auto& je : section("edges")) {
    const std::string where = "edges[" + std::to_string(i++) + "]";
    if (!je.is_object()) {
      v.push_back("schema: " + where + " must be an object");
      continue;
    }
    Edge e;
    e.src = str_field(je, "src", where, v);
    e.dst = str_field(je, "dst", where, v);
    const auto rel = str_field(je, "relation", where, v);
    if (auto r = kRelations.find(rel); r != kRelations.end()) e.relation = r->second;
    else if (!rel.empty()) v.push_back("schema: " + where + " has unknown relation '" + rel + "'");
    if (!e.src.empty() && !e.dst.empty() && kRelations.count(rel)) p.edges.push_back(std::move(e));
  }

  i = 0;
  for (const auto& jg : section("groups")) {
    const std::string where = "groups[" + std::to_string(i++) + "]";
    if (!jg.is_object()) {
      v.push_back("schema: " + where + " must be an object");
      continue;
    }
    ProtocolGroup g;
    g.group_id = str_field(jg, "group_id", where, v);
    g.adult_protocol_id = str_field(jg, "adult_protocol_id", where, v);
    g.pediatric_protocol_id = str_field(jg, "pediatric_protocol_id", where, v);
    if (!g.group_id.empty() && !g.adult_protocol_id.empty() && !g.pediatric_protocol_id.empty())
      p.groups.push_back(std::move(g));
  }

  if (doc.contains("interventions")) {
    if (!doc["interventions"].is_object()) {
      v.push_back("schema: 'interventions' must be an object");
    } else {
      for (const auto& [pid, labels] : doc["interventions"].items()) {
        std::vector<std::string> list;
        if (!labels.is_array()) {
          v.push_back("schema: interventions['" + pid + "'] must be an array of strings");
          continue;
        }
        for (const auto& l : labels) {
          if (l.is_string()) list.push_back(l.get<std::string>());
          else v.push_back("schema: interventions['" + pid + "'] must be an array of strings");
        }
        p.interventions.emplace(pid, std::move(list));
      }
    }
  }
  return p;
}

void check_rules(const Parsed& p, std::vector<std::string>& v) {
  std::unordered_map<std::string, const Node*> by_id;
  std::size_t protocols = 0;
  for (const auto& n : p.nodes) {
    if (!by_id.emplace(n.id, &n).second) v.push_back("duplicate node id: '" + n.id + "'");
    if (n.kind == NodeKind::Protocol) ++protocols;
  }
  if (protocols == 0) v.push_back("protocol required: the knowledge base has no protocol nodes");

  for (const auto& e : p.edges) {
    auto s = by_id.find(e.src);
    auto d = by_id.find(e.dst);
    if (s == by_id.end()) v.push_back("edge endpoint: source '" + e.src + "' does not exist");
    if (d == by_id.end()) v.push_back("edge endpoint: target '" + e.dst + "' does not exist");
    if (s == by_id.end() || d == by_id.end()) continue;
    if (s->second->kind != NodeKind::Protocol)
      v.push_back("edge kind: " + to_string(e.relation) + " source '" + e.src + "' is not a protocol");
    if (d->second->kind != target_kind(e.relation))
      v.push_back("edge kind: " + to_string(e.relation) + " target '" + e.dst + "' is not a " +
                  to_string(target_kind(e.relation)));
  }

  std::set<std::string> grouped;
  std::set<std::string> group_ids;
  for (const auto& g : p.groups) {
    if (!group_ids.insert(g.group_id).second) v.push_back("duplicate group id: '" + g.group_id + "'");
    if (by_id.count(g.group_id)) v.push_back("group id: '" + g.group_id + "' collides with a node id");
    for (const auto* member : {&g.adult_protocol_id, &g.pediatric_protocol_id}) {
      auto it = by_id.find(*member);
      if (it == by_id.end() || it->second->kind != NodeKind::Protocol)
        v.push_back("group member: '" + *member + "' in group '" + g.group_id + "' is not a protocol");
      if (!grouped.insert(*member).second)
        v.push_back("single group: protocol '" + *member + "' appears in more than one group slot");
    }
  }

  for (const auto& [pid, labels] : p.interventions) {
    auto it = by_id.find(pid);
    if (it == by_id.end() || it->second->kind != NodeKind::Protocol)
      v.push_back("intervention owner: '" + pid + "' is not a protocol");
    std::set<std::string> uniq;
    for (const auto& l : labels) {
      if (l.empty()) v.push_back("intervention labels: empty label for '" + pid + "'");
      if (!uniq.insert(l).second) v.push_back("intervention labels: duplicate '" + l + "' for '" + pid + "'");
    }
  }
  for (const auto& n : p.nodes) {
    if (!n.vision_enabled) continue;
    auto it = p.interventions.find(n.id);
    if (it == p.interventions.end() || it->second.empty())
      v.push_back("vision enabled: protocol '" + n.id + "' has no intervention labels");
  }
}

}  // namespace

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Protocol: return "protocol";
    case NodeKind::Symptom: return "symptom";
    case NodeKind::Medication: return "medication";
    case NodeKind::Procedure: return "procedure";
  }
  return "?";
}

std::string to_string(Relation relation) {
  switch (relation) {
    case Relation::HasSymptom: return "has_symptom";
    case Relation::UsesMedication: return "uses_medication";
    case Relation::UsesProcedure: return "uses_procedure";
    case Relation::HasIntervention: return "has_intervention";
  }
  return "?";
}

std::vector<std::string> validate_knowledge_base(const nlohmann::json& doc) {
  std::vector<std::string> v;
  auto parsed = parse(doc, v);
  check_rules(parsed, v);
  return v;
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& doc) {
  std::vector<std::string> v;
  auto parsed = parse(doc, v);
  check_rules(parsed, v);
  if (!v.empty()) {
    std::string report = "invalid knowledge base:";
    for (const auto& line : v) report += "\n  " + line;
    throw SchemaError(report);
  }
  KnowledgeBase kb;
  kb.nodes_ = std::move(parsed.nodes);
  kb.edges_ = std::move(parsed.edges);
  kb.groups_ = std::move(parsed.groups);
  kb.interventions_ = std::move(parsed.interventions);
  for (std::size_t i = 0; i < kb.nodes_.size(); ++i) {
    kb.index_.emplace(kb.nodes_[i].id, i);
    if (kb.nodes_[i].kind == NodeKind::Protocol) kb.protocol_ids_.push_back(kb.nodes_[i].id);
  }
  std::sort(kb.protocol_ids_.begin(), kb.protocol_ids_.end());
  for (std::size_t i = 0; i < kb.groups_.size(); ++i) {
    kb.group_index_.emplace(kb.groups_[i].group_id, i);
    kb.member_group_.emplace(kb.groups_[i].adult_protocol_id, i);
    kb.member_group_.emplace(kb.groups_[i].pediatric_protocol_id, i);
  }
  return kb;
}

const Node* KnowledgeBase::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

bool KnowledgeBase::is_protocol(const std::string& id) const {
  const Node* n = find(id);
  return n && n->kind == NodeKind::Protocol;
}

const ProtocolGroup* KnowledgeBase::group_by_id(const std::string& group_id) const {
  auto it = group_index_.find(group_id);
  return it == group_index_.end() ? nullptr : &groups_[it->second];
}

const ProtocolGroup* KnowledgeBase::group_of(const std::string& protocol_id) const {
  auto it = member_group_.find(protocol_id);
  return it == member_group_.end() ? nullptr : &groups_[it->second];
}

std::vector<std::string> KnowledgeBase::evidence_of(const std::string& protocol_id) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.src != protocol_id || e.relation == Relation::HasIntervention) continue;
    if (std::find(out.begin(), out.end(), e.dst) == out.end()) out.push_back(e.dst);
  }
  return out;
}

std::vector<std::string> KnowledgeBase::intervention_vocabulary() const {
  std::set<std::string> all;
  for (const auto& [_, labels] : interventions_) all.insert(labels.begin(), labels.end());
  return {all.begin(), all.end()};
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read knowledge base '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("knowledge base '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return KnowledgeBase::from_json(doc);
}

}  // namespace emsrt::protocol
