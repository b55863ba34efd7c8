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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace emsrt::protocol {

enum class NodeKind { Protocol, Symptom, Medication, Procedure };
enum class Relation { HasSymptom, UsesMedication, UsesProcedure, HasIntervention };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Symptom;
  std::string name;
  std::vector<std::string> terms;
  bool vision_enabled = false;
};

struct Edge {
  std::string src;
  std::string dst;
  Relation relation = Relation::HasSymptom;
};

struct ProtocolGroup {
  std::string group_id;
  std::string adult_protocol_id;
  std::string pediatric_protocol_id;
};

/// Immutable once constructed; safe to share read-only across threads.
///
/// File format (JSON):
///
///   {"version": 1,
///    "nodes": [{"id", "kind": "protocol"|"symptom"|"medication"|"procedure",
///               "name", "terms": [..], "vision_enabled": bool (protocols only)}],
///    "edges": [{"src", "dst", "relation": "has_symptom"|"uses_medication"|
///               "uses_procedure"|"has_intervention"}],
///    "groups": [{"group_id", "adult_protocol_id", "pediatric_protocol_id"}],
///    "interventions": {"<protocol id>": ["label", ...]}}
class KnowledgeBase {
 public:
  /// Throws SchemaError listing every violated rule.
  static KnowledgeBase from_json(const nlohmann::json& doc);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<ProtocolGroup>& groups() const { return groups_; }
  const std::map<std::string, std::vector<std::string>>& interventions() const { return interventions_; }

  const Node* find(const std::string& id) const;
  bool is_protocol(const std::string& id) const;
  std::size_t protocol_count() const { return protocol_ids_.size(); }
  /// Sorted.
  const std::vector<std::string>& protocol_ids() const { return protocol_ids_; }

  const ProtocolGroup* group_by_id(const std::string& group_id) const;
  const ProtocolGroup* group_of(const std::string& protocol_id) const;

  /// Symptom, medication and procedure neighbors reached through
  /// HasSymptom/UsesMedication/UsesProcedure, in edge order, deduplicated.
  std::vector<std::string> evidence_of(const std::string& protocol_id) const;

  /// Sorted union of all intervention labels.
  std::vector<std::string> intervention_vocabulary() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<ProtocolGroup> groups_;
  std::map<std::string, std::vector<std::string>> interventions_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> protocol_ids_;
  std::unordered_map<std::string, std::size_t> group_index_;
  std::unordered_map<std::string, std::size_t> member_group_;
};

/// Every rule violation in `doc`, each prefixed with the rule name
/// (e.g. "edge endpoint: ..."). Empty iff from_json would succeed.
std::vector<std::string> validate_knowledge_base(const nlohmann::json& doc);

/// Reads and validates a KB file. Throws SchemaError.
KnowledgeBase load_knowledge_base(const std::filesystem::path& path);

std::string to_string(NodeKind kind);
std::string to_string(Relation relation);

}  // namespace emsrt::protocol
