#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "vrdkit/kg.hpp"

namespace vrdkit::kg {

namespace {

using Id = GraphStore::Id;

struct RuleTables {
  Id type = 0;
  std::unordered_map<Id, std::vector<Id>> superProperties;  // subproperty + equivalence
  std::unordered_map<Id, std::vector<Id>> inverses;
  std::unordered_map<Id, std::vector<Id>> superClasses;  // subclass + equivalence
  std::unordered_map<Id, std::vector<Id>> domains;
  std::unordered_map<Id, std::vector<Id>> ranges;
  std::unordered_set<Id> symmetric;
  std::unordered_set<Id> transitive;

  static const std::vector<Id>& at(const std::unordered_map<Id, std::vector<Id>>& m, Id key) {
    static const std::vector<Id> none;
    const auto it = m.find(key);
    return it == m.end() ? none : it->second;
  }
};

RuleTables compile(const Schema& schema, GraphStore& store) {
  RuleTables r;
  r.type = store.intern(Term::iri(std::string(kRdfType)));
  const auto id = [&](const std::string& local) { return store.intern(Term::iri(schema.iri(local))); };
  for (const auto& a : schema.axioms) {
    switch (a.kind) {
      case AxiomKind::SubPropertyOf:
        r.superProperties[id(a.first)].push_back(id(a.second));
        break;
      case AxiomKind::EquivalentProperties:
        r.superProperties[id(a.first)].push_back(id(a.second));
        r.superProperties[id(a.second)].push_back(id(a.first));
        break;
      case AxiomKind::InverseOf:
        r.inverses[id(a.first)].push_back(id(a.second));
        r.inverses[id(a.second)].push_back(id(a.first));
        break;
      case AxiomKind::Symmetric:
        r.symmetric.insert(id(a.first));
        break;
      case AxiomKind::Transitive:
        r.transitive.insert(id(a.first));
        break;
      case AxiomKind::SubClassOf:
        r.superClasses[id(a.first)].push_back(id(a.second));
        break;
      case AxiomKind::EquivalentClasses:
        r.superClasses[id(a.first)].push_back(id(a.second));
        r.superClasses[id(a.second)].push_back(id(a.first));
        break;
      case AxiomKind::Domain:
        r.domains[id(a.first)].push_back(id(a.second));
        break;
      case AxiomKind::Range:
        r.ranges[id(a.first)].push_back(id(a.second));
        break;
    }
  }
  return r;
}

}  // namespace

GraphStore materialize(const GraphStore& input, const Schema& schema) {
  GraphStore store = input;
  const auto rules = compile(schema, store);

  // Semi-naive evaluation: every triple is processed once after insertion.
  // Two-premise rules join against the store in both directions, so each
  // pair is seen when its later member is processed.
  std::deque<GraphStore::Encoded> pending(store.encoded().begin(), store.encoded().end());
  const auto add = [&](Id s, Id p, Id o) {
    if (store.insert_encoded({s, p, o})) pending.push_back({s, p, o});
  };

  while (!pending.empty()) {
    const auto [s, p, o] = pending.front();
    pending.pop_front();
    // Literals never move into subject position.
    const bool objectIsNode = store.term(o).is_iri();

    for (auto q : RuleTables::at(rules.superProperties, p)) add(s, q, o);
    if (objectIsNode) {
      for (auto q : RuleTables::at(rules.inverses, p)) add(o, q, s);
      if (rules.symmetric.count(p)) add(o, p, s);
      for (auto c : RuleTables::at(rules.ranges, p)) add(o, rules.type, c);
    }
    for (auto c : RuleTables::at(rules.domains, p)) add(s, rules.type, c);
    if (p == rules.type) {
      for (auto d : RuleTables::at(rules.superClasses, o)) add(s, rules.type, d);
    }
    if (rules.transitive.count(p)) {
      const auto forward = store.objects_of(p, o);
      for (auto z : forward) add(s, p, z);
      const auto backward = store.subjects_of(p, s);
      for (auto w : backward) add(w, p, o);
    }
  }
  return store;
}

}  // namespace vrdkit::kg
