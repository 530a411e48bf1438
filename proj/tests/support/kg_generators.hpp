#pragma once

#include <set>
#include <string>
#include <utility>

#include "support/generators.hpp"
#include "vrdkit/kg.hpp"

namespace vrdkit::support {

struct ReasoningInstance {
  kg::Schema schema;
  std::set<kg::Triple> triples;
};

/// Random schema (at most `maxAxioms` axioms over 4 classes and 4 properties)
/// and a random store of at most `maxTriples` triples over 6 individuals.
/// Some triples carry integer literals so that literal guards are exercised.
inline ReasoningInstance random_reasoning_instance(Generator& gen, std::size_t maxTriples = 50,
                                                   std::size_t maxAxioms = 10) {
  using kg::AxiomKind;
  ReasoningInstance inst{kg::Schema::with_builtins(), {}};
  auto& schema = inst.schema;
  const std::vector<std::string> classes = {"C0", "C1", "C2", "C3"};
  const std::vector<std::string> props = {"p0", "p1", "p2", "p3"};
  for (const auto& c : classes) schema.declare_class(c);
  for (const auto& p : props) schema.declare_property(p);

  const auto pick = [&](const std::vector<std::string>& from) { return from[gen.uniform(0, from.size() - 1)]; };
  const auto distinct_pair = [&](const std::vector<std::string>& from) {
    const auto a = gen.uniform(0, from.size() - 1);
    auto b = gen.uniform(0, from.size() - 2);
    if (b >= a) ++b;
    return std::pair{from[a], from[b]};
  };

  const auto nAxioms = gen.uniform(0, maxAxioms);
  for (std::size_t i = 0; i < nAxioms; ++i) {
    const auto kind = static_cast<AxiomKind>(gen.uniform(0, 8));
    kg::Axiom axiom{kind, "", ""};
    switch (kind) {
      case AxiomKind::SubClassOf:
      case AxiomKind::EquivalentClasses:
        std::tie(axiom.first, axiom.second) = distinct_pair(classes);
        break;
      case AxiomKind::SubPropertyOf:
      case AxiomKind::EquivalentProperties:
      case AxiomKind::InverseOf:
        std::tie(axiom.first, axiom.second) = distinct_pair(props);
        break;
      case AxiomKind::Transitive:
      case AxiomKind::Symmetric:
        axiom.first = pick(props);
        break;
      case AxiomKind::Domain:
      case AxiomKind::Range:
        axiom.first = pick(props);
        axiom.second = pick(classes);
        break;
    }
    schema.add_axiom(axiom);
  }

  const auto type = kg::Term::iri(std::string(kg::kRdfType));
  const auto individual = [&] { return kg::Term::iri(schema.iri("i" + std::to_string(gen.uniform(0, 5)))); };
  const auto nTriples = gen.uniform(0, maxTriples);
  for (std::size_t i = 0; i < nTriples; ++i) {
    const auto roll = gen.uniform(0, 9);
    if (roll < 2) {
      inst.triples.insert({individual(), type, kg::Term::iri(schema.iri(pick(classes)))});
    } else if (roll < 3) {
      inst.triples.insert({individual(), kg::Term::iri(schema.iri(pick(props))),
                           kg::Term::integer(static_cast<std::int64_t>(gen.uniform(0, 3)))});
    } else {
      inst.triples.insert({individual(), kg::Term::iri(schema.iri(pick(props))), individual()});
    }
  }
  return inst;
}

inline kg::GraphStore store_of(const std::set<kg::Triple>& triples) {
  kg::GraphStore store;
  for (const auto& t : triples) store.insert(t);
  return store;
}

/// Corpus whose VRs use only `above` and `left of`; the inverse predicates
/// exist in the master list but are unused.
inline AnnotationCorpus inverse_pair_corpus(Generator& gen, std::size_t maxImages, std::size_t maxVrs) {
  auto c = gen.corpus(maxImages, maxVrs, 5, 1);
  c.predicates = MasterList({"above", "below", "left of", "right of"});
  for (auto& [_, vrs] : c.images) {
    for (auto& v : vrs) v.predicateId = gen.coin() ? 0 : 2;
  }
  return c;
}

/// Annotation schema for `c` plus the two inverse axioms.
inline kg::Schema inverse_pair_schema(const AnnotationCorpus& c) {
  auto schema = kg::schema_for_corpus(c);
  schema.add_axiom({kg::AxiomKind::InverseOf, "above", "below"});
  schema.add_axiom({kg::AxiomKind::InverseOf, "leftOf", "rightOf"});
  return schema;
}

/// `c` plus, for every VR, its inverse under the two pairs above, canonicalized.
inline AnnotationCorpus with_inverse_vrs(AnnotationCorpus c) {
  for (auto& [_, vrs] : c.images) {
    const auto n = vrs.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = vrs[i];
      vrs.push_back({v.object, v.predicateId + 1, v.subject});
    }
  }
  return kg::canonicalize_vrs(std::move(c));
}

}  // namespace vrdkit::support
