#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "vrdkit/kg.hpp"

namespace vrdkit::kg {

namespace {

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
        c == '-' || c == '.') {
      out += ch;
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

class Lowering {
 public:
  Lowering(const AnnotationCorpus& corpus, const Schema& schema) : corpus_(corpus), schema_(schema) {
    label_ = Term::iri(std::string(kRdfsLabel));
    type_ = Term::iri(std::string(kRdfType));
    hasObject_ = Term::iri(schema.iri(kHasObject));
    for (std::size_t i = 0; i < 4; ++i) coords_[i] = Term::iri(schema.iri(kCoordinateProperties[i]));
  }

  void image(GraphStore& store, const std::string& filename,
             const std::vector<VisualRelationship>& vrs) {
    const auto imageIri = schema_.ns + "image/" + percent_encode(filename);
    const auto img = Term::iri(imageIri);
    store.insert({img, label_, Term::string(filename)});

    std::map<AnnotatedObject, Term> individuals;
    const auto individual = [&](const AnnotatedObject& obj) -> const Term& {
      const auto it = individuals.find(obj);
      if (it != individuals.end()) return it->second;
      auto node = Term::iri(imageIri + "/object/" + std::to_string(individuals.size()));
      store.insert({img, hasObject_, node});
      store.insert({node, type_, class_term(obj.classId)});
      const std::int64_t coords[4] = {obj.bbox.ymin, obj.bbox.ymax, obj.bbox.xmin, obj.bbox.xmax};
      for (std::size_t i = 0; i < 4; ++i) store.insert({node, coords_[i], Term::integer(coords[i])});
      return individuals.emplace(obj, std::move(node)).first->second;
    };

    for (const auto& vr : vrs) {
      const auto subject = individual(vr.subject);
      const auto object = individual(vr.object);
      store.insert({subject, property_term(vr.predicateId), object});
    }
  }

 private:
  Term class_term(ClassId id) const {
    const auto& name = corpus_.class_name(id);
    const auto it = schema_.annotationClasses.find(name);
    if (it == schema_.annotationClasses.end()) {
      throw KgError(KgError::Kind::UnmappedName, "object class '" + name + "' has no annclass mapping");
    }
    return Term::iri(schema_.iri(it->second));
  }

  Term property_term(PredicateId id) const {
    const auto& name = corpus_.predicate_name(id);
    const auto it = schema_.annotationProperties.find(name);
    if (it == schema_.annotationProperties.end()) {
      throw KgError(KgError::Kind::UnmappedName, "predicate '" + name + "' has no annprop mapping");
    }
    return Term::iri(schema_.iri(it->second));
  }

  const AnnotationCorpus& corpus_;
  const Schema& schema_;
  Term label_, type_, hasObject_;
  std::array<Term, 4> coords_;
};

/// Reflexive-transitive superclass sets keyed by class IRI.
std::map<std::string, std::set<std::string>> superclass_closure(const Schema& schema) {
  std::map<std::string, std::set<std::string>> direct;
  for (const auto& a : schema.axioms) {
    if (a.kind == AxiomKind::SubClassOf) {
      direct[a.first].insert(a.second);
    } else if (a.kind == AxiomKind::EquivalentClasses) {
      direct[a.first].insert(a.second);
      direct[a.second].insert(a.first);
    }
  }
  std::map<std::string, std::set<std::string>> closure;
  for (const auto& c : schema.classes) {
    auto& reach = closure[schema.iri(c).str()];
    std::vector<std::string> stack{c};
    std::set<std::string> seen{c};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      reach.insert(schema.iri(cur).str());
      for (const auto& d : direct[cur]) {
        if (seen.insert(d).second) stack.push_back(d);
      }
    }
  }
  return closure;
}

}  // namespace

GraphStore lower_annotations(const AnnotationCorpus& corpus, const Schema& schema) {
  GraphStore store;
  Lowering lowering(corpus, schema);
  for (const auto& [filename, vrs] : corpus.images) lowering.image(store, filename, vrs);
  return store;
}

GraphStore lower_image(const AnnotationCorpus& corpus, const std::string& filename, const Schema& schema) {
  const auto it = corpus.images.find(filename);
  if (it == corpus.images.end()) throw ImageNotFoundError(filename);
  GraphStore store;
  Lowering(corpus, schema).image(store, filename, it->second);
  return store;
}

AnnotationCorpus canonicalize_vrs(AnnotationCorpus corpus) {
  const auto key = [](const VisualRelationship& vr) {
    return std::tie(vr.subject.bbox, vr.subject.classId, vr.predicateId, vr.object.bbox, vr.object.classId);
  };
  for (auto& [_, vrs] : corpus.images) {
    std::sort(vrs.begin(), vrs.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    vrs.erase(std::unique(vrs.begin(), vrs.end()), vrs.end());
  }
  return corpus;
}

AnnotationCorpus extract_annotations(const GraphStore& store, const Schema& schema,
                                     const MasterList& objectClasses, const MasterList& predicates) {
  const auto malformed = [](const std::string& why) {
    return KgError(KgError::Kind::MalformedGraph, why);
  };
  const Term label = Term::iri(std::string(kRdfsLabel));
  const Term type = Term::iri(std::string(kRdfType));
  const Term hasObject = Term::iri(schema.iri(kHasObject));
  std::array<Term, 4> coords;
  for (std::size_t i = 0; i < 4; ++i) coords[i] = Term::iri(schema.iri(kCoordinateProperties[i]));

  // Designated terms to corpus ids.
  std::map<std::string, ClassId> classIds;
  for (const auto& [name, local] : schema.annotationClasses) {
    if (auto id = objectClasses.find(name)) classIds.emplace(schema.iri(local).str(), *id);
  }
  std::map<std::string, std::string> classNames;  // IRI -> corpus name, for error messages
  for (const auto& [name, local] : schema.annotationClasses) classNames.emplace(schema.iri(local).str(), name);
  std::map<std::string, std::string> propertyNames;
  for (const auto& [name, local] : schema.annotationProperties) {
    propertyNames.emplace(schema.iri(local).str(), name);
  }
  const auto closure = superclass_closure(schema);
  const auto subclass_of = [&](const std::string& c, const std::string& d) {
    const auto it = closure.find(c);
    return c == d || (it != closure.end() && it->second.count(d));
  };

  AnnotationCorpus corpus;
  corpus.objectClasses = objectClasses;
  corpus.predicates = predicates;

  std::map<std::string, std::string> filenameOf;  // image IRI -> filename
  for (const auto& t : store.with_predicate(label)) {
    if (t.object.kind != Term::Kind::String) throw malformed("non-string label on <" + t.subject.text + ">");
    if (!filenameOf.emplace(t.subject.text, t.object.text).second) {
      throw malformed("image <" + t.subject.text + "> has more than one filename");
    }
  }

  std::map<std::string, std::string> ownerOf;  // object IRI -> image IRI
  for (const auto& [imageIri, filename] : filenameOf) {
    const auto [slot, fresh] = corpus.images.try_emplace(filename);
    if (!fresh) throw malformed("filename '" + filename + "' labels two image individuals");

    std::map<std::string, AnnotatedObject> objects;
    for (const auto& node : store.objects(Term::iri(imageIri), hasObject)) {
      if (!node.is_iri()) throw malformed("image <" + imageIri + "> has a literal object");
      const auto [owner, firstOwner] = ownerOf.emplace(node.text, imageIri);
      if (!firstOwner && owner->second != imageIri) {
        throw malformed("object <" + node.text + "> belongs to more than one image");
      }

      AnnotatedObject obj;
      std::int64_t values[4] = {};
      for (std::size_t i = 0; i < 4; ++i) {
        const auto found = store.objects(node, coords[i]);
        if (found.size() != 1 || found[0].kind != Term::Kind::Integer) {
          throw malformed("object <" + node.text + "> has " + std::to_string(found.size()) + " " +
                          std::string(kCoordinateProperties[i]) + " integer values, expected 1");
        }
        values[i] = std::stoll(found[0].text);
      }
      obj.bbox = {values[0], values[1], values[2], values[3]};

      std::vector<std::string> candidates;
      for (const auto& t : store.objects(node, type)) {
        if (t.is_iri() && classNames.count(t.text)) candidates.push_back(t.text);
      }
      std::vector<std::string> minima;
      for (const auto& c : candidates) {
        if (std::all_of(candidates.begin(), candidates.end(),
                        [&](const std::string& d) { return subclass_of(c, d); })) {
          minima.push_back(c);
        }
      }
      if (minima.size() != 1) {
        throw KgError(KgError::Kind::AmbiguousClass,
                      "object <" + node.text + "> has " + std::to_string(candidates.size()) +
                          " annotation classes and no unique most specific one");
      }
      const auto id = classIds.find(minima[0]);
      if (id == classIds.end()) {
        throw KgError(KgError::Kind::UnmappedName,
                      "class '" + classNames.at(minima[0]) + "' is not in the object-class list");
      }
      obj.classId = id->second;
      objects.emplace(node.text, obj);
    }

    auto& vrs = slot->second;
    for (const auto& [nodeIri, subject] : objects) {
      for (const auto& t : store.outgoing(Term::iri(nodeIri))) {
        const auto prop = propertyNames.find(t.predicate.text);
        if (prop == propertyNames.end() || !t.object.is_iri()) continue;
        const auto target = objects.find(t.object.text);
        if (target == objects.end()) continue;
        const auto pid = predicates.find(prop->second);
        if (!pid) {
          throw KgError(KgError::Kind::UnmappedName,
                        "predicate '" + prop->second + "' is not in the predicate list");
        }
        vrs.push_back({subject, *pid, target->second});
      }
    }
  }
  return canonicalize_vrs(std::move(corpus));
}

}  // namespace vrdkit::kg
