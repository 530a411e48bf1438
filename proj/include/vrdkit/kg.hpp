#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vrdkit/corpus.hpp"

namespace vrdkit::kg {

inline constexpr std::string_view kDefaultNamespace = "http://example.org/vrd-world#";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";

/// Vocabulary every schema declares implicitly (local names).
inline constexpr std::string_view kImageClass = "Image";
inline constexpr std::string_view kHasObject = "hasObject";
inline constexpr std::array<std::string_view, 4> kCoordinateProperties{"hasYmin", "hasYmax", "hasXmin",
                                                                       "hasXmax"};

/// An IRI split into namespace and local name.
struct Iri {
  std::string ns;
  std::string local;

  std::string str() const { return ns + local; }
  auto operator<=>(const Iri&) const = default;
};

/// `teddy bear` -> `TeddyBear`. Bytes outside [A-Za-z0-9._-] are percent-encoded.
std::string mangle_class_name(std::string_view name);
/// `sit on` -> `sitOn`.
std::string mangle_property_name(std::string_view name);

/// A node: IRI, integer literal, or string literal.
struct Term {
  enum class Kind : std::uint8_t { Iri, Integer, String };

  Kind kind = Kind::Iri;
  std::string text;  // IRI, or the literal's lexical form

  static Term iri(std::string value) { return {Kind::Iri, std::move(value)}; }
  static Term iri(const Iri& value) { return {Kind::Iri, value.str()}; }
  static Term integer(std::int64_t value) { return {Kind::Integer, std::to_string(value)}; }
  static Term string(std::string value) { return {Kind::String, std::move(value)}; }

  bool is_iri() const noexcept { return kind == Kind::Iri; }
  bool is_literal() const noexcept { return kind != Kind::Iri; }

  auto operator<=>(const Term&) const = default;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
};

/// Line-based serialization of one triple, terminated by " .".
std::string to_ntriples(const Triple& triple);

class KgError : public Error {
 public:
  enum class Kind {
    MalformedAxiom,
    UndeclaredTerm,
    SelfAxiom,
    UnmappedName,
    MalformedGraph,
    AmbiguousClass,
    MalformedTriple,
    NameCollision,
  };

  KgError(Kind kind, const std::string& what, std::size_t line = 0)
      : Error(ErrorCategory::Data, line ? "line " + std::to_string(line) + ": " + what : what),
        kind_(kind),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

enum class AxiomKind {
  SubClassOf,
  EquivalentClasses,
  SubPropertyOf,
  EquivalentProperties,
  InverseOf,
  Transitive,
  Symmetric,
  Domain,
  Range,
};

/// Axiom over local names. `second` is empty for Transitive and Symmetric;
/// for Domain and Range it names the class.
struct Axiom {
  AxiomKind kind = AxiomKind::SubClassOf;
  std::string first;
  std::string second;

  auto operator<=>(const Axiom&) const = default;
};

struct Schema {
  std::string ns = std::string(kDefaultNamespace);
  std::set<std::string> classes;
  std::set<std::string> properties;
  std::vector<Axiom> axioms;
  /// Corpus class name -> schema class local name.
  std::map<std::string, std::string> annotationClasses;
  /// Corpus predicate name -> schema property local name.
  std::map<std::string, std::string> annotationProperties;

  /// A schema holding only the built-in vocabulary.
  static Schema with_builtins(std::string ns = std::string(kDefaultNamespace));

  Iri iri(std::string_view local) const { return {ns, std::string(local)}; }

  /// Declares a class/property; returns false if already declared.
  bool declare_class(const std::string& local);
  bool declare_property(const std::string& local);
  /// Appends an axiom after checking declarations and distinctness.
  void add_axiom(Axiom axiom, std::size_t line = 0);
  void designate_class(const std::string& corpusName, const std::string& local, std::size_t line = 0);
  void designate_property(const std::string& corpusName, const std::string& local,
                          std::size_t line = 0);

  bool operator==(const Schema&) const = default;
};

/// Parses the line-oriented axiom format (see README).
Schema parse_schema(std::string_view text);
Schema load_schema(const std::filesystem::path& path);
std::string serialize_schema(const Schema& schema);

/// A schema declaring one class per live object-class name and one property
/// per live predicate, each designated for annotation, under mangled names.
/// Throws KgError(NameCollision) if two names mangle alike.
Schema schema_for_corpus(const AnnotationCorpus& corpus,
                         std::string ns = std::string(kDefaultNamespace));

/// Set of triples with dictionary-encoded terms and (s), (p,s), (p,o) indexes.
class GraphStore {
 public:
  using Id = std::uint32_t;
  using Encoded = std::array<Id, 3>;

  /// Inserts a triple; returns false if already present. Throws
  /// KgError(MalformedTriple) for literals outside object position.
  bool insert(const Triple& triple);
  bool contains(const Triple& triple) const;
  std::size_t size() const noexcept { return spo_.size(); }
  bool empty() const noexcept { return spo_.empty(); }

  /// All triples in ascending order of their serialized form.
  std::vector<Triple> triples() const;
  std::set<Triple> triple_set() const;

  /// Objects o with (subject, predicate, o).
  std::vector<Term> objects(const Term& subject, const Term& predicate) const;
  /// Subjects s with (s, predicate, object).
  std::vector<Term> subjects(const Term& predicate, const Term& object) const;
  /// Every triple whose subject is `subject`.
  std::vector<Triple> outgoing(const Term& subject) const;
  /// Every triple whose predicate is `predicate`.
  std::vector<Triple> with_predicate(const Term& predicate) const;

  bool operator==(const GraphStore& other) const { return triple_set() == other.triple_set(); }

  // Encoded access for the reasoner.
  Id intern(const Term& term);
  std::optional<Id> lookup(const Term& term) const;
  const Term& term(Id id) const { return terms_.at(id); }
  bool insert_encoded(const Encoded& t);
  const std::vector<Id>& objects_of(Id predicate, Id subject) const;
  const std::vector<Id>& subjects_of(Id predicate, Id object) const;
  const std::set<Encoded>& encoded() const noexcept { return spo_; }

 private:
  struct TermHash {
    std::size_t operator()(const Term& t) const noexcept {
      return std::hash<std::string>{}(t.text) * 3 + static_cast<std::size_t>(t.kind);
    }
  };
  struct PairHash {
    std::size_t operator()(const std::pair<Id, Id>& p) const noexcept {
      return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
    }
  };

  std::vector<Term> terms_;
  std::unordered_map<Term, Id, TermHash> ids_;
  std::set<Encoded> spo_;
  std::unordered_map<std::pair<Id, Id>, std::vector<Id>, PairHash> byPredSubj_;
  std::unordered_map<std::pair<Id, Id>, std::vector<Id>, PairHash> byPredObj_;
  std::unordered_map<Id, std::vector<Encoded>> bySubject_;
  std::unordered_map<Id, std::vector<Encoded>> byPredicate_;
};

/// One line per triple, sorted.
std::string serialize_store(const GraphStore& store);
GraphStore parse_store(std::string_view text);
GraphStore load_store(const std::filesystem::path& path);
void save_store(const GraphStore& store, const std::filesystem::path& path);

/// Builds the graph for a corpus: per image an individual labeled with its
/// filename; per distinct (class, box) object an individual with its class
/// type and four coordinate literals; per VR one property triple.
/// Throws KgError(UnmappedName) for names used in the corpus without a
/// designation in the schema.
GraphStore lower_annotations(const AnnotationCorpus& corpus, const Schema& schema);
GraphStore lower_image(const AnnotationCorpus& corpus, const std::string& filename, const Schema& schema);

/// Least fixpoint under subproperty, equivalent property, inverse,
/// symmetric, transitive, subclass, equivalent class, domain and range rules.
GraphStore materialize(const GraphStore& store, const Schema& schema);

/// Reads annotations back out of a (possibly materialized) graph. Only
/// designated annotation properties yield VRs; each object takes its unique
/// most specific designated class. VRs are canonically ordered and deduped.
AnnotationCorpus extract_annotations(const GraphStore& store, const Schema& schema,
                                     const MasterList& objectClasses, const MasterList& predicates);

/// Sorts each image's VRs by (subject box, subject class, predicate, object
/// box, object class) and drops exact duplicates.
AnnotationCorpus canonicalize_vrs(AnnotationCorpus corpus);

}  // namespace vrdkit::kg
