#include <algorithm>
#include <cctype>

#include "text.hpp"
#include "vrdkit/kg.hpp"

namespace vrdkit::kg {

namespace {

bool safe_local_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '-' || c == '.';
}

std::string mangle(std::string_view name, bool upperFirstWord) {
  std::string out;
  bool firstWord = true;
  for (auto word : text::tokens(name)) {
    for (std::size_t i = 0; i < word.size(); ++i) {
      auto c = static_cast<unsigned char>(word[i]);
      if (i == 0 && std::isalpha(c)) {
        c = static_cast<unsigned char>((firstWord && !upperFirstWord) ? std::tolower(c)
                                                                       : std::toupper(c));
      }
      if (safe_local_char(c)) {
        out += static_cast<char>(c);
      } else {
        static constexpr char kHex[] = "0123456789ABCDEF";
        out += '%';
        out += kHex[c >> 4];
        out += kHex[c & 0xF];
      }
    }
    firstWord = false;
  }
  if (out.empty()) throw KgError(KgError::Kind::NameCollision, "cannot mangle empty name");
  return out;
}

bool valid_local(std::string_view s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
           c == '^' || c == '`' || c == '\\';
  });
}

bool class_axiom(AxiomKind k) {
  return k == AxiomKind::SubClassOf || k == AxiomKind::EquivalentClasses;
}

bool unary_axiom(AxiomKind k) { return k == AxiomKind::Transitive || k == AxiomKind::Symmetric; }

struct Keyword {
  std::string_view text;
  AxiomKind kind;
};

constexpr Keyword kAxiomKeywords[] = {
    {"subclass", AxiomKind::SubClassOf},     {"eqclass", AxiomKind::EquivalentClasses},
    {"subprop", AxiomKind::SubPropertyOf},   {"eqprop", AxiomKind::EquivalentProperties},
    {"inverse", AxiomKind::InverseOf},       {"transitive", AxiomKind::Transitive},
    {"symmetric", AxiomKind::Symmetric},     {"domain", AxiomKind::Domain},
    {"range", AxiomKind::Range},
};

std::string_view keyword(AxiomKind kind) {
  for (const auto& k : kAxiomKeywords) {
    if (k.kind == kind) return k.text;
  }
  return "?";
}

}  // namespace

std::string mangle_class_name(std::string_view name) { return mangle(name, true); }
std::string mangle_property_name(std::string_view name) { return mangle(name, false); }

Schema Schema::with_builtins(std::string ns) {
  Schema s;
  s.ns = std::move(ns);
  s.classes.insert(std::string(kImageClass));
  s.properties.insert(std::string(kHasObject));
  for (auto p : kCoordinateProperties) s.properties.insert(std::string(p));
  return s;
}

bool Schema::declare_class(const std::string& local) {
  if (!valid_local(local)) throw KgError(KgError::Kind::MalformedAxiom, "invalid class name '" + local + "'");
  if (properties.count(local)) {
    throw KgError(KgError::Kind::MalformedAxiom, "'" + local + "' is already declared as a property");
  }
  return classes.insert(local).second;
}

bool Schema::declare_property(const std::string& local) {
  if (!valid_local(local)) {
    throw KgError(KgError::Kind::MalformedAxiom, "invalid property name '" + local + "'");
  }
  if (classes.count(local)) {
    throw KgError(KgError::Kind::MalformedAxiom, "'" + local + "' is already declared as a class");
  }
  return properties.insert(local).second;
}

void Schema::add_axiom(Axiom axiom, std::size_t line) {
  const auto need = [&](const std::set<std::string>& declared, const std::string& name) {
    if (!declared.count(name)) throw KgError(KgError::Kind::UndeclaredTerm, "undeclared term '" + name + "'", line);
  };
  if (class_axiom(axiom.kind)) {
    need(classes, axiom.first);
    need(classes, axiom.second);
  } else {
    need(properties, axiom.first);
    if (axiom.kind == AxiomKind::Domain || axiom.kind == AxiomKind::Range) {
      need(classes, axiom.second);
    } else if (!unary_axiom(axiom.kind)) {
      need(properties, axiom.second);
    }
  }
  const bool binarySameSort = !unary_axiom(axiom.kind) && axiom.kind != AxiomKind::Domain &&
                              axiom.kind != AxiomKind::Range;
  if (binarySameSort && axiom.first == axiom.second) {
    throw KgError(KgError::Kind::SelfAxiom,
                  std::string(keyword(axiom.kind)) + " relates '" + axiom.first + "' to itself", line);
  }
  if (std::find(axioms.begin(), axioms.end(), axiom) == axioms.end()) axioms.push_back(std::move(axiom));
}

void Schema::designate_class(const std::string& corpusName, const std::string& local, std::size_t line) {
  if (!classes.count(local)) throw KgError(KgError::Kind::UndeclaredTerm, "undeclared class '" + local + "'", line);
  if (local == kImageClass) {
    throw KgError(KgError::Kind::MalformedAxiom, "the image class cannot be an annotation class", line);
  }
  for (const auto& [name, cls] : annotationClasses) {
    if (cls == local && name != corpusName) {
      throw KgError(KgError::Kind::MalformedAxiom,
                    "class '" + local + "' already designated for '" + name + "'", line);
    }
  }
  const auto [it, inserted] = annotationClasses.emplace(corpusName, local);
  if (!inserted && it->second != local) {
    throw KgError(KgError::Kind::MalformedAxiom, "corpus class '" + corpusName + "' designated twice", line);
  }
}

void Schema::designate_property(const std::string& corpusName, const std::string& local,
                                std::size_t line) {
  if (!properties.count(local)) {
    throw KgError(KgError::Kind::UndeclaredTerm, "undeclared property '" + local + "'", line);
  }
  if (local == kHasObject ||
      std::find(kCoordinateProperties.begin(), kCoordinateProperties.end(), local) !=
          kCoordinateProperties.end()) {
    throw KgError(KgError::Kind::MalformedAxiom,
                  "built-in property '" + local + "' cannot be an annotation property", line);
  }
  for (const auto& [name, prop] : annotationProperties) {
    if (prop == local && name != corpusName) {
      throw KgError(KgError::Kind::MalformedAxiom,
                    "property '" + local + "' already designated for '" + name + "'", line);
    }
  }
  const auto [it, inserted] = annotationProperties.emplace(corpusName, local);
  if (!inserted && it->second != local) {
    throw KgError(KgError::Kind::MalformedAxiom, "corpus predicate '" + corpusName + "' designated twice",
                  line);
  }
}

Schema parse_schema(std::string_view source) {
  Schema schema = Schema::with_builtins();
  bool sawDeclaration = false;
  std::size_t lineNo = 0;
  for (auto raw : text::split(source, '\n')) {
    ++lineNo;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = text::tokens(line);
    const auto head = tok[0];
    const auto malformed = [&](const std::string& why) -> KgError {
      return KgError(KgError::Kind::MalformedAxiom, why, lineNo);
    };
    const auto arity = [&](std::size_t n) {
      if (tok.size() != n + 1) {
        throw malformed("'" + std::string(head) + "' takes " + std::to_string(n) + " argument(s)");
      }
    };

    try {
      if (head == "namespace") {
        arity(1);
        if (sawDeclaration) throw malformed("namespace must precede all declarations");
        schema.ns = std::string(tok[1]);
        continue;
      }
      sawDeclaration = true;
      if (head == "class") {
        arity(1);
        schema.declare_class(std::string(tok[1]));
      } else if (head == "prop") {
        arity(1);
        schema.declare_property(std::string(tok[1]));
      } else if (head == "annclass" || head == "annprop") {
        if (tok.size() < 3) throw malformed("'" + std::string(head) + "' takes <corpus name> <term>");
        // Corpus names may contain spaces: everything between keyword and last token.
        const auto nameStart = static_cast<std::size_t>(tok[1].data() - line.data());
        const auto nameEnd = static_cast<std::size_t>(tok.back().data() - line.data());
        auto corpusName = std::string(text::trim(line.substr(nameStart, nameEnd - nameStart)));
        if (corpusName.size() >= 2 && corpusName.front() == '"' && corpusName.back() == '"') {
          corpusName = corpusName.substr(1, corpusName.size() - 2);
        }
        if (head == "annclass") {
          schema.designate_class(corpusName, std::string(tok.back()), lineNo);
        } else {
          schema.designate_property(corpusName, std::string(tok.back()), lineNo);
        }
      } else {
        const auto kw = std::find_if(std::begin(kAxiomKeywords), std::end(kAxiomKeywords),
                                     [&](const Keyword& k) { return k.text == head; });
        if (kw == std::end(kAxiomKeywords)) throw malformed("unknown keyword '" + std::string(head) + "'");
        if (unary_axiom(kw->kind)) {
          arity(1);
          schema.add_axiom({kw->kind, std::string(tok[1]), ""}, lineNo);
        } else {
          arity(2);
          schema.add_axiom({kw->kind, std::string(tok[1]), std::string(tok[2])}, lineNo);
        }
      }
    } catch (const KgError& e) {
      if (e.line() != 0) throw;
      throw KgError(e.kind(), e.what(), lineNo);
    }
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::string serialize_schema(const Schema& schema) {
  const auto builtin = Schema::with_builtins(schema.ns);
  std::string out = "namespace " + schema.ns + "\n";
  for (const auto& c : schema.classes) {
    if (!builtin.classes.count(c)) out += "class " + c + "\n";
  }
  for (const auto& p : schema.properties) {
    if (!builtin.properties.count(p)) out += "prop " + p + "\n";
  }
  for (const auto& a : schema.axioms) {
    out += std::string(keyword(a.kind)) + " " + a.first;
    if (!a.second.empty()) out += " " + a.second;
    out += "\n";
  }
  for (const auto& [name, cls] : schema.annotationClasses) out += "annclass " + name + " " + cls + "\n";
  for (const auto& [name, prop] : schema.annotationProperties) out += "annprop " + name + " " + prop + "\n";
  return out;
}

Schema schema_for_corpus(const AnnotationCorpus& corpus, std::string ns) {
  auto schema = Schema::with_builtins(std::move(ns));
  const auto reserve = [](std::map<std::string, std::string>& owners, const std::string& local,
                          const std::string& name) {
    const auto [it, inserted] = owners.emplace(local, name);
    if (!inserted) {
      throw KgError(KgError::Kind::NameCollision,
                    "names '" + it->second + "' and '" + name + "' both map to '" + local + "'");
    }
  };
  std::map<std::string, std::string> owners;
  for (const auto& c : schema.classes) owners.emplace(c, "<built-in>");
  for (const auto& p : schema.properties) owners.emplace(p, "<built-in>");

  const auto& classes = corpus.objectClasses;
  for (std::size_t id = 0; id < classes.size(); ++id) {
    if (classes.retired(id)) continue;
    const auto local = mangle_class_name(classes.name(id));
    reserve(owners, local, classes.name(id));
    schema.declare_class(local);
    schema.designate_class(classes.name(id), local);
  }
  const auto& preds = corpus.predicates;
  for (std::size_t id = 0; id < preds.size(); ++id) {
    if (preds.retired(id)) continue;
    const auto local = mangle_property_name(preds.name(id));
    reserve(owners, local, preds.name(id));
    schema.declare_property(local);
    schema.designate_property(preds.name(id), local);
  }
  return schema;
}

}  // namespace vrdkit::kg
