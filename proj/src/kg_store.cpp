#include <algorithm>
#include <charconv>

#include "text.hpp"
#include "vrdkit/kg.hpp"

namespace vrdkit::kg {

namespace {

const std::vector<GraphStore::Id> kNoIds;

std::string escape_literal(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string term_text(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Iri: return "<" + t.text + ">";
    case Term::Kind::Integer: return "\"" + t.text + "\"^^<" + std::string(kXsdInteger) + ">";
    case Term::Kind::String: return "\"" + escape_literal(t.text) + "\"";
  }
  return {};
}

}  // namespace

std::string to_ntriples(const Triple& t) {
  return term_text(t.subject) + " " + term_text(t.predicate) + " " + term_text(t.object) + " .";
}

// ---------------------------------------------------------------------------
// GraphStore

GraphStore::Id GraphStore::intern(const Term& term) {
  const auto [it, inserted] = ids_.try_emplace(term, static_cast<Id>(terms_.size()));
  if (inserted) terms_.push_back(term);
  return it->second;
}

std::optional<GraphStore::Id> GraphStore::lookup(const Term& term) const {
  const auto it = ids_.find(term);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool GraphStore::insert_encoded(const Encoded& t) {
  if (!spo_.insert(t).second) return false;
  byPredSubj_[{t[1], t[0]}].push_back(t[2]);
  byPredObj_[{t[1], t[2]}].push_back(t[0]);
  bySubject_[t[0]].push_back(t);
  byPredicate_[t[1]].push_back(t);
  return true;
}

bool GraphStore::insert(const Triple& t) {
  if (!t.subject.is_iri() || !t.predicate.is_iri()) {
    throw KgError(KgError::Kind::MalformedTriple, "literal outside object position: " + to_ntriples(t));
  }
  return insert_encoded({intern(t.subject), intern(t.predicate), intern(t.object)});
}

bool GraphStore::contains(const Triple& t) const {
  const auto s = lookup(t.subject), p = lookup(t.predicate), o = lookup(t.object);
  return s && p && o && spo_.count({*s, *p, *o});
}

std::set<Triple> GraphStore::triple_set() const {
  std::set<Triple> out;
  for (const auto& t : spo_) out.insert({terms_[t[0]], terms_[t[1]], terms_[t[2]]});
  return out;
}

std::vector<Triple> GraphStore::triples() const {
  std::vector<std::pair<std::string, Triple>> keyed;
  keyed.reserve(spo_.size());
  for (const auto& t : spo_) {
    Triple triple{terms_[t[0]], terms_[t[1]], terms_[t[2]]};
    keyed.emplace_back(to_ntriples(triple), std::move(triple));
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Triple> out;
  out.reserve(keyed.size());
  for (auto& [_, t] : keyed) out.push_back(std::move(t));
  return out;
}

const std::vector<GraphStore::Id>& GraphStore::objects_of(Id predicate, Id subject) const {
  const auto it = byPredSubj_.find({predicate, subject});
  return it == byPredSubj_.end() ? kNoIds : it->second;
}

const std::vector<GraphStore::Id>& GraphStore::subjects_of(Id predicate, Id object) const {
  const auto it = byPredObj_.find({predicate, object});
  return it == byPredObj_.end() ? kNoIds : it->second;
}

std::vector<Term> GraphStore::objects(const Term& subject, const Term& predicate) const {
  std::vector<Term> out;
  const auto s = lookup(subject), p = lookup(predicate);
  if (!s || !p) return out;
  for (auto id : objects_of(*p, *s)) out.push_back(terms_[id]);
  return out;
}

std::vector<Term> GraphStore::subjects(const Term& predicate, const Term& object) const {
  std::vector<Term> out;
  const auto p = lookup(predicate), o = lookup(object);
  if (!p || !o) return out;
  for (auto id : subjects_of(*p, *o)) out.push_back(terms_[id]);
  return out;
}

std::vector<Triple> GraphStore::outgoing(const Term& subject) const {
  std::vector<Triple> out;
  const auto s = lookup(subject);
  if (!s) return out;
  const auto it = bySubject_.find(*s);
  if (it == bySubject_.end()) return out;
  for (const auto& t : it->second) out.push_back({terms_[t[0]], terms_[t[1]], terms_[t[2]]});
  return out;
}

std::vector<Triple> GraphStore::with_predicate(const Term& predicate) const {
  std::vector<Triple> out;
  const auto p = lookup(predicate);
  if (!p) return out;
  const auto it = byPredicate_.find(*p);
  if (it == byPredicate_.end()) return out;
  for (const auto& t : it->second) out.push_back({terms_[t[0]], terms_[t[1]], terms_[t[2]]});
  return out;
}

// ---------------------------------------------------------------------------
// Line-based triple files

std::string serialize_store(const GraphStore& store) {
  std::vector<std::string> lines;
  lines.reserve(store.size());
  for (const auto& t : store.triples()) lines.push_back(to_ntriples(t));
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

namespace {

class TripleLineParser {
 public:
  TripleLineParser(std::string_view line, std::size_t lineNo) : s_(line), line_(lineNo) {}

  Triple parse() {
    Triple t;
    t.subject = term();
    t.predicate = term();
    t.object = term();
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '.') fail("expected ' .' terminator");
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("trailing characters after '.'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw KgError(KgError::Kind::MalformedTriple, why, line_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string iri() {
    // At '<'.
    const auto end = s_.find('>', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated IRI");
    auto value = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
    if (value.empty() || value.find_first_of(" \t<\"") != std::string::npos) fail("invalid IRI");
    pos_ = end + 1;
    return value;
  }

  Term term() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing term");
    if (s_[pos_] == '<') return Term::iri(iri());
    if (s_[pos_] != '"') fail("unsupported term (only IRIs and literals are accepted)");
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated literal");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        value += c;
        continue;
      }
      if (pos_ >= s_.size()) fail("dangling escape");
      switch (s_[pos_++]) {
        case '\\': value += '\\'; break;
        case '"': value += '"'; break;
        case 'n': value += '\n'; break;
        case 'r': value += '\r'; break;
        case 't': value += '\t'; break;
        default: fail("unsupported escape");
      }
    }
    if (s_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected datatype IRI");
      const auto datatype = iri();
      if (datatype == kXsdString) return Term::string(std::move(value));
      if (datatype != kXsdInteger) fail("unsupported datatype <" + datatype + ">");
      std::int64_t n = 0;
      const auto* end = value.data() + value.size();
      const auto [ptr, ec] = std::from_chars(value.data(), end, n);
      if (value.empty() || ec != std::errc() || ptr != end) fail("malformed integer literal");
      return Term::integer(n);
    }
    if (pos_ < s_.size() && s_[pos_] == '@') fail("language-tagged literals are not supported");
    return Term::string(std::move(value));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

}  // namespace

GraphStore parse_store(std::string_view source) {
  GraphStore store;
  std::size_t lineNo = 0;
  for (auto raw : text::split(source, '\n')) {
    ++lineNo;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto triple = TripleLineParser(line, lineNo).parse();
    if (!triple.subject.is_iri() || !triple.predicate.is_iri()) {
      throw KgError(KgError::Kind::MalformedTriple, "literal outside object position", lineNo);
    }
    store.insert(triple);
  }
  return store;
}

GraphStore load_store(const std::filesystem::path& path) { return parse_store(read_file(path)); }

void save_store(const GraphStore& store, const std::filesystem::path& path) {
  write_file(path, serialize_store(store));
}

}  // namespace vrdkit::kg
