#include "vrdkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vrdkit {

using nlohmann::json;

std::string BoundingBox::to_string() const {
  std::ostringstream os;
  os << '[' << ymin << ',' << ymax << ',' << xmin << ',' << xmax << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// MasterList

MasterList::MasterList(std::vector<std::string> names)
    : names_(std::move(names)), retired_(names_.size(), false) {}

std::size_t MasterList::live_count() const noexcept {
  return static_cast<std::size_t>(std::count(retired_.begin(), retired_.end(), false));
}

std::optional<std::uint32_t> MasterList::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!retired_[i] && names_[i] == name) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

bool MasterList::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::uint32_t MasterList::id_of(std::string_view name, const std::string& context) const {
  if (auto id = find(name)) return *id;
  throw UnknownNameError(std::string(name), context);
}

std::uint32_t MasterList::add(std::string name) {
  if (contains(name)) {
    throw CorpusError(CorpusError::Kind::DuplicateMasterName,
                      "duplicate master-list name '" + name + "'");
  }
  names_.push_back(std::move(name));
  retired_.push_back(false);
  return static_cast<std::uint32_t>(names_.size() - 1);
}

void MasterList::rename(std::string_view oldName, std::string newName) {
  const auto id = id_of(oldName, "rename");
  if (oldName == newName) return;
  if (contains(newName)) {
    throw CorpusError(CorpusError::Kind::DuplicateMasterName,
                      "rename target '" + newName + "' already exists");
  }
  names_[id] = std::move(newName);
}

void MasterList::retire(std::uint32_t id) { retired_.at(id) = true; }

// ---------------------------------------------------------------------------
// AnnotationCorpus

std::size_t AnnotationCorpus::vr_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, vrs] : images) n += vrs.size();
  return n;
}

NamedVRType AnnotationCorpus::named_type(const VisualRelationship& vr) const {
  return {class_name(vr.subject.classId), predicate_name(vr.predicateId),
          class_name(vr.object.classId)};
}

VRType AnnotationCorpus::resolve(const NamedVRType& type, const std::string& context) const {
  return {objectClasses.id_of(type.subject, context), predicates.id_of(type.predicate, context),
          objectClasses.id_of(type.object, context)};
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& why) {
  throw CorpusError(CorpusError::Kind::MalformedRecord, where + ": " + why);
}

json parse_json_unique_keys(std::string_view text, const std::string& source) {
  // nlohmann silently keeps the last of repeated keys; image filenames must be unique.
  std::vector<std::set<std::string>> seen;
  std::string duplicate;
  auto callback = [&](int depth, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        if (!seen.empty()) seen.pop_back();
        break;
      case json::parse_event_t::key:
        if (!seen.empty() && !seen.back().insert(parsed.get<std::string>()).second &&
            duplicate.empty()) {
          duplicate = parsed.get<std::string>();
        }
        break;
      default:
        break;
    }
    (void)depth;
    return true;
  };
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), callback);
  } catch (const json::parse_error& e) {
    malformed(source, e.what());
  }
  if (!duplicate.empty()) malformed(source, "duplicate key '" + duplicate + "'");
  return doc;
}

std::int64_t read_int(const json& value, const std::string& where) {
  if (!value.is_number_integer()) malformed(where, "expected an integer");
  if (value.is_number_unsigned()) {
    const auto u = value.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) malformed(where, "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  return value.get<std::int64_t>();
}

AnnotatedObject read_object(const json& node, const std::string& where) {
  if (!node.is_object()) malformed(where, "expected an object");
  const auto cat = node.find("category");
  const auto box = node.find("bbox");
  if (cat == node.end()) malformed(where, "missing 'category'");
  if (box == node.end()) malformed(where, "missing 'bbox'");
  if (node.size() != 2) malformed(where, "unexpected extra fields");
  const auto category = read_int(*cat, where + ".category");
  if (category < 0) malformed(where + ".category", "negative id");
  if (!box->is_array() || box->size() != 4) {
    malformed(where + ".bbox", "expected [ymin, ymax, xmin, xmax]");
  }
  AnnotatedObject obj;
  obj.classId = static_cast<ClassId>(std::min<std::int64_t>(category, UINT32_MAX));
  obj.bbox = {read_int((*box)[0], where + ".bbox[0]"), read_int((*box)[1], where + ".bbox[1]"),
              read_int((*box)[2], where + ".bbox[2]"), read_int((*box)[3], where + ".bbox[3]")};
  return obj;
}

MasterList parse_master_list(std::string_view text, const std::string& source) {
  const json doc = parse_json_unique_keys(text, source);
  if (!doc.is_array()) malformed(source, "expected an array of names");
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_string()) malformed(source + "[" + std::to_string(i) + "]", "expected a string");
    auto name = doc[i].get<std::string>();
    if (!seen.insert(name).second) {
      throw CorpusError(CorpusError::Kind::DuplicateMasterName,
                        source + ": duplicate master-list name '" + name + "'");
    }
    names.push_back(std::move(name));
  }
  return MasterList(std::move(names));
}

}  // namespace

AnnotationCorpus parse_corpus(std::string_view annotationsText, std::string_view classesText,
                              std::string_view predicatesText, const std::string& source) {
  AnnotationCorpus corpus;
  corpus.objectClasses = parse_master_list(classesText, "classes");
  corpus.predicates = parse_master_list(predicatesText, "predicates");

  const json doc = parse_json_unique_keys(annotationsText, source);
  if (!doc.is_object()) malformed(source, "expected an object keyed by image filename");
  for (const auto& [filename, list] : doc.items()) {
    const std::string where = source + ": image '" + filename + "'";
    if (!list.is_array()) malformed(where, "expected an array of VRs");
    std::vector<VisualRelationship> vrs;
    vrs.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& rec = list[i];
      const std::string at = where + " vr " + std::to_string(i);
      if (!rec.is_object()) malformed(at, "expected an object");
      for (const char* key : {"predicate", "subject", "object"}) {
        if (!rec.contains(key)) malformed(at, std::string("missing '") + key + "'");
      }
      if (rec.size() != 3) malformed(at, "unexpected extra fields");
      VisualRelationship vr;
      const auto pred = read_int(rec["predicate"], at + ".predicate");
      if (pred < 0) malformed(at + ".predicate", "negative id");
      vr.predicateId = static_cast<PredicateId>(std::min<std::int64_t>(pred, UINT32_MAX));
      vr.subject = read_object(rec["subject"], at + ".subject");
      vr.object = read_object(rec["object"], at + ".object");
      vrs.push_back(vr);
    }
    corpus.images.emplace(filename, std::move(vrs));
  }
  validate_corpus(corpus);
  return corpus;
}

void validate_corpus(const AnnotationCorpus& corpus) {
  const auto check_unique = [](const MasterList& list, const char* which) {
    std::set<std::string_view> seen;
    for (const auto& n : list.names()) {
      if (!seen.insert(n).second) {
        throw CorpusError(CorpusError::Kind::DuplicateMasterName,
                          std::string(which) + ": duplicate master-list name '" + n + "'");
      }
    }
  };
  check_unique(corpus.objectClasses, "classes");
  check_unique(corpus.predicates, "predicates");

  const auto nClasses = corpus.objectClasses.size();
  const auto nPreds = corpus.predicates.size();
  for (const auto& [image, vrs] : corpus.images) {
    for (std::size_t i = 0; i < vrs.size(); ++i) {
      const auto fail = [&](const char* field, std::uint64_t value, std::size_t bound) {
        throw CorpusError(CorpusError::Kind::IdOutOfRange,
                          "image '" + image + "' vr " + std::to_string(i) + " field " + field +
                              ": id " + std::to_string(value) + " out of range (list has " +
                              std::to_string(bound) + " entries)");
      };
      const auto& vr = vrs[i];
      if (vr.subject.classId >= nClasses) fail("subject.category", vr.subject.classId, nClasses);
      if (vr.predicateId >= nPreds) fail("predicate", vr.predicateId, nPreds);
      if (vr.object.classId >= nClasses) fail("object.category", vr.object.classId, nClasses);
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError(IoError::Kind::FileMissing, path.string(), "file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Kind::IoFailure, path.string(), "cannot open: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(IoError::Kind::IoFailure, path.string(), "cannot write: " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError(IoError::Kind::IoFailure, path.string(), "write failed: " + path.string());
  }
}

AnnotationCorpus load_corpus(const std::filesystem::path& annotationsPath,
                             const std::filesystem::path& classesPath,
                             const std::filesystem::path& predicatesPath) {
  const auto annotations = read_file(annotationsPath);
  const auto classes = read_file(classesPath);
  const auto predicates = read_file(predicatesPath);
  return parse_corpus(annotations, classes, predicates, annotationsPath.string());
}

// ---------------------------------------------------------------------------
// Canonical writer

namespace {

void write_object(std::string& out, const AnnotatedObject& obj) {
  out += "{\"category\": " + std::to_string(obj.classId) + ", \"bbox\": [" +
         std::to_string(obj.bbox.ymin) + ", " + std::to_string(obj.bbox.ymax) + ", " +
         std::to_string(obj.bbox.xmin) + ", " + std::to_string(obj.bbox.xmax) + "]}";
}

}  // namespace

std::string serialize_annotations(const ImageMap& images) {
  if (images.empty()) return "{}\n";
  std::string out = "{\n";
  std::size_t n = 0;
  for (const auto& [filename, vrs] : images) {
    out += "  " + json(filename).dump() + ": ";
    if (vrs.empty()) {
      out += "[]";
    } else {
      out += "[\n";
      for (std::size_t i = 0; i < vrs.size(); ++i) {
        out += "    {\"predicate\": " + std::to_string(vrs[i].predicateId) + ", \"object\": ";
        write_object(out, vrs[i].object);
        out += ", \"subject\": ";
        write_object(out, vrs[i].subject);
        out += i + 1 < vrs.size() ? "},\n" : "}\n";
      }
      out += "  ]";
    }
    out += ++n < images.size() ? ",\n" : "\n";
  }
  out += "}\n";
  return out;
}

std::string serialize_master_list(const MasterList& list) {
  if (list.empty()) return "[]\n";
  std::string out = "[\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    out += "  " + json(list.name(i)).dump();
    out += i + 1 < list.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

void save_corpus(const AnnotationCorpus& corpus, const std::filesystem::path& outPath) {
  write_file(outPath, serialize_annotations(corpus.images));
}

void save_corpus(const AnnotationCorpus& corpus, const CorpusPaths& paths) {
  write_file(paths.annotations, serialize_annotations(corpus.images));
  write_file(paths.classes, serialize_master_list(corpus.objectClasses));
  write_file(paths.predicates, serialize_master_list(corpus.predicates));
}

// ---------------------------------------------------------------------------
// Statistics

double round_half_up_2(double value) noexcept {
  // Nudge by a relative epsilon so binary representations like 2.675 round up.
  return std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0;
}

std::vector<std::pair<std::size_t, std::size_t>> find_exact_duplicates(
    const std::vector<VisualRelationship>& vrs) {
  // Group indices by value, then emit all pairs within each group.
  std::map<VisualRelationship, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < vrs.size(); ++i) groups[vrs[i]].push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [_, idx] : groups) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) pairs.emplace_back(idx[a], idx[b]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

CorpusStats compute_stats(const AnnotationCorpus& corpus) {
  CorpusStats s;
  s.objectClassCount = corpus.objectClasses.live_count();
  s.predicateCount = corpus.predicates.live_count();
  s.imageCount = corpus.images.size();
  for (const auto& [_, vrs] : corpus.images) {
    s.vrCount += vrs.size();
    std::set<VisualRelationship> unique(vrs.begin(), vrs.end());
    if (unique.size() != vrs.size()) ++s.imagesWithExactDuplicateVRs;
  }
  if (s.imageCount > 0) {
    s.meanVRsPerImage =
        round_half_up_2(static_cast<double>(s.vrCount) / static_cast<double>(s.imageCount));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Compaction

std::pair<AnnotationCorpus, CompactMapping> compact_corpus(const AnnotationCorpus& corpus) {
  CompactMapping mapping;
  const auto compact_list = [](const MasterList& list,
                               std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                               std::vector<std::optional<std::uint32_t>>& table) {
    std::vector<std::string> kept;
    table.assign(list.size(), std::nullopt);
    for (std::uint32_t id = 0; id < list.size(); ++id) {
      if (list.retired(id)) continue;
      table[id] = static_cast<std::uint32_t>(kept.size());
      pairs.emplace_back(id, *table[id]);
      kept.push_back(list.name(id));
    }
    return MasterList(std::move(kept));
  };

  std::vector<std::optional<std::uint32_t>> classTable;
  std::vector<std::optional<std::uint32_t>> predTable;
  AnnotationCorpus out;
  out.objectClasses = compact_list(corpus.objectClasses, mapping.classes, classTable);
  out.predicates = compact_list(corpus.predicates, mapping.predicates, predTable);

  const auto remap = [](const std::vector<std::optional<std::uint32_t>>& table, std::uint32_t id,
                        const std::string& image) {
    if (id >= table.size() || !table[id]) {
      throw CorpusError(CorpusError::Kind::IdOutOfRange,
                        "image '" + image + "' still references retired id " + std::to_string(id));
    }
    return *table[id];
  };
  for (const auto& [image, vrs] : corpus.images) {
    auto& dst = out.images[image];
    dst.reserve(vrs.size());
    for (auto vr : vrs) {
      vr.subject.classId = remap(classTable, vr.subject.classId, image);
      vr.object.classId = remap(classTable, vr.object.classId, image);
      vr.predicateId = remap(predTable, vr.predicateId, image);
      dst.push_back(vr);
    }
  }
  return {std::move(out), std::move(mapping)};
}

std::string serialize_mapping(const CompactMapping& mapping) {
  json doc = json::object();
  doc["classes"] = json::array();
  doc["predicates"] = json::array();
  for (const auto& [from, to] : mapping.classes) doc["classes"].push_back({from, to});
  for (const auto& [from, to] : mapping.predicates) doc["predicates"].push_back({from, to});
  return doc.dump(2) + "\n";
}

}  // namespace vrdkit
