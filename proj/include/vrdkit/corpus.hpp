#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vrdkit/error.hpp"

namespace vrdkit {

using ClassId = std::uint32_t;
using PredicateId = std::uint32_t;

/// Pixel box in native VRD order [ymin, ymax, xmin, xmax].
struct BoundingBox {
  std::int64_t ymin = 0;
  std::int64_t ymax = 0;
  std::int64_t xmin = 0;
  std::int64_t xmax = 0;

  /// ymin < ymax, xmin < xmax and no negative coordinate.
  bool well_formed() const noexcept {
    return ymin >= 0 && xmin >= 0 && ymin < ymax && xmin < xmax;
  }

  /// Area over half-open pixel intervals; zero for degenerate boxes.
  std::int64_t area() const noexcept {
    if (ymin >= ymax || xmin >= xmax) return 0;
    return (ymax - ymin) * (xmax - xmin);
  }

  std::string to_string() const;

  auto operator<=>(const BoundingBox&) const = default;
};

struct AnnotatedObject {
  ClassId classId = 0;
  BoundingBox bbox;

  auto operator<=>(const AnnotatedObject&) const = default;
};

struct VisualRelationship {
  AnnotatedObject subject;
  PredicateId predicateId = 0;
  AnnotatedObject object;

  auto operator<=>(const VisualRelationship&) const = default;
};

/// Class/predicate id triple with bounding boxes abstracted away.
struct VRType {
  ClassId subjClassId = 0;
  PredicateId predicateId = 0;
  ClassId objClassId = 0;

  static VRType of(const VisualRelationship& vr) noexcept {
    return {vr.subject.classId, vr.predicateId, vr.object.classId};
  }

  bool matches(const VisualRelationship& vr) const noexcept { return of(vr) == *this; }

  auto operator<=>(const VRType&) const = default;
};

/// A VR type spelled with names, as written in configs and scripts.
struct NamedVRType {
  std::string subject;
  std::string predicate;
  std::string object;

  auto operator<=>(const NamedVRType&) const = default;
};

/// Ordered list of unique names whose positions are ids.
///
/// Entries are never erased during a run. A merged-away name is retired
/// instead: it keeps its id but no longer resolves by name.
class MasterList {
 public:
  MasterList() = default;
  explicit MasterList(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t live_count() const noexcept;
  bool empty() const noexcept { return names_.empty(); }

  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool retired(std::size_t id) const { return retired_.at(id); }

  /// Id of a live name, if any.
  std::optional<std::uint32_t> find(std::string_view name) const;
  /// True if the name is present at all, live or retired.
  bool contains(std::string_view name) const;
  /// Id of a live name; throws UnknownNameError otherwise.
  std::uint32_t id_of(std::string_view name, const std::string& context = "") const;

  /// Appends a new live name; throws if the name already exists.
  std::uint32_t add(std::string name);
  /// Renames a live entry in place; throws on unknown or colliding names.
  void rename(std::string_view oldName, std::string newName);
  void retire(std::uint32_t id);

  bool operator==(const MasterList&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<bool> retired_;
};

using ImageMap = std::map<std::string, std::vector<VisualRelationship>>;

struct AnnotationCorpus {
  ImageMap images;
  MasterList objectClasses;
  MasterList predicates;

  std::size_t vr_count() const noexcept;

  std::string class_name(ClassId id) const { return objectClasses.name(id); }
  std::string predicate_name(PredicateId id) const { return predicates.name(id); }
  NamedVRType named_type(const VisualRelationship& vr) const;
  /// Resolves all three names against live master-list entries.
  VRType resolve(const NamedVRType& type, const std::string& context = "") const;

  bool operator==(const AnnotationCorpus&) const = default;
};

class CorpusError : public Error {
 public:
  enum class Kind { MalformedRecord, IdOutOfRange, DuplicateMasterName };

  CorpusError(Kind kind, const std::string& what)
      : Error(ErrorCategory::Data, what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct CorpusPaths {
  std::filesystem::path annotations;
  std::filesystem::path classes;
  std::filesystem::path predicates;
};

/// Parses an annotations document and two master lists held in memory.
/// `source` names the origin in error messages.
AnnotationCorpus parse_corpus(std::string_view annotationsText, std::string_view classesText,
                              std::string_view predicatesText,
                              const std::string& source = "annotations");

AnnotationCorpus load_corpus(const std::filesystem::path& annotationsPath,
                             const std::filesystem::path& classesPath,
                             const std::filesystem::path& predicatesPath);
inline AnnotationCorpus load_corpus(const CorpusPaths& paths) {
  return load_corpus(paths.annotations, paths.classes, paths.predicates);
}

/// Checks id ranges and master-list uniqueness; throws CorpusError.
void validate_corpus(const AnnotationCorpus& corpus);

/// Canonical text of the annotations map: sorted keys, one VR per line.
std::string serialize_annotations(const ImageMap& images);
std::string serialize_master_list(const MasterList& list);

void save_corpus(const AnnotationCorpus& corpus, const std::filesystem::path& outPath);
void save_corpus(const AnnotationCorpus& corpus, const CorpusPaths& paths);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

struct CorpusStats {
  std::size_t objectClassCount = 0;
  std::size_t predicateCount = 0;
  std::size_t vrCount = 0;
  std::size_t imageCount = 0;
  double meanVRsPerImage = 0.0;  // rounded half-up to 2 decimals
  std::size_t imagesWithExactDuplicateVRs = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats compute_stats(const AnnotationCorpus& corpus);

/// Rounds half-up to two decimals.
double round_half_up_2(double value) noexcept;

/// All index pairs (i, j), i < j, of value-identical VRs, lexicographically ordered.
std::vector<std::pair<std::size_t, std::size_t>> find_exact_duplicates(
    const std::vector<VisualRelationship>& vrs);

/// Old id to new id after dropping retired entries.
struct CompactMapping {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> classes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> predicates;
};

/// Drops retired master-list entries and renumbers ids densely.
std::pair<AnnotationCorpus, CompactMapping> compact_corpus(const AnnotationCorpus& corpus);
std::string serialize_mapping(const CompactMapping& mapping);

}  // namespace vrdkit
