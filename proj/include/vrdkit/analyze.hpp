#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vrdkit/corpus.hpp"

namespace vrdkit::analyze {

/// (s, p, o) pattern where any position may be a wildcard (std::nullopt).
struct VRPattern {
  std::optional<std::string> subject;
  std::optional<std::string> predicate;
  std::optional<std::string> object;

  /// Parses a name, treating "*" as the wildcard.
  static std::optional<std::string> position(std::string_view text);
};

struct QueryResult {
  std::vector<std::string> images;
  /// Distinct names seen at each wildcard position across matches, sorted.
  /// Empty for concrete positions.
  std::vector<std::string> subjectBindings;
  std::vector<std::string> predicateBindings;
  std::vector<std::string> objectBindings;
};

/// Images having at least one VR matching the pattern. Throws UnknownNameError.
QueryResult query_images(const AnnotationCorpus& corpus, const VRPattern& pattern);

/// Inclusive VR-count range; `max` unset means unbounded.
struct CountRange {
  std::size_t min = 0;
  std::optional<std::size_t> max;

  static CountRange exactly(std::size_t n) { return {n, n}; }
  static CountRange at_least(std::size_t n) { return {n, std::nullopt}; }
};

std::vector<std::string> images_with_vr_count(const AnnotationCorpus& corpus, CountRange target);

enum class Metric { VrsPerImage, DistinctClassesPerImage, DistinctPredicatesPerImage };

std::string_view metric_name(Metric metric) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;

struct Histogram {
  std::string metric;
  std::vector<std::pair<std::size_t, std::size_t>> buckets;  // (value, image count), ascending

  std::size_t population() const noexcept;
  bool operator==(const Histogram&) const = default;
};

Histogram distribution(const AnnotationCorpus& corpus, Metric metric);

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

/// Intersection over union on half-open pixel intervals.
/// Throws DegenerateInputError unless both boxes are well formed.
double iou(const BoundingBox& a, const BoundingBox& b);

enum class LintRule { ExactDuplicateVR, NearDuplicateBbox, DegenerateBbox, MultiClassBbox, EmptyImageEntry };
enum class Severity { Warning, Error };

std::string_view to_string(LintRule rule) noexcept;
std::string_view to_string(Severity severity) noexcept;

struct LintFinding {
  LintRule rule = LintRule::EmptyImageEntry;
  std::string image;
  std::string detail;
  Severity severity = Severity::Warning;

  bool operator==(const LintFinding&) const = default;
};

inline constexpr double kDefaultNearDuplicateIou = 0.9;

/// Quality checks, ordered by (image, rule, detail). Threshold must lie in (0, 1].
std::vector<LintFinding> lint(const AnnotationCorpus& corpus,
                              double nearDupIouThreshold = kDefaultNearDuplicateIou);

/// Emits an SVG with one labeled rectangle per distinct (class, box) object
/// of the selected VRs (all when `selection` is empty). The raster image is
/// referenced by relative path, never decoded.
std::string render_overlay(const AnnotationCorpus& corpus, const std::string& filename,
                           const std::vector<std::size_t>& selection = {});
void render_overlay(const AnnotationCorpus& corpus, const std::string& filename,
                    const std::vector<std::size_t>& selection, const std::filesystem::path& outPath);

/// Per-image difference between two corpora sharing master lists by name.
struct ImageDiff {
  enum class Status { Added, Removed, Modified };

  std::string image;
  Status status = Status::Modified;
  std::size_t added = 0;
  std::size_t removed = 0;
  std::size_t changed = 0;
};

/// Images absent on one side are Added/Removed; images present on both are
/// reported only when their VR lists differ. VRs compare by names and boxes.
std::vector<ImageDiff> diff_corpora(const AnnotationCorpus& before, const AnnotationCorpus& after);

}  // namespace vrdkit::analyze
