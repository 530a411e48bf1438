#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vrdkit/corpus.hpp"
#include "vrdkit/protocol.hpp"

namespace vrdkit::workflow {

enum class ListTarget { Classes, Predicates };

struct UpdateMasterLists {
  ListTarget target = ListTarget::Classes;
  std::vector<std::pair<std::string, std::string>> renames;
  std::vector<std::string> additions;
};

struct ApplyProtocolFile {
  std::filesystem::path path;
};

struct ChangeClassForImageSet {
  std::vector<std::string> images;
  std::string fromName;
  std::string toName;
};

struct MergeClass {
  std::string fromName;
  std::string toName;
};

struct MergePredicate {
  std::string fromName;
  std::string toName;
};

struct RemoveVRTypesGlobal {
  std::vector<NamedVRType> types;
};

struct RemoveEmptyImages {};

struct ChangeVRTypeGlobal {
  NamedVRType fromType;
  NamedVRType toType;
};

struct DedupVRs {};

using StepSpec = std::variant<UpdateMasterLists, ApplyProtocolFile, ChangeClassForImageSet,
                              MergeClass, MergePredicate, RemoveVRTypesGlobal, RemoveEmptyImages,
                              ChangeVRTypeGlobal, DedupVRs>;

/// Config-file spelling of a step kind, e.g. "merge_class".
std::string_view step_kind_name(const StepSpec& step);

struct WorkflowConfig {
  std::vector<StepSpec> steps;
  CorpusPaths input;
  CorpusPaths output;
  /// When set, retired names are dropped after the last step and the
  /// old-to-new id mapping is written here.
  std::optional<std::filesystem::path> compactMapping;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

/// A step failed; the run produced no output.
class StepFailedError : public Error {
 public:
  StepFailedError(std::size_t ordinal, std::string stepName, const Error& cause)
      : Error(cause.category(), "step " + std::to_string(ordinal) + " (" + stepName +
                                    ") failed: " + cause.what()),
        ordinal_(ordinal),
        stepName_(std::move(stepName)),
        causeMessage_(cause.what()) {}

  std::size_t ordinal() const noexcept { return ordinal_; }
  const std::string& step_name() const noexcept { return stepName_; }
  const std::string& cause_message() const noexcept { return causeMessage_; }

 private:
  std::size_t ordinal_;
  std::string stepName_;
  std::string causeMessage_;
};

/// Rejected change_vr_type rewrite.
class UnsupportedRewriteError : public Error {
 public:
  explicit UnsupportedRewriteError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class SelfMergeError : public Error {
 public:
  explicit SelfMergeError(const std::string& name)
      : Error(ErrorCategory::Data, "cannot merge '" + name + "' into itself") {}
};

/// Parses a JSON workflow config; relative paths resolve against `baseDir`.
WorkflowConfig parse_config(std::string_view text, const std::filesystem::path& baseDir);
WorkflowConfig load_config(const std::filesystem::path& path);
/// Checks structural validity (non-empty steps, distinct in/out paths).
void validate_config(const WorkflowConfig& config);

struct StepReport {
  std::size_t ordinal = 0;  // 1-based
  std::string name;
  protocol::ApplyReport counters;

  bool operator==(const StepReport&) const = default;
};

struct WorkflowReport {
  std::vector<StepReport> steps;
  std::chrono::nanoseconds elapsed{0};

  /// Elapsed time is excluded; reports compare by their counters.
  bool operator==(const WorkflowReport& o) const { return steps == o.steps; }
};

std::string format_report(const WorkflowReport& report);

struct WorkflowResult {
  AnnotationCorpus corpus;
  WorkflowReport report;
};

/// Runs every step in order on a copy of `corpus`. Protocol files are parsed
/// before the first step. Throws StepFailedError (or ConfigError) and leaves
/// the input untouched.
WorkflowResult run_workflow(const WorkflowConfig& config, const AnnotationCorpus& corpus);

/// Loads the configured input, runs, writes outputs (and compaction mapping).
WorkflowResult run_workflow_files(const WorkflowConfig& config);

// Individual transformations. Each returns a new corpus and fills `report`
// when given.

AnnotationCorpus update_master_lists(const AnnotationCorpus& corpus, const UpdateMasterLists& step);

AnnotationCorpus merge_object_class(const AnnotationCorpus& corpus, std::string_view fromName,
                                    std::string_view toName,
                                    protocol::ApplyReport* report = nullptr);
AnnotationCorpus merge_predicate(const AnnotationCorpus& corpus, std::string_view fromName,
                                 std::string_view toName, protocol::ApplyReport* report = nullptr);
AnnotationCorpus change_class_for_image_set(const AnnotationCorpus& corpus,
                                            const std::vector<std::string>& images,
                                            std::string_view fromName, std::string_view toName,
                                            protocol::ApplyReport* report = nullptr);
AnnotationCorpus remove_vr_types_global(const AnnotationCorpus& corpus,
                                        const std::vector<NamedVRType>& types,
                                        protocol::ApplyReport* report = nullptr);
AnnotationCorpus remove_empty_images(const AnnotationCorpus& corpus,
                                     protocol::ApplyReport* report = nullptr);
AnnotationCorpus change_vr_type_global(const AnnotationCorpus& corpus, const NamedVRType& fromType,
                                       const NamedVRType& toType,
                                       protocol::ApplyReport* report = nullptr);
AnnotationCorpus dedup_vrs(const AnnotationCorpus& corpus, protocol::ApplyReport* report = nullptr);

}  // namespace vrdkit::workflow
