#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vrdkit/corpus.hpp"
#include "vrdkit/error.hpp"

namespace vrdkit::protocol {

/// Mnemonics: cvr = change VR, rvr = remove VR, avr = add VR, rim = remove image;
/// soc/ooc = subject/object class, sbb/obb = subject/object bbox, pxx = predicate.
enum class InstructionKind { ImName, CvrSoc, CvrSbb, CvrOoc, CvrObb, CvrPxx, RvrXxx, AvrXxx, RimXxx };

std::string_view mnemonic(InstructionKind kind) noexcept;

/// Full VR spelled with names, as carried by `avrxxx`.
struct VRSpec {
  std::string subjectClass;
  BoundingBox subjectBox;
  std::string predicate;
  std::string objectClass;
  BoundingBox objectBox;

  bool operator==(const VRSpec&) const = default;
};

using Payload = std::variant<std::monostate, std::string, BoundingBox, VRSpec>;

struct Instruction {
  InstructionKind kind = InstructionKind::CvrSoc;
  std::optional<std::size_t> vrIndex;
  std::optional<NamedVRType> refTuple;
  Payload payload;
  std::size_t sourceLine = 0;

  bool operator==(const Instruction&) const = default;
};

struct ImageBlock {
  std::string filename;
  bool removeImage = false;
  std::vector<Instruction> instructions;
  std::size_t sourceLine = 0;

  bool operator==(const ImageBlock&) const = default;
};

/// Instruction kinds of a block; a removal block reports a single RimXxx.
std::vector<InstructionKind> block_kinds(const ImageBlock& block);

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason)
      : Error(ErrorCategory::Data, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(std::move(reason)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Parses a customization script. Total over arbitrary bytes: either blocks
/// or a ParseError carrying a 1-based line number.
std::vector<ImageBlock> parse_script(std::string_view text);
std::vector<ImageBlock> load_script(const std::filesystem::path& path);

/// Canonical rendering; parse_script(render_script(b)) == b up to source lines.
std::string render_script(const std::vector<ImageBlock>& blocks);

struct ApplyReport {
  std::size_t imagesTouched = 0;
  std::size_t vrsChanged = 0;
  std::size_t vrsRemoved = 0;
  std::size_t vrsAdded = 0;
  std::size_t imagesRemoved = 0;

  ApplyReport& operator+=(const ApplyReport& other) noexcept;
  bool operator==(const ApplyReport&) const = default;
};

enum class AbortCause { ImageNotFound, IndexOutOfRange, TupleMismatch, UnknownName };

std::string_view to_string(AbortCause cause) noexcept;

/// Execution stopped at a script line; nothing was written.
class AbortError : public Error {
 public:
  AbortError(std::size_t line, AbortCause cause, std::string detail,
             std::optional<NamedVRType> expected = std::nullopt,
             std::optional<NamedVRType> found = std::nullopt);

  std::size_t line() const noexcept { return line_; }
  AbortCause cause() const noexcept { return cause_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::optional<NamedVRType>& expected() const noexcept { return expected_; }
  const std::optional<NamedVRType>& found() const noexcept { return found_; }

 private:
  std::size_t line_;
  AbortCause cause_;
  std::string detail_;
  std::optional<NamedVRType> expected_;
  std::optional<NamedVRType> found_;
};

struct ApplyResult {
  AnnotationCorpus corpus;
  ApplyReport report;
};

/// Validates and executes blocks in order against a copy of `corpus`.
/// Instructions see the list as mutated by earlier instructions. On the
/// first failed check throws AbortError; the input is never modified.
ApplyResult validate_and_apply(const AnnotationCorpus& corpus,
                               const std::vector<ImageBlock>& blocks);

std::string format_tuple(const NamedVRType& t);

}  // namespace vrdkit::protocol
