#include "vrdkit/protocol.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <set>

#include "text.hpp"

namespace vrdkit::protocol {

namespace {

struct MnemonicEntry {
  std::string_view text;
  InstructionKind kind;
};

constexpr std::array<MnemonicEntry, 9> kMnemonics{{
    {"imname", InstructionKind::ImName},
    {"cvrsoc", InstructionKind::CvrSoc},
    {"cvrsbb", InstructionKind::CvrSbb},
    {"cvrooc", InstructionKind::CvrOoc},
    {"cvrobb", InstructionKind::CvrObb},
    {"cvrpxx", InstructionKind::CvrPxx},
    {"rvrxxx", InstructionKind::RvrXxx},
    {"avrxxx", InstructionKind::AvrXxx},
    {"rimxxx", InstructionKind::RimXxx},
}};

std::optional<InstructionKind> lookup_mnemonic(std::string_view text) {
  for (const auto& m : kMnemonics) {
    if (m.text == text) return m.kind;
  }
  return std::nullopt;
}

bool is_change(InstructionKind k) {
  return k == InstructionKind::CvrSoc || k == InstructionKind::CvrSbb ||
         k == InstructionKind::CvrOoc || k == InstructionKind::CvrObb ||
         k == InstructionKind::CvrPxx;
}

// Quote marks accepted around names: ASCII ' " ` and typographic single/double quotes.
constexpr std::array<std::string_view, 7> kQuotes{"'", "\"", "`", "\xE2\x80\x98", "\xE2\x80\x99",
                                                  "\xE2\x80\x9C", "\xE2\x80\x9D"};

std::string unquote(std::string_view s) {
  s = text::trim(s);
  for (auto q : kQuotes) {
    if (s.starts_with(q)) {
      s.remove_prefix(q.size());
      break;
    }
  }
  for (auto q : kQuotes) {
    if (s.ends_with(q)) {
      s.remove_suffix(q.size());
      break;
    }
  }
  return std::string(text::trim(s));
}

class LineParser {
 public:
  explicit LineParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, reason); }

  std::string name(std::string_view field, const char* what) const {
    auto n = unquote(field);
    if (n.empty()) fail(std::string("empty ") + what);
    return n;
  }

  std::size_t index(std::string_view field) const {
    field = text::trim(field);
    std::size_t value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end) {
      fail("malformed VR index '" + std::string(field) + "'");
    }
    return value;
  }

  NamedVRType tuple(std::string_view field) const {
    field = text::trim(field);
    if (field.size() < 2 || field.front() != '(' || field.back() != ')') {
      fail("malformed tuple literal '" + std::string(field) + "'");
    }
    const auto parts = text::split(field.substr(1, field.size() - 2), ',');
    if (parts.size() != 3) fail("tuple literal must have 3 names");
    return {name(parts[0], "subject name"), name(parts[1], "predicate name"),
            name(parts[2], "object name")};
  }

  BoundingBox bbox(std::string_view field) const {
    field = text::trim(field);
    if (field.size() < 2 || field.front() != '[' || field.back() != ']') {
      fail("malformed bbox literal '" + std::string(field) + "'");
    }
    const auto parts = text::split(field.substr(1, field.size() - 2), ',');
    if (parts.size() != 4) fail("bbox literal must have 4 coordinates");
    std::array<std::int64_t, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto p = text::trim(parts[i]);
      const auto* end = p.data() + p.size();
      const auto [ptr, ec] = std::from_chars(p.data(), end, v[i]);
      if (p.empty() || ec != std::errc() || ptr != end || v[i] < 0) {
        fail("malformed bbox coordinate '" + std::string(p) + "'");
      }
    }
    return {v[0], v[1], v[2], v[3]};
  }

 private:
  std::size_t line_;
};

}  // namespace

std::string_view mnemonic(InstructionKind kind) noexcept {
  for (const auto& m : kMnemonics) {
    if (m.kind == kind) return m.text;
  }
  return "?";
}

std::vector<InstructionKind> block_kinds(const ImageBlock& block) {
  if (block.removeImage) return {InstructionKind::RimXxx};
  std::vector<InstructionKind> kinds;
  for (const auto& ins : block.instructions) kinds.push_back(ins.kind);
  return kinds;
}

std::string format_tuple(const NamedVRType& t) {
  return "(" + t.subject + ", " + t.predicate + ", " + t.object + ")";
}

// ---------------------------------------------------------------------------
// Parsing

std::vector<ImageBlock> parse_script(std::string_view source) {
  std::vector<ImageBlock> blocks;
  std::size_t lineNo = 0;
  for (auto raw : text::split(source, '\n')) {
    ++lineNo;
    if (raw.ends_with('\r')) raw.remove_suffix(1);
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    LineParser p(lineNo);
    auto fields = text::split(line, ';');
    for (auto& f : fields) f = text::trim(f);
    if (fields.size() > 1 && fields.back().empty()) fields.pop_back();
    for (const auto& f : fields) {
      if (f.empty()) p.fail("empty field");
    }

    const auto kind = lookup_mnemonic(fields[0]);
    if (!kind) p.fail("unknown mnemonic '" + std::string(fields[0]) + "'");

    if (*kind == InstructionKind::ImName) {
      if (fields.size() < 2 || fields.size() > 3) p.fail("imname takes a filename and optional rimxxx");
      ImageBlock block;
      block.filename = std::string(fields[1]);
      block.sourceLine = lineNo;
      if (fields.size() == 3) {
        if (fields[2] != "rimxxx") p.fail("unexpected field '" + std::string(fields[2]) + "' after filename");
        block.removeImage = true;
      }
      blocks.push_back(std::move(block));
      continue;
    }
    if (*kind == InstructionKind::RimXxx) p.fail("rimxxx must follow the filename on an imname line");
    if (blocks.empty()) p.fail("instruction before any imname line");
    if (blocks.back().removeImage) p.fail("instruction in a block marked rimxxx");

    Instruction ins;
    ins.kind = *kind;
    ins.sourceLine = lineNo;
    const auto mn = std::string(fields[0]);
    if (is_change(*kind)) {
      if (fields.size() != 4) p.fail(mn + " expects 4 fields, got " + std::to_string(fields.size()));
      ins.vrIndex = p.index(fields[1]);
      ins.refTuple = p.tuple(fields[2]);
      switch (*kind) {
        case InstructionKind::CvrSbb:
        case InstructionKind::CvrObb:
          ins.payload = p.bbox(fields[3]);
          break;
        case InstructionKind::CvrPxx:
          ins.payload = p.name(fields[3], "predicate name");
          break;
        default:
          ins.payload = p.name(fields[3], "class name");
          break;
      }
    } else if (*kind == InstructionKind::RvrXxx) {
      if (fields.size() != 3) p.fail(mn + " expects 3 fields, got " + std::to_string(fields.size()));
      ins.vrIndex = p.index(fields[1]);
      ins.refTuple = p.tuple(fields[2]);
    } else {
      if (fields.size() != 6) p.fail(mn + " expects 6 fields, got " + std::to_string(fields.size()));
      ins.payload = VRSpec{p.name(fields[1], "subject class"), p.bbox(fields[2]),
                           p.name(fields[3], "predicate"), p.name(fields[4], "object class"),
                           p.bbox(fields[5])};
    }
    blocks.back().instructions.push_back(std::move(ins));
  }
  return blocks;
}

std::vector<ImageBlock> load_script(const std::filesystem::path& path) {
  return parse_script(read_file(path));
}

std::string render_script(const std::vector<ImageBlock>& blocks) {
  std::string out;
  const auto tuple = [](const NamedVRType& t) {
    return "('" + t.subject + "', '" + t.predicate + "', '" + t.object + "')";
  };
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    if (b > 0) out += '\n';
    out += "imname; " + block.filename;
    if (block.removeImage) out += "; rimxxx";
    out += '\n';
    for (const auto& ins : block.instructions) {
      out += std::string(mnemonic(ins.kind)) + "; ";
      if (ins.kind == InstructionKind::AvrXxx) {
        const auto& spec = std::get<VRSpec>(ins.payload);
        out += spec.subjectClass + "; " + spec.subjectBox.to_string() + "; " + spec.predicate +
               "; " + spec.objectClass + "; " + spec.objectBox.to_string();
      } else {
        out += std::to_string(ins.vrIndex.value_or(0)) + "; " +
               tuple(ins.refTuple.value_or(NamedVRType{})) + ";";
        if (const auto* name = std::get_if<std::string>(&ins.payload)) out += " " + *name;
        if (const auto* box = std::get_if<BoundingBox>(&ins.payload)) out += " " + box->to_string();
      }
      out += '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution

ApplyReport& ApplyReport::operator+=(const ApplyReport& o) noexcept {
  imagesTouched += o.imagesTouched;
  vrsChanged += o.vrsChanged;
  vrsRemoved += o.vrsRemoved;
  vrsAdded += o.vrsAdded;
  imagesRemoved += o.imagesRemoved;
  return *this;
}

std::string_view to_string(AbortCause cause) noexcept {
  switch (cause) {
    case AbortCause::ImageNotFound: return "ImageNotFound";
    case AbortCause::IndexOutOfRange: return "IndexOutOfRange";
    case AbortCause::TupleMismatch: return "TupleMismatch";
    case AbortCause::UnknownName: return "UnknownName";
  }
  return "?";
}

AbortError::AbortError(std::size_t line, AbortCause cause, std::string detail,
                       std::optional<NamedVRType> expected, std::optional<NamedVRType> found)
    : Error(ErrorCategory::Data, "aborted at line " + std::to_string(line) + ": " +
                                     std::string(to_string(cause)) + ": " + detail),
      line_(line),
      cause_(cause),
      detail_(std::move(detail)),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

// Per-image provenance: each slot is either an original index or a new VR.
struct Provenance {
  std::vector<VisualRelationship> original;
  std::vector<std::optional<std::size_t>> slots;
};

}  // namespace

ApplyResult validate_and_apply(const AnnotationCorpus& input, const std::vector<ImageBlock>& blocks) {
  ApplyResult result{input, {}};
  auto& corpus = result.corpus;
  std::map<std::string, Provenance> provenance;
  std::set<std::string> touched;
  std::set<std::string> removed;

  const auto class_id = [&](const std::string& name, std::size_t line) {
    if (auto id = corpus.objectClasses.find(name)) return *id;
    throw AbortError(line, AbortCause::UnknownName, "object class '" + name + "'");
  };
  const auto predicate_id = [&](const std::string& name, std::size_t line) {
    if (auto id = corpus.predicates.find(name)) return *id;
    throw AbortError(line, AbortCause::UnknownName, "predicate '" + name + "'");
  };

  for (const auto& block : blocks) {
    auto it = corpus.images.find(block.filename);
    if (it == corpus.images.end()) {
      throw AbortError(block.sourceLine, AbortCause::ImageNotFound, block.filename);
    }
    touched.insert(block.filename);
    auto [provIt, fresh] = provenance.try_emplace(block.filename);
    auto& prov = provIt->second;
    if (fresh) {
      prov.original = it->second;
      for (std::size_t i = 0; i < it->second.size(); ++i) prov.slots.emplace_back(i);
    }

    if (block.removeImage) {
      corpus.images.erase(it);
      removed.insert(block.filename);
      continue;
    }

    auto& vrs = it->second;
    for (const auto& ins : block.instructions) {
      const auto line = ins.sourceLine;
      if (ins.kind == InstructionKind::AvrXxx) {
        const auto& spec = std::get<VRSpec>(ins.payload);
        VisualRelationship vr;
        vr.subject = {class_id(spec.subjectClass, line), spec.subjectBox};
        vr.predicateId = predicate_id(spec.predicate, line);
        vr.object = {class_id(spec.objectClass, line), spec.objectBox};
        vrs.push_back(vr);
        prov.slots.emplace_back(std::nullopt);
        continue;
      }

      const auto idx = ins.vrIndex.value_or(0);
      if (idx >= vrs.size()) {
        throw AbortError(line, AbortCause::IndexOutOfRange,
                         "index " + std::to_string(idx) + " but image '" + block.filename +
                             "' has " + std::to_string(vrs.size()) + " VRs");
      }
      const auto found = corpus.named_type(vrs[idx]);
      const auto& expected = *ins.refTuple;
      if (found != expected) {
        throw AbortError(line, AbortCause::TupleMismatch,
                         "expected " + format_tuple(expected) + ", found " + format_tuple(found),
                         expected, found);
      }

      auto& vr = vrs[idx];
      switch (ins.kind) {
        case InstructionKind::CvrSoc:
          vr.subject.classId = class_id(std::get<std::string>(ins.payload), line);
          break;
        case InstructionKind::CvrOoc:
          vr.object.classId = class_id(std::get<std::string>(ins.payload), line);
          break;
        case InstructionKind::CvrSbb:
          vr.subject.bbox = std::get<BoundingBox>(ins.payload);
          break;
        case InstructionKind::CvrObb:
          vr.object.bbox = std::get<BoundingBox>(ins.payload);
          break;
        case InstructionKind::CvrPxx:
          vr.predicateId = predicate_id(std::get<std::string>(ins.payload), line);
          break;
        case InstructionKind::RvrXxx:
          vrs.erase(vrs.begin() + static_cast<std::ptrdiff_t>(idx));
          prov.slots.erase(prov.slots.begin() + static_cast<std::ptrdiff_t>(idx));
          break;
        default:
          break;
      }
    }
  }

  auto& report = result.report;
  report.imagesTouched = touched.size();
  report.imagesRemoved = removed.size();
  for (const auto& [image, prov] : provenance) {
    if (removed.count(image)) continue;
    const auto& now = corpus.images.at(image);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < prov.slots.size(); ++i) {
      if (!prov.slots[i]) {
        ++report.vrsAdded;
        continue;
      }
      ++kept;
      if (now[i] != prov.original[*prov.slots[i]]) ++report.vrsChanged;
    }
    report.vrsRemoved += prov.original.size() - kept;
  }
  return result;
}

}  // namespace vrdkit::protocol
