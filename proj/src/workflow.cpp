#include "vrdkit/workflow.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vrdkit::workflow {

using nlohmann::json;
using protocol::ApplyReport;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void bump(ApplyReport* report, ApplyReport delta) {
  if (report) *report += delta;
}

AnnotationCorpus merge_ids(const AnnotationCorpus& input, std::string_view fromName,
                           std::string_view toName, bool classes, ApplyReport* report) {
  if (fromName == toName) throw SelfMergeError(std::string(fromName));
  auto corpus = input;
  auto& list = classes ? corpus.objectClasses : corpus.predicates;
  const auto from = list.id_of(fromName, "merge");
  const auto to = list.id_of(toName, "merge");
  ApplyReport delta;
  for (auto& [_, vrs] : corpus.images) {
    bool touched = false;
    for (auto& vr : vrs) {
      bool changed = false;
      if (classes) {
        if (vr.subject.classId == from) vr.subject.classId = to, changed = true;
        if (vr.object.classId == from) vr.object.classId = to, changed = true;
      } else if (vr.predicateId == from) {
        vr.predicateId = to;
        changed = true;
      }
      if (changed) ++delta.vrsChanged, touched = true;
    }
    if (touched) ++delta.imagesTouched;
  }
  list.retire(from);
  bump(report, delta);
  return corpus;
}

}  // namespace

std::string_view step_kind_name(const StepSpec& step) {
  return std::visit(
      overloaded{
          [](const UpdateMasterLists&) { return std::string_view("update_master_lists"); },
          [](const ApplyProtocolFile&) { return std::string_view("apply_protocol"); },
          [](const ChangeClassForImageSet&) { return std::string_view("change_class_for_images"); },
          [](const MergeClass&) { return std::string_view("merge_class"); },
          [](const MergePredicate&) { return std::string_view("merge_predicate"); },
          [](const RemoveVRTypesGlobal&) { return std::string_view("remove_vr_types"); },
          [](const RemoveEmptyImages&) { return std::string_view("remove_empty_images"); },
          [](const ChangeVRTypeGlobal&) { return std::string_view("change_vr_type"); },
          [](const DedupVRs&) { return std::string_view("dedup_vrs"); },
      },
      step);
}

// ---------------------------------------------------------------------------
// Transformations

AnnotationCorpus update_master_lists(const AnnotationCorpus& input, const UpdateMasterLists& step) {
  auto corpus = input;
  auto& list = step.target == ListTarget::Classes ? corpus.objectClasses : corpus.predicates;
  for (const auto& [oldName, newName] : step.renames) list.rename(oldName, newName);
  for (const auto& name : step.additions) list.add(name);
  return corpus;
}

AnnotationCorpus merge_object_class(const AnnotationCorpus& corpus, std::string_view fromName,
                                    std::string_view toName, ApplyReport* report) {
  return merge_ids(corpus, fromName, toName, true, report);
}

AnnotationCorpus merge_predicate(const AnnotationCorpus& corpus, std::string_view fromName,
                                 std::string_view toName, ApplyReport* report) {
  return merge_ids(corpus, fromName, toName, false, report);
}

AnnotationCorpus change_class_for_image_set(const AnnotationCorpus& input,
                                            const std::vector<std::string>& images,
                                            std::string_view fromName, std::string_view toName,
                                            ApplyReport* report) {
  auto corpus = input;
  const auto from = corpus.objectClasses.id_of(fromName, "change_class_for_images");
  const auto to = corpus.objectClasses.id_of(toName, "change_class_for_images");
  for (const auto& image : images) {
    if (!corpus.images.count(image)) throw ImageNotFoundError(image);
  }
  ApplyReport delta;
  const std::set<std::string> unique(images.begin(), images.end());
  delta.imagesTouched = unique.size();
  for (const auto& image : unique) {
    for (auto& vr : corpus.images.at(image)) {
      bool changed = false;
      if (vr.subject.classId == from) vr.subject.classId = to, changed = true;
      if (vr.object.classId == from) vr.object.classId = to, changed = true;
      if (changed && from != to) ++delta.vrsChanged;
    }
  }
  bump(report, delta);
  return corpus;
}

AnnotationCorpus remove_vr_types_global(const AnnotationCorpus& input,
                                        const std::vector<NamedVRType>& types,
                                        ApplyReport* report) {
  auto corpus = input;
  std::set<VRType> doomed;
  for (const auto& t : types) doomed.insert(corpus.resolve(t, "remove_vr_types"));
  ApplyReport delta;
  for (auto& [_, vrs] : corpus.images) {
    const auto before = vrs.size();
    std::erase_if(vrs, [&](const VisualRelationship& vr) { return doomed.count(VRType::of(vr)) > 0; });
    if (vrs.size() != before) {
      ++delta.imagesTouched;
      delta.vrsRemoved += before - vrs.size();
    }
  }
  bump(report, delta);
  return corpus;
}

AnnotationCorpus remove_empty_images(const AnnotationCorpus& input, ApplyReport* report) {
  auto corpus = input;
  const auto removed = std::erase_if(corpus.images, [](const auto& kv) { return kv.second.empty(); });
  ApplyReport delta;
  delta.imagesRemoved = removed;
  delta.imagesTouched = removed;
  bump(report, delta);
  return corpus;
}

AnnotationCorpus change_vr_type_global(const AnnotationCorpus& input, const NamedVRType& fromType,
                                       const NamedVRType& toType, ApplyReport* report) {
  auto corpus = input;
  const auto from = corpus.resolve(fromType, "change_vr_type");
  const auto to = corpus.resolve(toType, "change_vr_type");
  // Boxes stay with their roles, so a rewrite that exchanges the subject and
  // object classes would need the boxes swapped too.
  if (from.subjClassId != from.objClassId && to.subjClassId == from.objClassId &&
      to.objClassId == from.subjClassId) {
    throw UnsupportedRewriteError("change_vr_type " + protocol::format_tuple(fromType) + " -> " +
                                  protocol::format_tuple(toType) +
                                  " requires swapping subject and object");
  }
  ApplyReport delta;
  for (auto& [_, vrs] : corpus.images) {
    bool touched = false;
    for (auto& vr : vrs) {
      if (!from.matches(vr)) continue;
      vr.subject.classId = to.subjClassId;
      vr.predicateId = to.predicateId;
      vr.object.classId = to.objClassId;
      if (from != to) ++delta.vrsChanged, touched = true;
    }
    if (touched) ++delta.imagesTouched;
  }
  bump(report, delta);
  return corpus;
}

AnnotationCorpus dedup_vrs(const AnnotationCorpus& input, ApplyReport* report) {
  auto corpus = input;
  ApplyReport delta;
  for (auto& [_, vrs] : corpus.images) {
    std::set<VisualRelationship> seen;
    const auto before = vrs.size();
    std::erase_if(vrs, [&](const VisualRelationship& vr) { return !seen.insert(vr).second; });
    if (vrs.size() != before) {
      ++delta.imagesTouched;
      delta.vrsRemoved += before - vrs.size();
    }
  }
  bump(report, delta);
  return corpus;
}

// ---------------------------------------------------------------------------
// Config

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& why) {
  throw ConfigError("workflow config " + where + ": " + why);
}

std::string get_string(const json& node, const char* key, const std::string& where) {
  const auto it = node.find(key);
  if (it == node.end()) config_fail(where, std::string("missing '") + key + "'");
  if (!it->is_string()) config_fail(where, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> get_strings(const json& node, const char* key, const std::string& where,
                                     bool required = true) {
  const auto it = node.find(key);
  if (it == node.end()) {
    if (required) config_fail(where, std::string("missing '") + key + "'");
    return {};
  }
  if (!it->is_array()) config_fail(where, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) config_fail(where, std::string("'") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

NamedVRType to_type(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 3 ||
      !std::all_of(node.begin(), node.end(), [](const json& v) { return v.is_string(); })) {
    config_fail(where, "a VR type is an array of 3 names [subject, predicate, object]");
  }
  return {node[0].get<std::string>(), node[1].get<std::string>(), node[2].get<std::string>()};
}

NamedVRType get_type(const json& node, const char* key, const std::string& where) {
  const auto it = node.find(key);
  if (it == node.end()) config_fail(where, std::string("missing '") + key + "'");
  return to_type(*it, where + "." + key);
}

void check_keys(const json& node, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, _] : node.items()) {
    if (key == "kind") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_fail(where, "unexpected key '" + key + "'");
    }
  }
}

StepSpec parse_step(const json& node, const std::string& where, const std::filesystem::path& baseDir) {
  if (!node.is_object()) config_fail(where, "each step must be an object");
  const auto kind = get_string(node, "kind", where);
  if (kind == "update_master_lists") {
    check_keys(node, {"target", "renames", "additions"}, where);
    UpdateMasterLists step;
    const auto target = get_string(node, "target", where);
    if (target == "classes") {
      step.target = ListTarget::Classes;
    } else if (target == "predicates") {
      step.target = ListTarget::Predicates;
    } else {
      config_fail(where, "target must be 'classes' or 'predicates'");
    }
    if (const auto it = node.find("renames"); it != node.end()) {
      if (!it->is_array()) config_fail(where, "'renames' must be an array of [old, new] pairs");
      for (const auto& pair : *it) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          config_fail(where, "'renames' must be an array of [old, new] pairs");
        }
        step.renames.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
    step.additions = get_strings(node, "additions", where, false);
    return step;
  }
  if (kind == "apply_protocol") {
    check_keys(node, {"path"}, where);
    return ApplyProtocolFile{baseDir / get_string(node, "path", where)};
  }
  if (kind == "change_class_for_images") {
    check_keys(node, {"images", "from", "to"}, where);
    return ChangeClassForImageSet{get_strings(node, "images", where), get_string(node, "from", where),
                                  get_string(node, "to", where)};
  }
  if (kind == "merge_class") {
    check_keys(node, {"from", "to"}, where);
    return MergeClass{get_string(node, "from", where), get_string(node, "to", where)};
  }
  if (kind == "merge_predicate") {
    check_keys(node, {"from", "to"}, where);
    return MergePredicate{get_string(node, "from", where), get_string(node, "to", where)};
  }
  if (kind == "remove_vr_types") {
    check_keys(node, {"types"}, where);
    const auto it = node.find("types");
    if (it == node.end() || !it->is_array()) config_fail(where, "'types' must be an array");
    RemoveVRTypesGlobal step;
    for (std::size_t i = 0; i < it->size(); ++i) {
      step.types.push_back(to_type((*it)[i], where + ".types[" + std::to_string(i) + "]"));
    }
    return step;
  }
  if (kind == "remove_empty_images") {
    check_keys(node, {}, where);
    return RemoveEmptyImages{};
  }
  if (kind == "change_vr_type") {
    check_keys(node, {"from", "to"}, where);
    return ChangeVRTypeGlobal{get_type(node, "from", where), get_type(node, "to", where)};
  }
  if (kind == "dedup_vrs") {
    check_keys(node, {}, where);
    return DedupVRs{};
  }
  config_fail(where, "unknown step kind '" + kind + "'");
}

}  // namespace

WorkflowConfig parse_config(std::string_view text, const std::filesystem::path& baseDir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    config_fail("", e.what());
  }
  if (!doc.is_object()) config_fail("", "top level must be an object");
  static constexpr std::string_view kKeys[] = {
      "input_annotations",  "input_classes",      "input_predicates", "output_annotations",
      "output_classes",     "output_predicates",  "steps",            "compact_mapping"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      config_fail("", "unexpected key '" + key + "'");
    }
  }

  WorkflowConfig config;
  const auto path = [&](const char* key) { return baseDir / get_string(doc, key, ""); };
  config.input = {path("input_annotations"), path("input_classes"), path("input_predicates")};
  config.output = {path("output_annotations"), path("output_classes"), path("output_predicates")};
  if (doc.contains("compact_mapping")) config.compactMapping = path("compact_mapping");

  const auto steps = doc.find("steps");
  if (steps == doc.end() || !steps->is_array()) config_fail("", "'steps' must be an array");
  for (std::size_t i = 0; i < steps->size(); ++i) {
    config.steps.push_back(parse_step((*steps)[i], "steps[" + std::to_string(i) + "]", baseDir));
  }
  validate_config(config);
  return config;
}

WorkflowConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void validate_config(const WorkflowConfig& config) {
  if (config.steps.empty()) throw ConfigError("workflow config: at least one step is required");
  const auto norm = [](const std::filesystem::path& p) {
    return p.empty() ? p : std::filesystem::weakly_canonical(p);
  };
  const std::vector<std::filesystem::path> inputs{norm(config.input.annotations),
                                                  norm(config.input.classes),
                                                  norm(config.input.predicates)};
  std::vector<std::filesystem::path> outputs{norm(config.output.annotations),
                                             norm(config.output.classes),
                                             norm(config.output.predicates)};
  if (config.compactMapping) outputs.push_back(norm(*config.compactMapping));
  for (const auto& out : outputs) {
    if (out.empty()) continue;
    if (std::find(inputs.begin(), inputs.end(), out) != inputs.end()) {
      throw ConfigError("workflow config: output path " + out.string() + " is also an input");
    }
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    for (std::size_t j = i + 1; j < outputs.size(); ++j) {
      if (!outputs[i].empty() && outputs[i] == outputs[j]) {
        throw ConfigError("workflow config: output path " + outputs[i].string() + " used twice");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Execution

std::string format_report(const WorkflowReport& report) {
  std::ostringstream os;
  os << "step\tkind\timages_touched\tvrs_changed\tvrs_removed\tvrs_added\timages_removed\n";
  for (const auto& s : report.steps) {
    os << s.ordinal << '\t' << s.name << '\t' << s.counters.imagesTouched << '\t'
       << s.counters.vrsChanged << '\t' << s.counters.vrsRemoved << '\t' << s.counters.vrsAdded
       << '\t' << s.counters.imagesRemoved << '\n';
  }
  return os.str();
}

WorkflowResult run_workflow(const WorkflowConfig& config, const AnnotationCorpus& input) {
  if (config.steps.empty()) throw ConfigError("workflow config: at least one step is required");
  const auto start = std::chrono::steady_clock::now();

  std::map<std::size_t, std::vector<protocol::ImageBlock>> scripts;
  for (std::size_t i = 0; i < config.steps.size(); ++i) {
    if (const auto* step = std::get_if<ApplyProtocolFile>(&config.steps[i])) {
      try {
        scripts[i] = protocol::load_script(step->path);
      } catch (const Error& e) {
        throw StepFailedError(i + 1, std::string(step_kind_name(config.steps[i])), e);
      }
    }
  }

  WorkflowResult result{input, {}};
  auto& corpus = result.corpus;
  for (std::size_t i = 0; i < config.steps.size(); ++i) {
    const auto& spec = config.steps[i];
    StepReport sr{i + 1, std::string(step_kind_name(spec)), {}};
    auto* counters = &sr.counters;
    try {
      corpus = std::visit(
          overloaded{
              [&](const UpdateMasterLists& s) { return update_master_lists(corpus, s); },
              [&](const ApplyProtocolFile&) {
                auto applied = protocol::validate_and_apply(corpus, scripts.at(i));
                *counters = applied.report;
                return std::move(applied.corpus);
              },
              [&](const ChangeClassForImageSet& s) {
                return change_class_for_image_set(corpus, s.images, s.fromName, s.toName, counters);
              },
              [&](const MergeClass& s) {
                return merge_object_class(corpus, s.fromName, s.toName, counters);
              },
              [&](const MergePredicate& s) {
                return merge_predicate(corpus, s.fromName, s.toName, counters);
              },
              [&](const RemoveVRTypesGlobal& s) {
                return remove_vr_types_global(corpus, s.types, counters);
              },
              [&](const RemoveEmptyImages&) { return remove_empty_images(corpus, counters); },
              [&](const ChangeVRTypeGlobal& s) {
                return change_vr_type_global(corpus, s.fromType, s.toType, counters);
              },
              [&](const DedupVRs&) { return dedup_vrs(corpus, counters); },
          },
          spec);
    } catch (const Error& e) {
      throw StepFailedError(i + 1, sr.name, e);
    }
    result.report.steps.push_back(std::move(sr));
  }
  result.report.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

WorkflowResult run_workflow_files(const WorkflowConfig& config) {
  validate_config(config);
  const auto input = load_corpus(config.input);
  auto result = run_workflow(config, input);
  if (config.compactMapping) {
    auto [compacted, mapping] = compact_corpus(result.corpus);
    write_file(*config.compactMapping, serialize_mapping(mapping));
    result.corpus = std::move(compacted);
  }
  save_corpus(result.corpus, config.output);
  return result;
}

}  // namespace vrdkit::workflow
