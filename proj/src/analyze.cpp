#include "vrdkit/analyze.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace vrdkit::analyze {

std::optional<std::string> VRPattern::position(std::string_view text) {
  if (text == "*") return std::nullopt;
  return std::string(text);
}

// ---------------------------------------------------------------------------
// Queries

QueryResult query_images(const AnnotationCorpus& corpus, const VRPattern& pattern) {
  const auto resolve = [](const MasterList& list, const std::optional<std::string>& name) {
    return name ? std::optional<std::uint32_t>(list.id_of(*name, "query pattern")) : std::nullopt;
  };
  const auto subj = resolve(corpus.objectClasses, pattern.subject);
  const auto pred = resolve(corpus.predicates, pattern.predicate);
  const auto obj = resolve(corpus.objectClasses, pattern.object);

  QueryResult result;
  std::set<std::string> subjects, predicates, objects;
  for (const auto& [image, vrs] : corpus.images) {
    bool hit = false;
    for (const auto& vr : vrs) {
      if (subj && vr.subject.classId != *subj) continue;
      if (pred && vr.predicateId != *pred) continue;
      if (obj && vr.object.classId != *obj) continue;
      hit = true;
      if (!subj) subjects.insert(corpus.class_name(vr.subject.classId));
      if (!pred) predicates.insert(corpus.predicate_name(vr.predicateId));
      if (!obj) objects.insert(corpus.class_name(vr.object.classId));
    }
    if (hit) result.images.push_back(image);
  }
  result.subjectBindings.assign(subjects.begin(), subjects.end());
  result.predicateBindings.assign(predicates.begin(), predicates.end());
  result.objectBindings.assign(objects.begin(), objects.end());
  return result;
}

std::vector<std::string> images_with_vr_count(const AnnotationCorpus& corpus, CountRange target) {
  std::vector<std::string> out;
  for (const auto& [image, vrs] : corpus.images) {
    if (vrs.size() < target.min) continue;
    if (target.max && vrs.size() > *target.max) continue;
    out.push_back(image);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distributions

std::string_view metric_name(Metric metric) noexcept {
  switch (metric) {
    case Metric::VrsPerImage: return "vrs_per_image";
    case Metric::DistinctClassesPerImage: return "distinct_classes_per_image";
    case Metric::DistinctPredicatesPerImage: return "distinct_predicates_per_image";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  for (auto m : {Metric::VrsPerImage, Metric::DistinctClassesPerImage,
                 Metric::DistinctPredicatesPerImage}) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

std::size_t Histogram::population() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, count] : buckets) n += count;
  return n;
}

Histogram distribution(const AnnotationCorpus& corpus, Metric metric) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& [_, vrs] : corpus.images) {
    std::size_t value = 0;
    switch (metric) {
      case Metric::VrsPerImage:
        value = vrs.size();
        break;
      case Metric::DistinctClassesPerImage: {
        std::set<ClassId> classes;
        for (const auto& vr : vrs) classes.insert({vr.subject.classId, vr.object.classId});
        value = classes.size();
        break;
      }
      case Metric::DistinctPredicatesPerImage: {
        std::set<PredicateId> preds;
        for (const auto& vr : vrs) preds.insert(vr.predicateId);
        value = preds.size();
        break;
      }
    }
    ++counts[value];
  }
  return {std::string(metric_name(metric)), {counts.begin(), counts.end()}};
}

// ---------------------------------------------------------------------------
// Geometry

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.well_formed() || !b.well_formed()) {
    throw DegenerateInputError("iou of degenerate box " +
                               (a.well_formed() ? b.to_string() : a.to_string()));
  }
  const auto ih = std::max<std::int64_t>(0, std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin));
  const auto iw = std::max<std::int64_t>(0, std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin));
  const auto inter = ih * iw;
  const auto uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Lint

std::string_view to_string(LintRule rule) noexcept {
  switch (rule) {
    case LintRule::ExactDuplicateVR: return "ExactDuplicateVR";
    case LintRule::NearDuplicateBbox: return "NearDuplicateBbox";
    case LintRule::DegenerateBbox: return "DegenerateBbox";
    case LintRule::MultiClassBbox: return "MultiClassBbox";
    case LintRule::EmptyImageEntry: return "EmptyImageEntry";
  }
  return "?";
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::Error ? "error" : "warning";
}

std::vector<LintFinding> lint(const AnnotationCorpus& corpus, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCategory::Usage, "near-duplicate IoU threshold must lie in (0, 1]");
  }
  std::vector<LintFinding> findings;
  for (const auto& [image, vrs] : corpus.images) {
    const auto emit = [&](LintRule rule, std::string detail, Severity sev) {
      findings.push_back({rule, image, std::move(detail), sev});
    };

    for (const auto& [i, j] : find_exact_duplicates(vrs)) {
      emit(LintRule::ExactDuplicateVR, "vrs=" + std::to_string(i) + "," + std::to_string(j),
           Severity::Error);
    }

    std::set<AnnotatedObject> objects;
    for (const auto& vr : vrs) objects.insert({vr.subject, vr.object});

    const std::vector<AnnotatedObject> sorted(objects.begin(), objects.end());
    for (std::size_t a = 0; a < sorted.size(); ++a) {
      for (std::size_t b = a + 1; b < sorted.size() && sorted[b].classId == sorted[a].classId; ++b) {
        if (!sorted[a].bbox.well_formed() || !sorted[b].bbox.well_formed()) continue;
        const double overlap = iou(sorted[a].bbox, sorted[b].bbox);
        if (overlap < threshold) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", overlap);
        emit(LintRule::NearDuplicateBbox,
             "class=" + corpus.class_name(sorted[a].classId) + " boxes=" +
                 sorted[a].bbox.to_string() + "," + sorted[b].bbox.to_string() + " iou=" + buf,
             Severity::Warning);
      }
    }

    std::map<BoundingBox, std::set<ClassId>> classesByBox;
    for (const auto& obj : objects) classesByBox[obj.bbox].insert(obj.classId);

    for (const auto& [box, _] : classesByBox) {
      if (!box.well_formed()) emit(LintRule::DegenerateBbox, "bbox=" + box.to_string(), Severity::Error);
    }

    for (const auto& [box, classes] : classesByBox) {
      if (classes.size() < 2) continue;
      std::string names;
      for (auto id : classes) names += (names.empty() ? "" : ",") + corpus.class_name(id);
      emit(LintRule::MultiClassBbox, "bbox=" + box.to_string() + " classes=" + names,
           Severity::Warning);
    }

    if (vrs.empty()) emit(LintRule::EmptyImageEntry, "no VRs", Severity::Warning);
  }
  std::stable_sort(findings.begin(), findings.end(), [](const LintFinding& a, const LintFinding& b) {
    return std::tie(a.image, a.rule, a.detail) < std::tie(b.image, b.rule, b.detail);
  });
  return findings;
}

// ---------------------------------------------------------------------------
// Overlay

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 8> kPalette{"#e6194b", "#3cb44b", "#4363d8", "#f58231",
                                                   "#911eb4", "#42d4f4", "#f032e6", "#9a6324"};

}  // namespace

std::string render_overlay(const AnnotationCorpus& corpus, const std::string& filename,
                           const std::vector<std::size_t>& selection) {
  const auto it = corpus.images.find(filename);
  if (it == corpus.images.end()) throw ImageNotFoundError(filename);
  const auto& vrs = it->second;

  std::vector<std::size_t> chosen = selection;
  if (chosen.empty()) {
    for (std::size_t i = 0; i < vrs.size(); ++i) chosen.push_back(i);
  }
  for (auto i : chosen) {
    if (i >= vrs.size()) {
      throw Error(ErrorCategory::Data, "image '" + filename + "' has no VR at index " + std::to_string(i));
    }
  }

  // Distinct objects in first-appearance order.
  std::vector<AnnotatedObject> objects;
  const auto add = [&](const AnnotatedObject& obj) {
    if (std::find(objects.begin(), objects.end(), obj) == objects.end()) objects.push_back(obj);
  };
  for (auto i : chosen) {
    add(vrs[i].subject);
    add(vrs[i].object);
  }

  std::int64_t width = 1, height = 1;
  for (const auto& o : objects) {
    width = std::max({width, o.bbox.xmax, o.bbox.xmin});
    height = std::max({height, o.bbox.ymax, o.bbox.ymin});
  }
  const auto w = std::to_string(width), h = std::to_string(height);
  const auto href = xml_escape(filename);

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" +
         w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  svg += "  <image href=\"" + href + "\" xlink:href=\"" + href + "\" x=\"0\" y=\"0\" width=\"" + w +
         "\" height=\"" + h + "\" preserveAspectRatio=\"xMinYMin\"/>\n";
  for (const auto& o : objects) {
    const auto name = xml_escape(corpus.class_name(o.classId));
    const auto color = kPalette[o.classId % kPalette.size()];
    const auto x = std::to_string(o.bbox.xmin), y = std::to_string(o.bbox.ymin);
    svg += "  <g class=\"object\" data-class=\"" + name + "\">\n";
    svg += "    <rect x=\"" + x + "\" y=\"" + y + "\" width=\"" +
           std::to_string(std::max<std::int64_t>(0, o.bbox.xmax - o.bbox.xmin)) + "\" height=\"" +
           std::to_string(std::max<std::int64_t>(0, o.bbox.ymax - o.bbox.ymin)) +
           "\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "    <text x=\"" + x + "\" y=\"" + y + "\" dy=\"-2\" fill=\"" + std::string(color) +
           "\" font-size=\"12\">" + name + "</text>\n";
    svg += "  </g>\n";
  }
  for (auto i : chosen) {
    const auto& vr = vrs[i];
    const auto cx = [](const BoundingBox& b) { return std::to_string((b.xmin + b.xmax) / 2); };
    const auto cy = [](const BoundingBox& b) { return std::to_string((b.ymin + b.ymax) / 2); };
    svg += "  <line class=\"vr\" data-index=\"" + std::to_string(i) + "\" x1=\"" + cx(vr.subject.bbox) +
           "\" y1=\"" + cy(vr.subject.bbox) + "\" x2=\"" + cx(vr.object.bbox) + "\" y2=\"" +
           cy(vr.object.bbox) + "\" stroke=\"#ffffff\" stroke-dasharray=\"4 2\"><title>" +
           xml_escape(corpus.class_name(vr.subject.classId) + " " +
                      corpus.predicate_name(vr.predicateId) + " " +
                      corpus.class_name(vr.object.classId)) +
           "</title></line>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void render_overlay(const AnnotationCorpus& corpus, const std::string& filename,
                    const std::vector<std::size_t>& selection, const std::filesystem::path& outPath) {
  write_file(outPath, render_overlay(corpus, filename, selection));
}

// ---------------------------------------------------------------------------
// Diff

namespace {

using NamedVR = std::tuple<std::string, BoundingBox, std::string, std::string, BoundingBox>;

std::vector<NamedVR> named(const AnnotationCorpus& c, const std::vector<VisualRelationship>& vrs) {
  std::vector<NamedVR> out;
  for (const auto& vr : vrs) {
    out.emplace_back(c.class_name(vr.subject.classId), vr.subject.bbox, c.predicate_name(vr.predicateId),
                     c.class_name(vr.object.classId), vr.object.bbox);
  }
  return out;
}

}  // namespace

std::vector<ImageDiff> diff_corpora(const AnnotationCorpus& before, const AnnotationCorpus& after) {
  std::set<std::string> keys;
  for (const auto& [k, _] : before.images) keys.insert(k);
  for (const auto& [k, _] : after.images) keys.insert(k);

  std::vector<ImageDiff> out;
  for (const auto& key : keys) {
    const auto a = before.images.find(key);
    const auto b = after.images.find(key);
    if (b == after.images.end()) {
      out.push_back({key, ImageDiff::Status::Removed, 0, a->second.size(), 0});
      continue;
    }
    if (a == before.images.end()) {
      out.push_back({key, ImageDiff::Status::Added, b->second.size(), 0, 0});
      continue;
    }
    const auto lhs = named(before, a->second);
    const auto rhs = named(after, b->second);
    std::vector<bool> usedL(lhs.size(), false), usedR(rhs.size(), false);
    // Positional matches first, then value matches anywhere.
    for (std::size_t i = 0; i < std::min(lhs.size(), rhs.size()); ++i) {
      if (lhs[i] == rhs[i]) usedL[i] = usedR[i] = true;
    }
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      if (usedL[i]) continue;
      for (std::size_t j = 0; j < rhs.size(); ++j) {
        if (!usedR[j] && lhs[i] == rhs[j]) {
          usedL[i] = usedR[j] = true;
          break;
        }
      }
    }
    ImageDiff d{key, ImageDiff::Status::Modified, 0, 0, 0};
    // Leftovers at the same position count as in-place changes.
    for (std::size_t i = 0; i < std::max(lhs.size(), rhs.size()); ++i) {
      const bool l = i < lhs.size() && !usedL[i];
      const bool r = i < rhs.size() && !usedR[i];
      if (l && r) {
        ++d.changed;
      } else if (l) {
        ++d.removed;
      } else if (r) {
        ++d.added;
      }
    }
    if (d.added || d.removed || d.changed) out.push_back(d);
  }
  return out;
}

}  // namespace vrdkit::analyze
