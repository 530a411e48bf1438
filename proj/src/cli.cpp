#include "vrdkit/cli.hpp"

#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vrdkit/analyze.hpp"
#include "vrdkit/corpus.hpp"
#include "vrdkit/kg.hpp"
#include "vrdkit/protocol.hpp"
#include "vrdkit/workflow.hpp"

namespace vrdkit::cli {

namespace {

using nlohmann::json;

struct CorpusFlags {
  std::string annotations;
  std::string classes;
  std::string predicates;

  void attach(CLI::App* app, bool withAnnotations = true) {
    if (withAnnotations) app->add_option("--annotations", annotations, "annotations file")->required();
    app->add_option("--classes", classes, "object-class master list")->required();
    app->add_option("--predicates", predicates, "predicate master list")->required();
  }

  AnnotationCorpus load() const { return load_corpus(annotations, classes, predicates); }
};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void add_format(CLI::App* app, std::string& format) {
  app->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->default_val("text");
}

class Commands {
 public:
  Commands(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void install(CLI::App& app) {
    install_validate(app);
    install_stats(app);
    install_query(app);
    install_count(app);
    install_hist(app);
    install_lint(app);
    install_overlay(app);
    install_apply(app);
    install_workflow(app);
    install_kg(app);
    install_diff(app);
  }

  int status() const { return status_; }

 private:
  void install_validate(CLI::App& app) {
    auto* cmd = app.add_subcommand("validate", "load a corpus and check its invariants");
    corpus_.attach(cmd);
    cmd->callback([this] {
      const auto corpus = corpus_.load();
      out_ << "ok\t" << corpus.images.size() << " images\t" << corpus.vr_count() << " VRs\n";
    });
  }

  void install_stats(CLI::App& app) {
    auto* cmd = app.add_subcommand("stats", "corpus statistics");
    corpus_.attach(cmd);
    add_format(cmd, format_);
    cmd->callback([this] {
      const auto s = compute_stats(corpus_.load());
      if (format_ == "structured") {
        json doc = {{"object_classes", s.objectClassCount},
                    {"predicates", s.predicateCount},
                    {"images", s.imageCount},
                    {"vrs", s.vrCount},
                    {"mean_vrs_per_image", s.meanVRsPerImage},
                    {"images_with_duplicate_vrs", s.imagesWithExactDuplicateVRs}};
        out_ << doc.dump(2) << "\n";
        return;
      }
      out_ << "object_classes\t" << s.objectClassCount << "\n"
           << "predicates\t" << s.predicateCount << "\n"
           << "images\t" << s.imageCount << "\n"
           << "vrs\t" << s.vrCount << "\n"
           << "mean_vrs_per_image\t" << fixed2(s.meanVRsPerImage) << "\n"
           << "images_with_duplicate_vrs\t" << s.imagesWithExactDuplicateVRs << "\n";
    });
  }

  void install_query(CLI::App& app) {
    auto* cmd = app.add_subcommand("query", "find images having VRs matching a pattern ('*' = wildcard)");
    corpus_.attach(cmd);
    add_format(cmd, format_);
    cmd->add_option("subject", pattern_[0], "subject class or *")->required();
    cmd->add_option("predicate", pattern_[1], "predicate or *")->required();
    cmd->add_option("object", pattern_[2], "object class or *")->required();
    cmd->callback([this] {
      const analyze::VRPattern pattern{analyze::VRPattern::position(pattern_[0]),
                                       analyze::VRPattern::position(pattern_[1]),
                                       analyze::VRPattern::position(pattern_[2])};
      const auto r = analyze::query_images(corpus_.load(), pattern);
      if (format_ == "structured") {
        json doc = {{"images", r.images},
                    {"bindings",
                     {{"subject", r.subjectBindings},
                      {"predicate", r.predicateBindings},
                      {"object", r.objectBindings}}}};
        out_ << doc.dump(2) << "\n";
        return;
      }
      for (const auto& image : r.images) out_ << "image\t" << image << "\n";
      for (const auto& n : r.subjectBindings) out_ << "binding\tsubject\t" << n << "\n";
      for (const auto& n : r.predicateBindings) out_ << "binding\tpredicate\t" << n << "\n";
      for (const auto& n : r.objectBindings) out_ << "binding\tobject\t" << n << "\n";
    });
  }

  void install_count(CLI::App& app) {
    auto* cmd = app.add_subcommand("count", "images whose VR count lies in [min, max]");
    corpus_.attach(cmd);
    cmd->add_option("--min", countMin_, "minimum VR count")->required();
    cmd->add_option("--max", countMax_, "maximum VR count (default: unbounded)");
    cmd->callback([this, cmd] {
      analyze::CountRange range{countMin_, std::nullopt};
      if (cmd->count("--max")) range.max = countMax_;
      for (const auto& image : analyze::images_with_vr_count(corpus_.load(), range)) out_ << image << "\n";
    });
  }

  void install_hist(CLI::App& app) {
    auto* cmd = app.add_subcommand("hist", "per-image distribution");
    corpus_.attach(cmd);
    add_format(cmd, format_);
    cmd->add_option("metric", metric_, "vrs_per_image | distinct_classes_per_image | distinct_predicates_per_image")
        ->required()
        ->check(CLI::IsMember({"vrs_per_image", "distinct_classes_per_image", "distinct_predicates_per_image"}));
    cmd->callback([this] {
      const auto h = analyze::distribution(corpus_.load(), *analyze::parse_metric(metric_));
      if (format_ == "structured") {
        json doc = {{"metric", h.metric}, {"buckets", json::array()}};
        for (const auto& [value, count] : h.buckets) doc["buckets"].push_back({value, count});
        out_ << doc.dump(2) << "\n";
        return;
      }
      for (const auto& [value, count] : h.buckets) out_ << value << "\t" << count << "\n";
    });
  }

  void install_lint(CLI::App& app) {
    auto* cmd = app.add_subcommand("lint", "annotation quality checks");
    corpus_.attach(cmd);
    add_format(cmd, format_);
    cmd->add_option("--threshold", threshold_, "near-duplicate IoU threshold in (0, 1]")
        ->default_val(analyze::kDefaultNearDuplicateIou);
    cmd->add_flag("--strict", strict_, "exit 1 when any finding is reported");
    cmd->callback([this] {
      const auto findings = analyze::lint(corpus_.load(), threshold_);
      if (format_ == "structured") {
        json doc = json::array();
        for (const auto& f : findings) {
          doc.push_back({{"image", f.image},
                         {"rule", analyze::to_string(f.rule)},
                         {"detail", f.detail},
                         {"severity", analyze::to_string(f.severity)}});
        }
        out_ << doc.dump(2) << "\n";
      } else {
        for (const auto& f : findings) {
          out_ << f.image << "\t" << analyze::to_string(f.rule) << "\t" << f.detail << "\n";
        }
      }
      if (strict_ && !findings.empty()) status_ = kFindings;
    });
  }

  void install_overlay(CLI::App& app) {
    auto* cmd = app.add_subcommand("overlay", "write an SVG overlay of an image's annotated objects");
    corpus_.attach(cmd);
    cmd->add_option("--image", image_, "image filename")->required();
    cmd->add_option("--vr", selection_, "VR index to draw (repeatable; default: all)");
    cmd->add_option("--out", outPath_, "output SVG path")->required();
    cmd->callback([this] {
      analyze::render_overlay(corpus_.load(), image_, selection_, outPath_);
    });
  }

  void install_apply(CLI::App& app) {
    auto* cmd = app.add_subcommand("apply", "validate and apply a customization script");
    corpus_.attach(cmd);
    cmd->add_option("script", scriptPath_, "script file")->required();
    cmd->add_option("--out", outPath_, "where to write the customized annotations (omit for a dry run)");
    cmd->callback([this] {
      const auto corpus = corpus_.load();
      const auto blocks = protocol::load_script(scriptPath_);
      const auto result = protocol::validate_and_apply(corpus, blocks);
      if (!outPath_.empty()) save_corpus(result.corpus, outPath_);
      const auto& r = result.report;
      out_ << "images_touched\t" << r.imagesTouched << "\n"
           << "vrs_changed\t" << r.vrsChanged << "\n"
           << "vrs_removed\t" << r.vrsRemoved << "\n"
           << "vrs_added\t" << r.vrsAdded << "\n"
           << "images_removed\t" << r.imagesRemoved << "\n";
    });
  }

  void install_workflow(CLI::App& app) {
    auto* wf = app.add_subcommand("workflow", "multi-step customization runs");
    wf->require_subcommand(1);
    auto* run = wf->add_subcommand("run", "run a workflow config");
    run->add_option("config", configPath_, "workflow config file")->required();
    run->callback([this] {
      const auto config = workflow::load_config(configPath_);
      const auto result = workflow::run_workflow_files(config);
      out_ << workflow::format_report(result.report);
    });
  }

  void install_kg(CLI::App& app) {
    auto* kgCmd = app.add_subcommand("kg", "knowledge-graph bridge");
    kgCmd->require_subcommand(1);

    auto* lower = kgCmd->add_subcommand("lower", "lower annotations to a triple file");
    corpus_.attach(lower);
    lower->add_option("--schema", schemaPath_, "schema file")->required();
    lower->add_option("--image", image_, "lower a single image");
    lower->add_option("--out", outPath_, "triple file")->required();
    lower->callback([this] {
      const auto corpus = corpus_.load();
      const auto schema = kg::load_schema(schemaPath_);
      const auto store = image_.empty() ? kg::lower_annotations(corpus, schema)
                                        : kg::lower_image(corpus, image_, schema);
      kg::save_store(store, outPath_);
      out_ << "triples\t" << store.size() << "\n";
    });

    auto* mat = kgCmd->add_subcommand("materialize", "compute the deductive closure of a triple file");
    mat->add_option("triples", triplesPath_, "input triple file")->required();
    mat->add_option("--schema", schemaPath_, "schema file")->required();
    mat->add_option("--out", outPath_, "output triple file")->required();
    mat->callback([this] {
      const auto schema = kg::load_schema(schemaPath_);
      const auto input = kg::load_store(triplesPath_);
      const auto closed = kg::materialize(input, schema);
      kg::save_store(closed, outPath_);
      out_ << "triples_in\t" << input.size() << "\n"
           << "triples_out\t" << closed.size() << "\n";
    });

    auto* ext = kgCmd->add_subcommand("extract", "extract annotations from a triple file");
    corpus_.attach(ext, false);
    ext->add_option("triples", triplesPath_, "input triple file")->required();
    ext->add_option("--schema", schemaPath_, "schema file")->required();
    ext->add_option("--out", outPath_, "annotations output path")->required();
    ext->callback([this] {
      const auto schema = kg::load_schema(schemaPath_);
      const auto lists = parse_corpus("{}", read_file(corpus_.classes), read_file(corpus_.predicates));
      const auto corpus =
          kg::extract_annotations(kg::load_store(triplesPath_), schema, lists.objectClasses, lists.predicates);
      save_corpus(corpus, outPath_);
      out_ << "images\t" << corpus.images.size() << "\n"
           << "vrs\t" << corpus.vr_count() << "\n";
    });

    auto* init = kgCmd->add_subcommand("init-schema", "write a schema designating every master-list name");
    corpus_.attach(init, false);
    init->add_option("--namespace", namespace_, "IRI namespace")->default_val(std::string(kg::kDefaultNamespace));
    init->add_option("--out", outPath_, "schema output path")->required();
    init->callback([this] {
      const auto lists = parse_corpus("{}", read_file(corpus_.classes), read_file(corpus_.predicates));
      write_file(outPath_, kg::serialize_schema(kg::schema_for_corpus(lists, namespace_)));
    });
  }

  void install_diff(CLI::App& app) {
    auto* cmd = app.add_subcommand("diff", "per-image VR differences between two annotation files");
    cmd->add_option("before", diffA_, "first annotations file")->required();
    cmd->add_option("after", diffB_, "second annotations file")->required();
    cmd->add_option("--classes", corpus_.classes, "object-class list for both sides")->required();
    cmd->add_option("--predicates", corpus_.predicates, "predicate list for both sides")->required();
    cmd->add_option("--classes-after", classesB_, "object-class list of the second file");
    cmd->add_option("--predicates-after", predicatesB_, "predicate list of the second file");
    add_format(cmd, format_);
    cmd->callback([this] {
      const auto a = load_corpus(diffA_, corpus_.classes, corpus_.predicates);
      const auto b = load_corpus(diffB_, classesB_.empty() ? corpus_.classes : classesB_,
                                 predicatesB_.empty() ? corpus_.predicates : predicatesB_);
      const auto diffs = analyze::diff_corpora(a, b);
      const auto status = [](analyze::ImageDiff::Status s) {
        switch (s) {
          case analyze::ImageDiff::Status::Added: return "added";
          case analyze::ImageDiff::Status::Removed: return "removed";
          case analyze::ImageDiff::Status::Modified: return "modified";
        }
        return "?";
      };
      if (format_ == "structured") {
        json doc = json::array();
        for (const auto& d : diffs) {
          doc.push_back({{"image", d.image},
                         {"status", status(d.status)},
                         {"added", d.added},
                         {"removed", d.removed},
                         {"changed", d.changed}});
        }
        out_ << doc.dump(2) << "\n";
        return;
      }
      for (const auto& d : diffs) {
        out_ << d.image << "\t" << status(d.status) << "\t+" << d.added << "\t-" << d.removed << "\t~"
             << d.changed << "\n";
      }
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  int status_ = kSuccess;

  CorpusFlags corpus_;
  std::string format_ = "text";
  std::array<std::string, 3> pattern_;
  std::size_t countMin_ = 0;
  std::size_t countMax_ = 0;
  std::string metric_;
  double threshold_ = analyze::kDefaultNearDuplicateIou;
  bool strict_ = false;
  std::string image_;
  std::vector<std::size_t> selection_;
  std::string outPath_;
  std::string scriptPath_;
  std::string configPath_;
  std::string schemaPath_;
  std::string triplesPath_;
  std::string namespace_;
  std::string diffA_, diffB_, classesB_, predicatesB_;
};

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Data: return kDataError;
    case ErrorCategory::Io: return kIoError;
  }
  return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Toolkit for visual-relationship annotation corpora", "vrdkit"};
  app.require_subcommand(1);
  Commands commands(out, err);
  commands.install(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    // Show the synopsis of the deepest subcommand that was selected.
    const CLI::App* scope = &app;
    while (true) {
      const auto subs = scope->get_subcommands();
      if (subs.empty()) break;
      scope = subs.front();
    }
    err << scope->help();
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return commands.status();
}

}  // namespace vrdkit::cli
