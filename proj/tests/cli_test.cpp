#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "vrdkit/cli.hpp"
#include "vrdkit/corpus.hpp"

using namespace vrdkit;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "vrdkit");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> corpus_flags(const CorpusPaths& p) {
  return {"--annotations", p.annotations.string(), "--classes", p.classes.string(), "--predicates",
          p.predicates.string()};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

const auto kListing = support::listing_paths();
const auto kScript = (support::kTestData / "listing1" / "listing1.txt").string();

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run({"--help"}).code, cli::kSuccess);
  const auto none = run({});
  EXPECT_EQ(none.code, cli::kUsage);
  EXPECT_FALSE(none.err.empty());
  EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
  const auto missing = run({"stats", "--classes", "x"});
  EXPECT_EQ(missing.code, cli::kUsage);
  EXPECT_NE(missing.err.find("stats"), std::string::npos);
  EXPECT_EQ(run(with({"lint", "--threshold", "2"}, corpus_flags(kListing))).code, cli::kUsage);
  EXPECT_EQ(run(with({"stats", "--format", "xml"}, corpus_flags(kListing))).code, cli::kUsage);
}

TEST(Cli, ValidateAndStats) {
  EXPECT_EQ(run(with({"validate"}, corpus_flags(kListing))).code, cli::kSuccess);
  const auto stats = run(with({"stats"}, corpus_flags(kListing)));
  EXPECT_EQ(stats.code, cli::kSuccess);
  EXPECT_NE(stats.out.find("vrs\t27\n"), std::string::npos);
  EXPECT_NE(stats.out.find("mean_vrs_per_image\t4.50\n"), std::string::npos);
  const auto structured = run(with({"stats", "--format", "structured"}, corpus_flags(kListing)));
  EXPECT_NE(structured.out.find("\"vrs\": 27"), std::string::npos);
}

TEST(Cli, MissingFileIsIoError) {
  auto paths = kListing;
  paths.annotations = "/nonexistent/annotations.json";
  const auto r = run(with({"stats"}, corpus_flags(paths)));
  EXPECT_EQ(r.code, cli::kIoError);
  EXPECT_NE(r.err.find("/nonexistent/annotations.json"), std::string::npos);
}

TEST(Cli, ApplyWritesExpectedCorpus) {
  support::TempDir dir;
  const auto out = (dir / "out.json").string();
  const auto r = run(with({"apply", kScript, "--out", out}, corpus_flags(kListing)));
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const auto classes = read_file(kListing.classes), predicates = read_file(kListing.predicates);
  EXPECT_EQ(parse_corpus(read_file(out), classes, predicates),
            parse_corpus(read_file(support::kTestData / "listing1" / "expected_annotations.json"), classes,
                         predicates));
}

TEST(Cli, ApplyMismatchReportsLineAndWritesNothing) {
  support::TempDir dir;
  const auto script = dir / "bad.txt";
  write_file(script, "imname; 1426904233_ee344879b6_b.jpg\n\ncvrpxx; 5; (bear, sit on, table); in\n");
  const auto out = dir / "out.json";
  const auto r = run(with({"apply", script.string(), "--out", out.string()}, corpus_flags(kListing)));
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(out));
}

TEST(Cli, LintStrict) {
  support::TempDir dir;
  const auto annotations = dir / "a.json";
  write_file(annotations, R"({"empty.jpg": []})");
  auto paths = kListing;
  paths.annotations = annotations;
  EXPECT_EQ(run(with({"lint"}, corpus_flags(paths))).code, cli::kSuccess);
  const auto strict = run(with({"lint", "--strict"}, corpus_flags(paths)));
  EXPECT_EQ(strict.code, cli::kFindings);
  EXPECT_EQ(strict.out, "empty.jpg\tEmptyImageEntry\tno VRs\n");
  EXPECT_EQ(run(with({"lint", "--strict"}, corpus_flags(kListing))).code, cli::kSuccess);
}

TEST(Cli, QueryCountHist) {
  const auto q = run(with({"query", "person", "*", "*"}, corpus_flags(kListing)));
  EXPECT_EQ(q.code, cli::kSuccess);
  EXPECT_FALSE(q.out.empty());
  EXPECT_EQ(run(with({"query", "unicorn", "*", "*"}, corpus_flags(kListing))).code, cli::kDataError);
  EXPECT_EQ(run(with({"count", "--min", "0"}, corpus_flags(kListing))).code, cli::kSuccess);
  EXPECT_EQ(run(with({"hist", "vrs_per_image"}, corpus_flags(kListing))).code, cli::kSuccess);
  EXPECT_EQ(run(with({"hist", "nonsense"}, corpus_flags(kListing))).code, cli::kUsage);
}

TEST(Cli, OverlayWritesSvg) {
  support::TempDir dir;
  const auto out = dir / "o.svg";
  const auto r = run(with({"overlay", "--image", "1426904233_ee344879b6_b.jpg", "--vr", "0", "--out", out.string()},
                          corpus_flags(kListing)));
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  EXPECT_NE(read_file(out).find("<svg"), std::string::npos);
  EXPECT_EQ(run(with({"overlay", "--image", "nope.jpg", "--out", out.string()}, corpus_flags(kListing))).code,
            cli::kDataError);
}

TEST(Cli, WorkflowRunsAndRepeatsIdentically) {
  support::TempDir dir;
  // Copy the demo inputs next to a config that writes into the temp dir.
  for (const auto* name : {"annotations.json", "classes.json", "predicates.json", "step02.txt", "step07.txt",
                           "step08.txt", "step11.txt", "workflow.json"}) {
    std::filesystem::copy_file(support::kDemoData / name, dir / name);
  }
  const auto config = (dir / "workflow.json").string();
  const auto first = run({"workflow", "run", config});
  ASSERT_EQ(first.code, cli::kSuccess) << first.err;
  const auto a = read_file(dir / "out" / "annotations.json");
  const auto second = run({"workflow", "run", config});
  ASSERT_EQ(second.code, cli::kSuccess);
  EXPECT_EQ(read_file(dir / "out" / "annotations.json"), a);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(run({"workflow", "run", (dir / "missing.json").string()}).code, cli::kIoError);
}

TEST(Cli, KgPipelineRoundTrips) {
  support::TempDir dir;
  const auto schema = (dir / "schema.txt").string();
  const auto triples = (dir / "g.nt").string();
  const auto closed = (dir / "closed.nt").string();
  const auto extracted = (dir / "x.json").string();
  const std::vector<std::string> lists = {"--classes", kListing.classes.string(), "--predicates",
                                          kListing.predicates.string()};
  ASSERT_EQ(run(with({"kg", "init-schema", "--out", schema}, lists)).code, cli::kSuccess);
  ASSERT_EQ(run(with({"kg", "lower", "--schema", schema, "--out", triples}, corpus_flags(kListing))).code,
            cli::kSuccess);
  ASSERT_EQ(run({"kg", "materialize", triples, "--schema", schema, "--out", closed}).code, cli::kSuccess);
  const auto r = run(with({"kg", "extract", closed, "--schema", schema, "--out", extracted}, lists));
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const auto diff = run(with({"diff", kListing.annotations.string(), extracted}, lists));
  EXPECT_EQ(diff.code, cli::kSuccess);
  EXPECT_EQ(diff.out, "") << "extraction reorders VRs but must not change them";
}

TEST(Cli, DiffReportsChanges) {
  support::TempDir dir;
  const auto out = (dir / "out.json").string();
  ASSERT_EQ(run(with({"apply", kScript, "--out", out}, corpus_flags(kListing))).code, cli::kSuccess);
  const auto r = run({"diff", kListing.annotations.string(), out, "--classes", kListing.classes.string(),
                      "--predicates", kListing.predicates.string()});
  EXPECT_EQ(r.code, cli::kSuccess);
  EXPECT_NE(r.out.find("7171463996_900cb4ce33_b.jpg\tremoved"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("2000000001_untouched_b.jpg"), std::string::npos);
}

TEST(Cli, OutputsAreDeterministic) {
  for (const auto& cmd : std::vector<std::vector<std::string>>{{"stats"}, {"lint"}, {"hist", "vrs_per_image"},
                                                               {"query", "*", "on", "*"}}) {
    const auto a = run(with(cmd, corpus_flags(kListing)));
    const auto b = run(with(cmd, corpus_flags(kListing)));
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.code, b.code);
  }
}
