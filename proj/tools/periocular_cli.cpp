// Command-line front end for the periocular evaluation toolkit.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"

namespace fs = std::filesystem;
using namespace periocular;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string cache_dir;
  std::string out_dir = "out";
  bool seed_set = false;
};

template <typename Fn>
void in_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

Manifest load_variant(const std::string& path, const std::string& attribute, const std::string& variant) {
  ManifestOptions opts;
  opts.attribute = parse_attribute(attribute);
  return select_variant(load_manifest(path, opts), parse_variant(variant));
}

void print_stats(const ExtractionStats& s) {
  std::cout << "computed " << s.computed << ", cache hits " << s.cache_hits << ", recomputed corrupt "
            << s.corrupt_recomputed << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periocular verification evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--cache-dir", g.cache_dir, "Feature cache directory");
  app.add_option("--out-dir", g.out_dir, "Output directory");

  std::string manifest, attribute = "eyeglasses", variant = "original", preset = "proposed_fusion";
  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("manifest", manifest, "Manifest CSV")->required();
    sub->add_option("--attribute", attribute, "Attribute of interest (eyeglasses|gaze)");
  };

  // validate
  auto* validate = app.add_subcommand("validate", "Check a manifest");
  add_manifest(validate);
  validate->callback([&] {
    in_stage("validate", [&] {
      ManifestOptions opts;
      opts.attribute = parse_attribute(attribute);
      const Manifest m = load_manifest(manifest, opts);
      std::size_t normalized = 0;
      for (const auto& s : m.samples) normalized += s.variant == Variant::normalized;
      std::cout << m.samples.size() << " samples (" << normalized << " normalized), " << m.subjects().size()
                << " subjects\n";
    });
  });

  // split
  double fraction = 0.5;
  std::string ordering = "lexicographic";
  auto* split = app.add_subcommand("split", "Partition subjects into train and evaluation sets");
  add_manifest(split);
  split->add_option("--fraction", fraction, "Fraction of subjects used for training");
  split->add_option("--ordering", ordering, "Subject ordering (lexicographic|manifest_order)");
  split->callback([&] {
    in_stage("split", [&] {
      const Manifest m = load_variant(manifest, attribute, variant);
      const auto s = split_subjects(m, fraction, parse_subject_ordering(ordering));
      write_manifest(s.train, fs::path(g.out_dir) / "train.csv");
      write_manifest(s.eval, fs::path(g.out_dir) / "eval.csv");
      std::cout << "train " << s.train.samples.size() << " samples, eval " << s.eval.samples.size() << " samples\n";
    });
  });

  // normalize
  std::string command;
  auto* normalize = app.add_subcommand("normalize", "Run an attribute normalizer over a manifest");
  add_manifest(normalize);
  normalize->add_option("--cmd", command, "Command template with {in_dir} and {out_dir}, or 'identity'")->required();
  normalize->callback([&] {
    in_stage("normalize", [&] {
      const Manifest m = load_variant(manifest, attribute, "original");
      const Manifest out = normalize_batch(m, command, fs::path(g.out_dir) / "normalizer");
      write_manifest(out, fs::path(g.out_dir) / "normalized.csv");
      std::cout << out.samples.size() << " normalized samples\n";
    });
  });

  // extract
  std::string embedding_dir;
  int workers = 0;
  auto* extract = app.add_subcommand("extract", "Compute and cache features");
  add_manifest(extract);
  extract->add_option("--preset", preset, "park|ahmed|proposed_fusion|deep");
  extract->add_option("--variant", variant, "original|normalized");
  extract->add_option("--embedding-dir", embedding_dir, "Embedding root for the deep preset");
  extract->add_option("--workers", workers, "Worker threads (0 = all cores)");
  extract->callback([&] {
    in_stage("extract", [&] {
      if (g.cache_dir.empty()) throw InvalidArgument("extract needs --cache-dir");
      FeatureOptions opts;
      opts.embedding_dir = embedding_dir;
      opts.workers = workers;
      ExtractionStats stats;
      extract_all(load_variant(manifest, attribute, variant), parse_preset(preset), g.cache_dir, opts, &stats);
      print_stats(stats);
    });
  });

  // pairs
  bool differing = false;
  auto* pairs = app.add_subcommand("pairs", "Generate the all-against-all pair list");
  add_manifest(pairs);
  pairs->add_flag("--attribute-differing", differing, "Keep only pairs whose attribute differs");
  pairs->callback([&] {
    in_stage("pairs", [&] {
      const PairList p = generate_pairs(load_variant(manifest, attribute, "original"), differing);
      write_pair_list(p, fs::path(g.out_dir) / "pairs.csv");
      std::cout << p.count(PairLabel::genuine) << " genuine, " << p.count(PairLabel::impostor) << " impostor\n";
    });
  });

  // match
  std::string pair_file;
  double ratio = kDefaultRatio;
  bool symmetric = false;
  auto* match = app.add_subcommand("match", "Score a pair list");
  add_manifest(match);
  match->add_option("--pairs", pair_file, "Pair list CSV")->required();
  match->add_option("--preset", preset, "park|ahmed|proposed_fusion|deep");
  match->add_option("--variant", variant, "original|normalized");
  match->add_option("--embedding-dir", embedding_dir, "Embedding root for the deep preset");
  match->add_option("--ratio", ratio, "SIFT ratio-test threshold");
  match->add_flag("--symmetric", symmetric, "Average SIFT scores over both directions");
  match->add_option("--workers", workers, "Worker threads (0 = all cores)");
  match->callback([&] {
    PairList p;
    FeatureMap features;
    in_stage("extract", [&] {
      p = read_pair_list(pair_file);
      FeatureOptions opts;
      opts.embedding_dir = embedding_dir;
      opts.workers = workers;
      features = extract_all(load_variant(manifest, attribute, variant), parse_preset(preset), g.cache_dir, opts);
    });
    in_stage("match", [&] {
      const auto table = score_pairs(p, features, parse_preset(preset), {ratio, symmetric, workers});
      write_scores_long(table, fs::path(g.out_dir) / "scores.csv");
      std::cout << table.pairs.pairs.size() << " pairs x " << table.matcher_ids.size() << " matchers scored\n";
    });
  });

  // fuse
  std::string scores_file;
  std::vector<double> weights;
  std::vector<std::string> fuse_matchers;
  auto* fuse = app.add_subcommand("fuse", "Min-max normalise and fuse matcher scores");
  fuse->add_option("scores", scores_file, "Long-format score CSV")->required();
  fuse->add_option("--weights", weights, "One weight per matcher, summing to 1");
  fuse->add_option("--matchers", fuse_matchers, "Matcher order of --weights (default: file order)");
  fuse->callback([&] {
    in_stage("fuse", [&] {
      ScoreTable table = read_scores_long(scores_file);
      const auto ids = fuse_matchers.empty() ? table.matcher_ids : fuse_matchers;
      FusionConfig cfg = weights.empty() ? FusionConfig::uniform(ids) : FusionConfig{ids, weights};
      cfg.validate();
      table.fused = fuse_columns(table, cfg);
      write_fused(table, fs::path(g.out_dir) / "fused.csv");
    });
  });

  // evaluate
  std::string fused_file;
  auto* evaluate = app.add_subcommand("evaluate", "Build verification reports from scores");
  evaluate->add_option("--scores", scores_file, "Long-format score CSV");
  evaluate->add_option("--fused", fused_file, "Fused score CSV");
  evaluate->add_option("--variant", variant, "Variant label of the reports");
  evaluate->callback([&] {
    in_stage("report", [&] {
      if (scores_file.empty() && fused_file.empty()) throw InvalidArgument("evaluate needs --scores and/or --fused");
      const Variant v = parse_variant(variant);
      auto emit = [&](const ScoreTable& t, const std::string& id) {
        const ScoreSet s = score_set(t, id);
        const auto r = build_report(s, id, v);
        const fs::path base = fs::path(g.out_dir) / "reports" / id;
        write_report_json(r, fs::path(base) += ".json");
        write_roc_csv(r, fs::path(base) += ".roc.csv");
        write_report_svg(r, s, fs::path(base) += ".svg");
        std::cout << id << ": AUC " << format_auc_percent(r.auc) << "%, d' "
                  << (r.decidability_state == DecidabilityState::finite ? std::to_string(r.decidability) : "n/a")
                  << ", EER " << r.eer << '\n';
      };
      if (!scores_file.empty()) {
        const auto t = read_scores_long(scores_file);
        for (const auto& id : t.matcher_ids) emit(t, id);
      }
      if (!fused_file.empty()) emit(read_fused(fused_file), "fused");
    });
  });

  // compare
  std::vector<std::string> before, after;
  auto* compare = app.add_subcommand("compare", "Compare original and normalized reports");
  compare->add_option("--before", before, "Report JSON(s) of the original variant; repeat for multiple runs")
      ->required();
  compare->add_option("--after", after, "Report JSON(s) of the normalized variant; repeat for multiple runs")
      ->required();
  compare->callback([&] {
    in_stage("compare", [&] {
      std::vector<VerificationReport> b, a;
      for (const auto& f : before) b.push_back(read_report_json(f));
      for (const auto& f : after) a.push_back(read_report_json(f));
      const ReportComparison c =
          (b.size() == 1 && a.size() == 1) ? compare_reports(b[0], a[0]) : compare_report_sets(b, a);
      const std::string json = comparison_to_json(std::span(&c, 1));
      fs::create_directories(g.out_dir);
      std::ofstream(fs::path(g.out_dir) / "comparison.json", std::ios::binary) << json << '\n';
      std::cout << json << '\n';
    });
  });

  // run
  std::string config_file;
  auto* run = app.add_subcommand("run", "Run a full experiment from a JSON config");
  run->add_option("--config", config_file, "Experiment config JSON")->required();
  run->callback([&] {
    ExperimentConfig cfg;
    in_stage("config", [&] { cfg = ExperimentConfig::load(config_file); });
    if (!app.get_option("--cache-dir")->empty()) cfg.cache_dir = g.cache_dir;
    if (!app.get_option("--out-dir")->empty()) cfg.output_dir = g.out_dir;
    if (g.seed_set) cfg.seed = g.seed;
    const auto art = run_experiment(cfg);
    std::cout << format_summary_table(art);
  });

  // synth
  SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "Write a synthetic noisy-copy dataset");
  synth->add_option("--subjects", spec.subjects, "Subjects (two eye classes each)");
  synth->add_option("--images", spec.images_per_class, "Images per class");
  synth->add_option("--size", spec.size, "Image side in pixels");
  synth->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma");
  synth->add_option("--constant-classes", spec.constant_classes, "Trailing flat-grey classes");
  synth->callback([&] {
    in_stage("synth", [&] {
      if (g.seed_set) spec.seed = g.seed;
      std::cout << make_synthetic_dataset(g.out_dir, spec).string() << '\n';
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: [internal] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
