#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"

namespace periocular {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Runs one stage, tagging any toolkit or library failure with the stage name.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string_view intensity_name(IntensityMode m) { return m == IntensityMode::luma ? "luma" : "max_channel"; }

IntensityMode parse_intensity(const std::string& s) {
  if (s == "max_channel") return IntensityMode::max_channel;
  if (s == "luma") return IntensityMode::luma;
  throw FormatError("unknown intensity mode '" + s + "'");
}

std::optional<double> finite_d(const VerificationReport& r) {
  if (r.decidability_state != DecidabilityState::finite) return std::nullopt;
  return r.decidability;
}

}  // namespace

std::string_view to_string(VariantSelection v) {
  switch (v) {
    case VariantSelection::original: return "original";
    case VariantSelection::normalized: return "normalized";
    case VariantSelection::both: return "both";
  }
  return "?";
}

VariantSelection parse_variant_selection(std::string_view s) {
  if (s == "original") return VariantSelection::original;
  if (s == "normalized") return VariantSelection::normalized;
  if (s == "both") return VariantSelection::both;
  throw InvalidArgument("unknown variant selection '" + std::string(s) + "' (expected original, normalized or both)");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const fs::path& base_dir) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "manifest_path") c.manifest_path = resolve(base_dir, v.get<std::string>());
      else if (key == "variant_under_test") c.variant_under_test = parse_variant_selection(v.get<std::string>());
      else if (key == "normalizer_command") {
        if (!v.is_null()) c.normalizer_command = v.get<std::string>();
      } else if (key == "preset") c.preset = parse_preset(v.get<std::string>());
      else if (key == "fusion_weights") c.fusion_weights = v.get<std::vector<double>>();
      else if (key == "attribute") c.attribute = parse_attribute(v.get<std::string>());
      else if (key == "attribute_differing_only") c.attribute_differing_only = v.get<bool>();
      else if (key == "split_fraction") {
        c.split_fraction = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      } else if (key == "split_ordering") c.split_ordering = parse_subject_ordering(v.get<std::string>());
      else if (key == "cache_dir") c.cache_dir = v.is_null() ? fs::path() : resolve(base_dir, v.get<std::string>());
      else if (key == "output_dir") c.output_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "embedding_dir") c.features.embedding_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "sift_ratio") c.matching.sift_ratio = v.get<double>();
      else if (key == "sift_symmetric") c.matching.sift_symmetric = v.get<bool>();
      else if (key == "workers") c.features.workers = c.matching.workers = v.get<int>();
      else if (key == "out_size") c.features.alignment.out_size = v.get<int>();
      else if (key == "inter_iris_fraction") c.features.alignment.inter_iris_fraction = v.get<double>();
      else if (key == "intensity") c.features.intensity = parse_intensity(v.get<std::string>());
      else if (key == "lbp_radius") c.features.lbp.radius = v.get<double>();
      else if (key == "lpq_window") c.features.lpq.window = v.get<int>();
      else if (key == "lpq_decorrelate") c.features.lpq.decorrelate = v.get<bool>();
      else if (key == "hog_resize") c.features.hog.resize_to = v.get<int>();
      else if (key == "mbtlbp_block") c.features.mbtlbp.block = v.get<int>();
      else throw FormatError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (c.manifest_path.empty()) throw FormatError("config: manifest_path is required");
  if (c.split_fraction && !(*c.split_fraction > 0.0 && *c.split_fraction < 1.0))
    throw FormatError("config: split_fraction must lie in (0, 1)");
  if (!(c.matching.sift_ratio > 0.0 && c.matching.sift_ratio < 1.0))
    throw FormatError("config: sift_ratio must lie in (0, 1)");
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

std::string ExperimentConfig::to_json() const {
  ojson j;
  j["manifest_path"] = manifest_path.generic_string();
  j["variant_under_test"] = std::string(periocular::to_string(variant_under_test));
  j["normalizer_command"] = normalizer_command ? ojson(*normalizer_command) : ojson(nullptr);
  j["preset"] = std::string(periocular::to_string(preset));
  j["fusion_weights"] = fusion_weights;
  j["attribute"] = std::string(periocular::to_string(attribute));
  j["attribute_differing_only"] = attribute_differing_only;
  j["split_fraction"] = split_fraction ? ojson(*split_fraction) : ojson(nullptr);
  j["split_ordering"] = std::string(periocular::to_string(split_ordering));
  j["cache_dir"] = cache_dir.empty() ? ojson(nullptr) : ojson(cache_dir.generic_string());
  j["output_dir"] = output_dir.generic_string();
  j["seed"] = seed;
  if (!features.embedding_dir.empty()) j["embedding_dir"] = features.embedding_dir.generic_string();
  j["sift_ratio"] = matching.sift_ratio;
  j["sift_symmetric"] = matching.sift_symmetric;
  j["out_size"] = features.alignment.out_size;
  j["inter_iris_fraction"] = features.alignment.inter_iris_fraction;
  j["intensity"] = std::string(intensity_name(features.intensity));
  j["lbp_radius"] = features.lbp.radius;
  j["lpq_window"] = features.lpq.window;
  j["lpq_decorrelate"] = features.lpq.decorrelate;
  j["hog_resize"] = features.hog.resize_to;
  j["mbtlbp_block"] = features.mbtlbp.block;
  return j.dump(2);
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  RunArtifacts art;
  art.output_dir = cfg.output_dir;
  const auto matchers = preset_matchers(cfg.preset);

  const Manifest full = stage("load", [&] {
    if (!cfg.cache_dir.empty()) fs::create_directories(cfg.cache_dir);
    fs::create_directories(cfg.output_dir);
    ManifestOptions opts;
    opts.attribute = cfg.attribute;
    return load_manifest(cfg.manifest_path, opts);
  });

  const Manifest eval = stage("split", [&] {
    Manifest original = select_variant(full, Variant::original);
    if (original.samples.empty()) throw InvalidArgument("manifest has no original-variant samples");
    if (!cfg.split_fraction) return original;
    auto split = split_subjects(original, *cfg.split_fraction, cfg.split_ordering);
    write_manifest(split.train, cfg.output_dir / "split" / "train.csv");
    write_manifest(split.eval, cfg.output_dir / "split" / "eval.csv");
    if (split.eval.samples.empty()) throw InvalidArgument("evaluation split is empty");
    return split.eval;
  });

  std::vector<std::pair<Variant, Manifest>> variants;
  if (cfg.variant_under_test != VariantSelection::normalized) variants.emplace_back(Variant::original, eval);
  if (cfg.variant_under_test != VariantSelection::original) {
    Manifest normalized = stage("normalize", [&] {
      if (cfg.normalizer_command) return normalize_batch(eval, *cfg.normalizer_command, cfg.output_dir / "normalizer");
      // pre-normalised images listed in the manifest itself
      Manifest m;
      m.dataset_name = eval.dataset_name;
      m.attribute_of_interest = eval.attribute_of_interest;
      std::vector<std::string> missing;
      for (const auto& s : eval.samples) {
        if (const auto* rec = full.find(s.sample_id, Variant::normalized)) m.samples.push_back(*rec);
        else missing.push_back(s.sample_id);
      }
      if (!missing.empty()) {
        std::string msg = "no normalizer command and " + std::to_string(missing.size()) +
                          " sample(s) lack a normalized record, e.g. '" + missing.front() + "'";
        throw InvalidArgument(msg);
      }
      return m;
    });
    variants.emplace_back(Variant::normalized, std::move(normalized));
  }

  art.pairs = stage("pairs", [&] { return generate_pairs(eval, cfg.attribute_differing_only); });
  art.pair_list = cfg.output_dir / "pairs.csv";
  stage("pairs", [&] { write_pair_list(art.pairs, art.pair_list); });

  const FusionConfig fusion = stage("fuse", [&] {
    FusionConfig f = cfg.fusion_weights.empty() ? FusionConfig::uniform(matchers)
                                                : FusionConfig{matchers, cfg.fusion_weights};
    f.validate();
    return f;
  });

  for (const auto& [variant, manifest] : variants) {
    const std::string vname(to_string(variant));
    const fs::path vdir = cfg.output_dir / vname;

    ExtractionStats stats;
    const FeatureMap features =
        stage("extract", [&] { return extract_all(manifest, cfg.preset, cfg.cache_dir, cfg.features, &stats); });
    art.extraction[variant] = stats;

    ScoreTable table = stage("match", [&] {
      PairList pairs = art.pairs;
      pairs.protocol.variant = variant;
      return score_pairs(pairs, features, cfg.preset, cfg.matching);
    });
    art.score_files[variant] = vdir / "scores.csv";
    stage("match", [&] { write_scores_long(table, art.score_files[variant]); });

    stage("fuse", [&] {
      table.fused = fuse_columns(table, fusion);
      art.fused_files[variant] = vdir / "fused.csv";
      write_fused(table, art.fused_files[variant]);
    });

    stage("report", [&] {
      std::vector<std::string> ids = matchers;
      ids.push_back("fused");
      for (const auto& id : ids) {
        const ScoreSet s = score_set(table, id);
        VerificationReport r = build_report(s, id, variant);
        const fs::path base = vdir / "reports" / id;
        write_report_json(r, fs::path(base) += ".json");
        write_roc_csv(r, fs::path(base) += ".roc.csv");
        write_report_svg(r, s, fs::path(base) += ".svg");
        art.report_files[{id, variant}] = fs::path(base) += ".json";
        art.reports[{id, variant}] = std::move(r);
      }
    });
  }

  stage("report", [&] {
    if (variants.size() == 2) {
      std::vector<std::string> ids = matchers;
      ids.push_back("fused");
      for (const auto& id : ids)
        art.comparisons.push_back(
            compare_reports(art.reports.at({id, Variant::original}), art.reports.at({id, Variant::normalized})));
      art.comparison_file = cfg.output_dir / "comparison.json";
      write_text(art.comparison_file, comparison_to_json(art.comparisons) + "\n");
    }

    ojson summary;
    summary["config"] = ojson::parse(cfg.to_json());
    summary["config"].erase("cache_dir");  // keeps artifacts identical with or without a cache
    summary["pairs"] = ojson{{"genuine", art.pairs.count(PairLabel::genuine)},
                             {"impostor", art.pairs.count(PairLabel::impostor)}};
    ojson results = ojson::array();
    for (const auto& [key, r] : art.reports) {
      const auto d = finite_d(r);
      results.push_back(ojson{{"matcher_id", key.first},
                              {"variant", std::string(to_string(key.second))},
                              {"auc", r.auc},
                              {"auc_percent", format_auc_percent(r.auc)},
                              {"decidability", d ? ojson(*d) : ojson(nullptr)},
                              {"eer", r.eer}});
    }
    summary["results"] = std::move(results);
    art.summary_file = cfg.output_dir / "summary.json";
    write_text(art.summary_file, summary.dump(2) + "\n");
    write_text(cfg.output_dir / "summary.txt", format_summary_table(art));
  });
  return art;
}

std::string format_summary_table(const RunArtifacts& art) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "method" << std::setw(12) << "variant" << std::right << std::setw(9) << "AUC(%)"
     << std::setw(14) << "decidability" << std::setw(10) << "EER" << '\n';
  for (const auto& [key, r] : art.reports) {
    std::ostringstream d;
    if (r.decidability_state == DecidabilityState::finite)
      d << std::fixed << std::setprecision(4) << r.decidability;
    else
      d << (r.decidability_state == DecidabilityState::infinite ? "inf" : "n/a");
    std::ostringstream e;
    e << std::fixed << std::setprecision(4) << r.eer;
    os << std::left << std::setw(10) << key.first << std::setw(12) << to_string(key.second) << std::right
       << std::setw(9) << format_auc_percent(r.auc) << std::setw(14) << d.str() << std::setw(10) << e.str() << '\n';
  }
  for (const auto& c : art.comparisons) {
    os << c.matcher_id << ": decidability ";
    if (c.decidability.percent) os << (*c.decidability.percent >= 0 ? "+" : "") << *c.decidability.percent << "%";
    else os << "n/a";
    os << ", AUC ";
    if (c.auc.percent) os << (*c.auc.percent >= 0 ? "+" : "") << *c.auc.percent << "%";
    else os << "n/a";
    os << '\n';
  }
  return os.str();
}

}  // namespace periocular
