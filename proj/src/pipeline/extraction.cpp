#include <array>
#include <iostream>
#include <sstream>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"
#include "util/csv.hpp"
#include "util/hash.hpp"
#include "util/parallel.hpp"

namespace periocular {

namespace {

constexpr std::array<std::pair<std::string_view, Preset>, 4> kPresets{{
    {"park", Preset::park},
    {"ahmed", Preset::ahmed},
    {"proposed_fusion", Preset::proposed_fusion},
    {"deep", Preset::deep}}};

std::string box_string(const Rect& r) {
  return csv::format_double(r.x) + "," + csv::format_double(r.y) + "," + csv::format_double(r.w) + "," +
         csv::format_double(r.h);
}

// Other-eye record of the same source image, when both carry iris boxes.
const SampleRecord* alignment_partner(const SampleRecord& record, const Manifest& m) {
  if (!record.iris_box) return nullptr;
  for (const auto& s : m.samples) {
    if (&s == &record || s.variant != record.variant || s.image_path != record.image_path) continue;
    if (s.eye != record.eye && s.iris_box) return &s;
  }
  return nullptr;
}

std::string preparation_descriptor(const SampleRecord& record, const Manifest& m, const FeatureOptions& o,
                                   const std::string& matcher) {
  std::ostringstream d;
  d << "out=" << o.alignment.out_size << ";frac=" << csv::format_double(o.alignment.inter_iris_fraction)
    << ";intensity=" << (o.intensity == IntensityMode::max_channel ? "max" : "luma");
  if (matcher == "lbp" || matcher == "lpq") d << ";grid=" << o.patch_rows << "x" << o.patch_cols;
  if (const auto* partner = alignment_partner(record, m))
    d << ";eye=" << to_string(record.eye) << ";box=" << box_string(*record.iris_box)
      << ";partner=" << box_string(*partner->iris_box);
  return d.str();
}

bool is_keypoint_matcher(const std::string& matcher) { return matcher == "sift"; }

}  // namespace

std::string_view to_string(Preset p) {
  for (const auto& [name, value] : kPresets)
    if (value == p) return name;
  return "?";
}

Preset parse_preset(std::string_view s) {
  for (const auto& [name, value] : kPresets)
    if (name == s) return value;
  throw InvalidArgument("unknown preset '" + std::string(s) + "' (expected park, ahmed, proposed_fusion or deep)");
}

std::vector<std::string> preset_matchers(Preset p) {
  switch (p) {
    case Preset::park: return {"lbp", "hog", "sift"};
    case Preset::ahmed: return {"mbtlbp"};
    case Preset::proposed_fusion: return {"lbp", "lpq", "hog", "sift"};
    case Preset::deep: return {"deep"};
  }
  return {};
}

std::string FeatureOptions::extractor_id(const std::string& matcher) const {
  if (matcher == "lbp") return lbp.id();
  if (matcher == "lpq") return lpq.id();
  if (matcher == "hog") return hog.id();
  if (matcher == "sift") return sift.id();
  if (matcher == "mbtlbp") return mbtlbp.id();
  if (matcher == "deep") return "deep-" + std::to_string(kEmbeddingDims);
  throw InvalidArgument("unknown matcher '" + matcher + "'");
}

GrayImage prepare_sample_image(const SampleRecord& record, const Manifest& m, const FeatureOptions& options) {
  const GrayImage img = read_gray(record.image_path, options.intensity);
  const int size = options.alignment.out_size;
  if (const auto* partner = alignment_partner(record, m)) {
    const Rect& left = record.eye == EyeSide::left ? *record.iris_box : *partner->iris_box;
    const Rect& right = record.eye == EyeSide::left ? *partner->iris_box : *record.iris_box;
    auto eyes = align_and_crop(img, left, right, options.alignment);
    return record.eye == EyeSide::left ? std::move(eyes.left_eye) : std::move(eyes.right_eye);
  }
  if (img.width() == size && img.height() == size) return img;
  return resize(img, size, size);
}

FeatureMap extract_all(const Manifest& m, Preset preset, const std::filesystem::path& cache_dir,
                       const FeatureOptions& options, ExtractionStats* stats) {
  const auto matchers = preset_matchers(preset);
  const std::optional<FeatureCache> cache =
      cache_dir.empty() ? std::nullopt : std::optional<FeatureCache>(FeatureCache(cache_dir));

  std::vector<SampleFeatures> results(m.samples.size());
  std::vector<ExtractionStats> local(m.samples.size());

  parallel::for_each_index(m.samples.size(), options.workers, [&](std::size_t i) {
    const SampleRecord& record = m.samples[i];
    SampleFeatures& out = results[i];
    ExtractionStats& st = local[i];

    if (preset == Preset::deep) {
      if (options.embedding_dir.empty()) throw InvalidArgument("deep preset needs an embedding directory");
      const auto path = options.embedding_dir / std::string(to_string(record.variant)) / (record.sample_id + ".pemb");
      out.dense["deep"] = load_embedding(path);
      ++st.computed;
      ++st.computed_by_matcher["deep"];
      return;
    }

    std::string image_digest;
    if (cache) image_digest = hash::to_hex(hash::sha256_file(record.image_path));
    std::map<std::string, std::string> keys;
    std::vector<std::string> missing;
    for (const auto& matcher : matchers) {
      const auto extractor = options.extractor_id(matcher);
      if (!cache) {
        missing.push_back(matcher);
        continue;
      }
      hash::Sha256 h;
      h.update("periocular-feature-v1|").update(record.sample_id).update("|").update(extractor).update("|");
      h.update(image_digest).update("|").update(preparation_descriptor(record, m, options, matcher));
      const auto key = hash::to_hex(h.finish());
      keys[matcher] = key;

      FeatureCache::Lookup lookup;
      if (is_keypoint_matcher(matcher)) {
        KeypointSet ks;
        lookup = cache->load(record.sample_id, extractor, key, ks);
        if (lookup == FeatureCache::Lookup::hit) out.keypoints = std::move(ks);
      } else {
        FeatureVector fv;
        lookup = cache->load(record.sample_id, extractor, key, fv);
        if (lookup == FeatureCache::Lookup::hit) out.dense[matcher] = std::move(fv);
      }
      if (lookup == FeatureCache::Lookup::hit) {
        ++st.cache_hits;
        continue;
      }
      if (lookup == FeatureCache::Lookup::corrupt) {
        ++st.corrupt_recomputed;
        std::cerr << "warning: corrupt cache entry "
                  << cache->entry_path(record.sample_id, extractor, key).string() << "; recomputing\n";
      }
      missing.push_back(matcher);
    }
    if (missing.empty()) return;

    const GrayImage img = prepare_sample_image(record, m, options);
    std::optional<PatchGrid> grid;
    for (const auto& matcher : missing) {
      if ((matcher == "lbp" || matcher == "lpq") && !grid)
        grid = tile_patches(img, options.patch_rows, options.patch_cols);
      if (matcher == "sift") {
        out.keypoints = extract_sift(img, options.sift);
        if (cache) cache->store(record.sample_id, options.extractor_id(matcher), keys.at(matcher), *out.keypoints);
      } else {
        FeatureVector fv;
        if (matcher == "lbp") fv = extract_lbp(*grid, options.lbp);
        else if (matcher == "lpq") fv = extract_lpq(*grid, options.lpq);
        else if (matcher == "hog") fv = extract_hog(img, options.hog);
        else if (matcher == "mbtlbp") fv = extract_mbtlbp(img, options.mbtlbp);
        else throw InvalidArgument("unknown matcher '" + matcher + "'");
        if (cache) cache->store(record.sample_id, options.extractor_id(matcher), keys.at(matcher), fv);
        out.dense[matcher] = std::move(fv);
      }
      ++st.computed;
      ++st.computed_by_matcher[matcher];
    }
  });

  FeatureMap features;
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    features[m.samples[i].sample_id] = std::move(results[i]);
    if (stats) {
      stats->computed += local[i].computed;
      stats->cache_hits += local[i].cache_hits;
      stats->corrupt_recomputed += local[i].corrupt_recomputed;
      for (const auto& [k, v] : local[i].computed_by_matcher) stats->computed_by_matcher[k] += v;
    }
  }
  return features;
}

ScoreTable score_pairs(const PairList& pairs, const FeatureMap& features, Preset preset,
                       const MatchOptions& options) {
  ScoreTable table;
  table.pairs = pairs;
  table.matcher_ids = preset_matchers(preset);
  table.columns.assign(table.matcher_ids.size(), std::vector<double>(pairs.pairs.size(), 0.0));

  std::vector<const SampleFeatures*> by_index(pairs.sample_ids.size(), nullptr);
  for (std::size_t i = 0; i < pairs.sample_ids.size(); ++i) {
    auto it = features.find(pairs.sample_ids[i]);
    if (it == features.end()) throw InvalidArgument("no features for sample '" + pairs.sample_ids[i] + "'");
    by_index[i] = &it->second;
  }

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (pairs.pairs.size() + kChunk - 1) / kChunk;
  parallel::for_each_index(chunks, options.workers, [&](std::size_t c) {
    const std::size_t end = std::min(pairs.pairs.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const auto& fa = *by_index[pairs.pairs[i].a];
      const auto& fb = *by_index[pairs.pairs[i].b];
      for (std::size_t m = 0; m < table.matcher_ids.size(); ++m) {
        const auto& matcher = table.matcher_ids[m];
        double score = 0.0;
        if (matcher == "sift") {
          if (!fa.keypoints || !fb.keypoints) throw InvalidArgument("missing SIFT keypoints");
          score = options.sift_symmetric ? sift_match_score_symmetric(*fa.keypoints, *fb.keypoints, options.sift_ratio)
                                         : sift_match_score(*fa.keypoints, *fb.keypoints, options.sift_ratio);
        } else {
          const auto& va = fa.dense.at(matcher).values;
          const auto& vb = fb.dense.at(matcher).values;
          const bool zero_a = std::all_of(va.begin(), va.end(), [](double v) { return v == 0.0; });
          const bool zero_b = std::all_of(vb.begin(), vb.end(), [](double v) { return v == 0.0; });
          score = (zero_a || zero_b) ? 0.0 : cosine_similarity(va, vb);
        }
        table.columns[m][i] = score;
      }
    }
  });
  return table;
}

}  // namespace periocular
