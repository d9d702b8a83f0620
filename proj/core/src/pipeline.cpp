#include "gphmm/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "gphmm/error.hpp"
#include "gphmm/image_io.hpp"
#include "gphmm/phmm.hpp"

namespace gphmm {

namespace {

// Re-throws library errors with the failing stage and input attached, keeping the error class.
template <class F>
auto in_stage(const std::string& stage, const std::string& input, F&& f) -> decltype(f()) {
  const std::string prefix = stage + " [" + input + "]: ";
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  }
}

std::vector<SequenceView> views_of(const std::vector<const ObservationSequence*>& seqs) {
  std::vector<SequenceView> v;
  v.reserve(seqs.size());
  for (const auto* s : seqs) v.emplace_back(s->values);
  return v;
}

BaumWelchResult train_hmm(const std::vector<SequenceView>& views, const RunConfig& config) {
  const auto start = init_model(config.hmm.n_states, views, {config.hmm.var_floor_rel});
  BaumWelchOptions opts;
  opts.max_iters = config.hmm.max_iters;
  opts.tol = config.hmm.tol;
  opts.seed = config.seed;
  return baum_welch(start, views, opts);
}

}  // namespace

FeatureExtractor::FeatureExtractor(const RunConfig& config)
    : config_((config.validate(), config)),
      bank_(config.gabor.params, config.gabor.kernel_size),
      plan_(plan_sampling(config.image.width, config.image.height, config.sampling.block_k,
                          config.sampling.overlap_p, config.sampling.strip_h)),
      order_(scan_order(plan_, config.sampling.scan)),
      fingerprint_(feature_fingerprint(config)) {}

FeatureImage FeatureExtractor::feature_image(const Image& image) const {
  if (image.width() != config_.image.width || image.height() != config_.image.height) {
    return fuse(resize_bilinear(image, config_.image.width, config_.image.height), bank_,
                {config_.gabor.magnitude, config_.gabor.method});
  }
  return fuse(image, bank_, {config_.gabor.magnitude, config_.gabor.method});
}

ObservationSequence FeatureExtractor::sequence(const FeatureImage& gf, std::string source_id) const {
  return extract_observations(gf, plan_, order_, std::move(source_id),
                              {config_.features.fallback_scale});
}

ObservationSequence FeatureExtractor::sequence_for_file(const std::filesystem::path& path) const {
  const auto image = load_image(path, config_.image);
  return sequence(feature_image(image), path.generic_string());
}

TrainedSystem train_system(const std::vector<LabeledSequence>& train,
                           std::vector<std::string> class_ids, const RunConfig& config,
                           std::uint64_t fingerprint) {
  if (train.empty()) throw InvalidArgument("train_system: no training sequences");
  TrainedSystem sys;
  sys.class_ids = std::move(class_ids);
  sys.models.mode = config.hmm.mode;
  sys.models.fingerprint = fingerprint;

  if (config.hmm.mode == HmmMode::Shared) {
    std::vector<const ObservationSequence*> all;
    for (const auto& t : train) all.push_back(&t.sequence);
    auto result = train_hmm(views_of(all), config);
    sys.models.shared = std::move(result.model);
    sys.warnings = std::move(result.warnings);

    std::vector<ClassPaths> grouped(sys.class_ids.size());
    for (std::size_t k = 0; k < sys.class_ids.size(); ++k) grouped[k].class_id = sys.class_ids[k];
    std::vector<std::vector<double>> paths;
    paths.reserve(train.size());
    for (const auto& t : train) {
      paths.push_back(to_real(viterbi(sys.models.shared, t.sequence.values)));
      grouped.at(t.class_index).paths.push_back(paths.back());
    }
    FitOptions fo;
    fo.measure = config.classify.measure;
    fo.covariance = config.classify.covariance;
    fo.ridge = config.classify.ridge;
    fo.var_floor = config.classify.var_floor;
    sys.classifier = fit(grouped, fo);
    for (std::size_t i = 0; i < train.size(); ++i) {
      sys.self_scores.push_back(sys.classifier->score(paths[i], train[i].class_index));
    }
  } else {
    for (std::size_t k = 0; k < sys.class_ids.size(); ++k) {
      std::vector<const ObservationSequence*> mine;
      for (const auto& t : train) {
        if (t.class_index == k) mine.push_back(&t.sequence);
      }
      if (mine.empty()) throw InvalidArgument("train_system: class '" + sys.class_ids[k] + "' has no training data");
      auto result = train_hmm(views_of(mine), config);
      for (auto& w : result.warnings) sys.warnings.push_back(sys.class_ids[k] + ": " + w);
      sys.models.per_class.emplace_back(sys.class_ids[k], std::move(result.model));
    }
    for (const auto& t : train) {
      sys.self_scores.push_back(
          -forward_log_likelihood(sys.models.per_class[t.class_index].second, t.sequence.values));
    }
  }
  return sys;
}

std::vector<double> score_sequence(const TrainedSystem& system, const ObservationSequence& seq) {
  std::vector<double> scores;
  if (system.models.mode == HmmMode::Shared) {
    const auto path = to_real(viterbi(system.models.shared, seq.values));
    for (std::size_t k = 0; k < system.classifier->classes().size(); ++k) {
      scores.push_back(system.classifier->score(path, k));
    }
  } else {
    for (const auto& [id, model] : system.models.per_class) {
      scores.push_back(-forward_log_likelihood(model, seq.values));
    }
  }
  return scores;
}

double resolve_tau(const TrainedSystem& system, const RunConfig& config) {
  if (config.eval.tau) return *config.eval.tau;
  return config.eval.tau_scale * calibrate_tau(system.self_scores, config.eval.tau_percentile);
}

PipelineArtifacts run_pipeline(const Manifest& manifest, const RunConfig& config,
                               const std::optional<std::filesystem::path>& out_dir) {
  in_stage("config", "run config", [&] { config.validate(); });
  in_stage("manifest", "entries", [&] { manifest.validate(); });

  const FeatureExtractor extractor(config);
  PipelineArtifacts out;
  const auto class_ids = manifest.classes();
  std::map<std::string, std::size_t> class_index;
  for (std::size_t k = 0; k < class_ids.size(); ++k) class_index[class_ids[k]] = k;

  out.sequences.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    out.sequences.push_back(in_stage("extract", e.path.string(),
                                     [&] { return extractor.sequence_for_file(e.path); }));
  }

  std::vector<LabeledSequence> train;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.role == ProbeRole::Train) train.push_back({out.sequences[i], class_index.at(e.class_id)});
  }
  out.system = in_stage("train", std::to_string(train.size()) + " sequences", [&] {
    return train_system(train, class_ids, config, extractor.fingerprint());
  });

  std::vector<ProbeOutcome> probes;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.role == ProbeRole::Train) continue;
    ProbeOutcome p;
    p.id = e.path.generic_string();
    p.role = e.role;
    p.class_index = class_index.at(e.class_id);
    p.scores = in_stage("classify", e.path.string(),
                        [&] { return score_sequence(out.system, out.sequences[i]); });
    probes.push_back(std::move(p));
  }

  const double tau = resolve_tau(out.system, config);
  out.report = build_report(class_ids, std::move(probes), tau, config.eval.negative_rule);
  out.report_json = encode_report(out.report, config);

  if (out_dir) {
    in_stage("write", out_dir->string(), [&] {
      const std::string model_text = encode_models(out.system.models);
      write_file(*out_dir / "model.json", model_text);
      if (out.system.classifier) {
        save_classifier(*out_dir / "classifier.json", *out.system.classifier, extractor.fingerprint(),
                        fnv1a(model_text));
      }
      write_file(*out_dir / "report.json", out.report_json);
      write_file(*out_dir / "report.txt", render_table(out.report));
      write_file(*out_dir / "probes.csv", encode_probe_csv(out.report));
      std::vector<double> taus = out.system.self_scores;
      for (const auto& p : out.report.probes) taus.push_back(p.scores[p.best()]);
      std::sort(taus.begin(), taus.end());
      taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
      write_file(*out_dir / "tau_sweep.csv",
                 encode_tau_sweep_csv(out.report, taus, config.eval.negative_rule));
      for (std::size_t i = 0; i < out.sequences.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%05zu.csv", i);
        write_sequence_csv(*out_dir / "sequences" / name, out.sequences[i], extractor.fingerprint());
      }
    });
  }
  return out;
}

}  // namespace gphmm
