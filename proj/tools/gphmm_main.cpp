// gphmm: command line front end for the face identification pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "gphmm/artifacts.hpp"
#include "gphmm/error.hpp"
#include "gphmm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gphmm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Relative output paths land under $GPHMM_OUT_DIR when it is set.
fs::path out_path(const std::string& p) {
  const fs::path path(p);
  const char* dir = std::getenv("GPHMM_OUT_DIR");
  if (path.is_absolute() || dir == nullptr || *dir == '\0') return path;
  return fs::path(dir) / path;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string in, out, config, pgm, manifest, model, classifier, id;
  std::string out_model = "model.json", out_classifier = "classifier.json";
  std::string report = "report.json";
  std::string table, probes, sweep, artifacts, root;
  bool dump = false;
  std::size_t n_train = 1, n_negatives = 0;
  std::uint64_t seed = 0;
};

void cmd_gabor(const Options& o) {
  const FeatureExtractor fx(config_or_default(o.config));
  const auto gf = fx.feature_image(load_image(o.in, fx.config().image));
  write_feature_image(out_path(o.out), gf, fx.fingerprint());
  if (!o.pgm.empty()) export_feature_pgm(out_path(o.pgm), gf);
}

void cmd_plan(const Options& o) {
  const FeatureExtractor fx(config_or_default(o.config));
  const auto& plan = fx.plan();
  if (!o.dump) {
    std::cout << "image " << plan.image_w << "x" << plan.image_h << ", block " << plan.block_k
              << ", overlap " << plan.overlap_p << ", strip " << plan.strip_h << "\n"
              << "strips " << plan.n_strips << ", block rows " << plan.n_block_rows()
              << ", blocks per row " << plan.blocks_per_row << ", T " << plan.T() << "\n";
    return;
  }
  std::cout << "index,x0,y0\n";
  for (std::size_t t = 0; t < fx.order().size(); ++t) {
    const auto& b = plan.blocks[fx.order()[t]];
    std::cout << t << "," << b.x0 << "," << b.y0 << "\n";
  }
}

void cmd_extract(const Options& o) {
  const FeatureExtractor fx(config_or_default(o.config));
  std::uint64_t fp = 0;
  const auto gf = read_feature_image(o.in, &fp);
  if (fp != fx.fingerprint()) {
    throw DataError(o.in + ": config fingerprint mismatch (file " + fingerprint_hex(fp) +
                    ", config " + fingerprint_hex(fx.fingerprint()) + ")");
  }
  const auto seq = fx.sequence(gf, o.id.empty() ? o.in : o.id);
  write_sequence_csv(out_path(o.out), seq, fx.fingerprint());
}

void cmd_train(const Options& o) {
  const auto config = config_or_default(o.config);
  const auto manifest = load_manifest(o.manifest);
  manifest.validate();
  const FeatureExtractor fx(config);
  const auto class_ids = manifest.classes();
  std::vector<LabeledSequence> train;
  for (const auto& e : manifest.entries) {
    if (e.role != ProbeRole::Train) continue;
    const auto k = static_cast<std::size_t>(
        std::find(class_ids.begin(), class_ids.end(), e.class_id) - class_ids.begin());
    train.push_back({fx.sequence_for_file(e.path), k});
  }
  const auto sys = train_system(train, class_ids, config, fx.fingerprint());
  for (const auto& w : sys.warnings) std::cerr << "warning: " << w << "\n";
  const std::string model_text = encode_models(sys.models);
  write_file(out_path(o.out_model), model_text);
  if (sys.classifier) {
    save_classifier(out_path(o.out_classifier), *sys.classifier, fx.fingerprint(), fnv1a(model_text));
  }
}

void cmd_classify(const Options& o) {
  const auto config = config_or_default(o.config);
  const FeatureExtractor fx(config);
  const std::string model_text = read_file(o.model);
  TrainedSystem sys;
  sys.models = decode_models(model_text, o.model, fx.fingerprint());
  if (sys.models.mode == HmmMode::Shared) {
    if (o.classifier.empty()) throw InvalidArgument("classify: --classifier is required for a shared model");
    sys.classifier = load_classifier(o.classifier, fx.fingerprint(), fnv1a(model_text));
    for (const auto& c : sys.classifier->classes()) sys.class_ids.push_back(c.class_id);
  } else {
    for (const auto& [id, m] : sys.models.per_class) sys.class_ids.push_back(id);
  }
  const auto scores = score_sequence(sys, fx.sequence_for_file(o.in));
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] < scores[best]) best = k;
  }
  std::cout << sys.class_ids[best] << "\n" << "class,score\n";
  for (std::size_t k = 0; k < scores.size(); ++k) std::cout << sys.class_ids[k] << "," << fmt(scores[k]) << "\n";
}

void cmd_eval(const Options& o) {
  const auto config = config_or_default(o.config);
  const auto manifest = load_manifest(o.manifest);
  std::optional<fs::path> artifacts;
  if (!o.artifacts.empty()) artifacts = out_path(o.artifacts);
  const auto result = run_pipeline(manifest, config, artifacts);
  for (const auto& w : result.system.warnings) std::cerr << "warning: " << w << "\n";
  write_file(out_path(o.report), result.report_json);
  const std::string table = render_table(result.report);
  if (o.table.empty()) {
    std::cout << table;
  } else {
    write_file(out_path(o.table), table);
  }
  if (!o.probes.empty()) write_file(out_path(o.probes), encode_probe_csv(result.report));
  if (!o.sweep.empty()) {
    std::vector<double> taus = result.system.self_scores;
    for (const auto& p : result.report.probes) taus.push_back(p.scores[p.best()]);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    write_file(out_path(o.sweep), encode_tau_sweep_csv(result.report, taus, config.eval.negative_rule));
  }
}

void cmd_manifest(const Options& o) {
  const auto m = make_split_manifest(o.root, {o.n_train, o.n_negatives, o.seed});
  const std::string text = encode_manifest(m);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(out_path(o.out), text);
  }
}

void cmd_config(const Options& o) {
  const auto text = config_to_json(config_or_default(o.config));
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(out_path(o.out), text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gabor feature + cyclic HMM face identification"};
  app.require_subcommand(1);
  Options o;

  auto* gabor = app.add_subcommand("gabor", "Compute the fused Gabor feature image of one image");
  gabor->add_option("--in", o.in, "Input image (PGM or PNG)")->required()->check(CLI::ExistingFile);
  gabor->add_option("--out", o.out, "Output feature image (.gfi)")->required();
  gabor->add_option("--pgm", o.pgm, "Also write a min-max normalized PGM preview");
  gabor->add_option("--config", o.config, "Run config (JSON)");

  auto* plan = app.add_subcommand("plan", "Show the block sampling plan");
  plan->add_option("--config", o.config, "Run config (JSON)");
  plan->add_flag("--dump", o.dump, "Print every block as CSV (index,x0,y0) in scan order");

  auto* extract = app.add_subcommand("extract", "Turn a feature image into an observation sequence");
  extract->add_option("--in", o.in, "Feature image (.gfi)")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", o.out, "Output sequence CSV")->required();
  extract->add_option("--config", o.config, "Run config (JSON)");
  extract->add_option("--id", o.id, "Source id recorded in the sequence header");

  auto* train = app.add_subcommand("train", "Train the HMM and classifier on a manifest's train entries");
  train->add_option("--manifest", o.manifest, "Dataset manifest (JSONL)")->required()->check(CLI::ExistingFile);
  train->add_option("--config", o.config, "Run config (JSON)");
  train->add_option("--out-model", o.out_model, "Model output")->capture_default_str();
  train->add_option("--out-classifier", o.out_classifier, "Classifier output (shared mode)")->capture_default_str();

  auto* classify = app.add_subcommand("classify", "Classify one image");
  classify->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  classify->add_option("--classifier", o.classifier, "Classifier file (shared mode)");
  classify->add_option("--in", o.in, "Input image")->required()->check(CLI::ExistingFile);
  classify->add_option("--config", o.config, "Run config (JSON)");

  auto* eval = app.add_subcommand("eval", "Run the full protocol on a manifest and write a report");
  eval->add_option("--manifest", o.manifest, "Dataset manifest (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", o.config, "Run config (JSON)");
  eval->add_option("--out", o.report, "Report JSON")->capture_default_str();
  eval->add_option("--table", o.table, "Write the text table here instead of stdout");
  eval->add_option("--probes", o.probes, "Per-probe decision CSV");
  eval->add_option("--sweep", o.sweep, "Tau sweep CSV");
  eval->add_option("--artifacts", o.artifacts, "Directory for model, classifier and sequences");

  auto* manifest = app.add_subcommand("manifest", "Build a manifest from a subject-per-directory dataset");
  manifest->add_option("--root", o.root, "Dataset root")->required();
  manifest->add_option("--train", o.n_train, "Training images per subject")->capture_default_str();
  manifest->add_option("--negatives", o.n_negatives, "Negative probes per class")->capture_default_str();
  manifest->add_option("--seed", o.seed, "Seed for drawing negatives")->capture_default_str();
  manifest->add_option("--out", o.out, "Output manifest (stdout when omitted)");

  auto* config = app.add_subcommand("config", "Print the effective config (defaults when --config is omitted)");
  config->add_option("--config", o.config, "Run config (JSON)");
  config->add_option("--out", o.out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gabor) cmd_gabor(o);
    else if (*plan) cmd_plan(o);
    else if (*extract) cmd_extract(o);
    else if (*train) cmd_train(o);
    else if (*classify) cmd_classify(o);
    else if (*eval) cmd_eval(o);
    else if (*manifest) cmd_manifest(o);
    else if (*config) cmd_config(o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
