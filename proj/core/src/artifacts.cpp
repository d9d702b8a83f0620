#include "gphmm/artifacts.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

#include "gphmm/error.hpp"
#include "gphmm/image_io.hpp"

namespace gphmm {

using nlohmann::json;

namespace {

json parse(std::string_view text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("cannot parse " + name + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& name) {
  if (!j.contains(key)) throw DataError(name + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(name + ": bad field '" + key + "': " + e.what());
  }
}

void check_version(const json& j, int expected, const std::string& name) {
  const int v = field<int>(j, "version", name);
  if (v != expected) {
    throw DataError(name + ": unsupported version " + std::to_string(v) + " (expected " +
                    std::to_string(expected) + ")");
  }
}

void check_fingerprint(std::uint64_t actual, std::optional<std::uint64_t> expected,
                       const std::string& name) {
  if (expected && *expected != actual) {
    throw DataError(name + ": config fingerprint mismatch (artifact " + fingerprint_hex(actual) +
                    ", current config " + fingerprint_hex(*expected) +
                    "); it was produced with different Gabor/sampling/feature settings");
  }
}

json hmm_json(const CyclicHMM& m) {
  return {{"n_states", m.n_states()}, {"trans", m.transitions()}, {"emit_mean", m.emit_mean()},
          {"emit_var", m.emit_var()}, {"init", m.init()},         {"var_floor", m.var_floor()}};
}

CyclicHMM hmm_from_json(const json& j, const std::string& name) {
  try {
    return CyclicHMM(field<std::size_t>(j, "n_states", name),
                     field<std::vector<double>>(j, "trans", name),
                     field<std::vector<double>>(j, "emit_mean", name),
                     field<std::vector<double>>(j, "emit_var", name),
                     field<std::vector<double>>(j, "init", name), field<double>(j, "var_floor", name));
  } catch (const InvalidArgument& e) {
    throw DataError(name + ": invalid model: " + e.what());
  }
}

json ratio_json(const std::optional<Ratio>& r) {
  if (!r) return nullptr;
  return {{"num", r->num}, {"den", r->den}, {"value", r->value()}, {"percent", r->percent(2)}};
}

json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

std::string csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string encode_models(const ModelBundle& models) {
  json j;
  j["version"] = kModelVersion;
  j["kind"] = to_string(models.mode);
  j["fingerprint"] = fingerprint_hex(models.fingerprint);
  if (models.mode == HmmMode::Shared) {
    j.update(hmm_json(models.shared));
  } else {
    json classes = json::array();
    for (const auto& [id, m] : models.per_class) classes.push_back({{"class_id", id}, {"model", hmm_json(m)}});
    j["classes"] = std::move(classes);
  }
  return j.dump(1) + "\n";
}

ModelBundle decode_models(std::string_view text, const std::string& name,
                          std::optional<std::uint64_t> expected_fingerprint) {
  const json j = parse(text, name);
  check_version(j, kModelVersion, name);
  ModelBundle b;
  b.fingerprint = parse_fingerprint_hex(field<std::string>(j, "fingerprint", name));
  check_fingerprint(b.fingerprint, expected_fingerprint, name);
  try {
    b.mode = parse_hmm_mode(field<std::string>(j, "kind", name));
  } catch (const InvalidArgument& e) {
    throw DataError(name + ": " + e.what());
  }
  if (b.mode == HmmMode::Shared) {
    b.shared = hmm_from_json(j, name);
  } else {
    for (const auto& c : field<json>(j, "classes", name)) {
      b.per_class.emplace_back(field<std::string>(c, "class_id", name),
                               hmm_from_json(field<json>(c, "model", name), name));
    }
    if (b.per_class.empty()) throw DataError(name + ": per-class model file has no classes");
  }
  return b;
}

void save_models(const std::filesystem::path& path, const ModelBundle& models) {
  write_file(path, encode_models(models));
}

ModelBundle load_models(const std::filesystem::path& path,
                        std::optional<std::uint64_t> expected_fingerprint) {
  return decode_models(read_file(path), path.string(), expected_fingerprint);
}

std::string encode_classifier(const ClassifierState& state, std::uint64_t fingerprint,
                              std::uint64_t model_digest) {
  json j;
  j["version"] = kClassifierVersion;
  j["fingerprint"] = fingerprint_hex(fingerprint);
  j["model_digest"] = fingerprint_hex(model_digest);
  j["measure"] = to_string(state.measure());
  j["covariance"] = to_string(state.covariance_mode());
  j["ridge"] = state.ridge();
  j["pooled_var"] = state.pooled_var();
  if (state.covariance_mode() == CovarianceMode::FullRidge) j["covariance_matrix"] = state.covariance();
  json classes = json::array();
  for (const auto& c : state.classes()) {
    classes.push_back({{"class_id", c.class_id}, {"n_train", c.n_train}, {"mean_path", c.mean_path}});
  }
  j["classes"] = std::move(classes);
  return j.dump(1) + "\n";
}

ClassifierState decode_classifier(std::string_view text, const std::string& name,
                                  std::optional<std::uint64_t> expected_fingerprint,
                                  std::optional<std::uint64_t> expected_model_digest) {
  const json j = parse(text, name);
  check_version(j, kClassifierVersion, name);
  check_fingerprint(parse_fingerprint_hex(field<std::string>(j, "fingerprint", name)),
                    expected_fingerprint, name);
  const auto digest = parse_fingerprint_hex(field<std::string>(j, "model_digest", name));
  if (expected_model_digest && digest != *expected_model_digest) {
    throw DataError(name + ": classifier was fitted against a different model file");
  }
  std::vector<ClassModel> classes;
  for (const auto& c : field<json>(j, "classes", name)) {
    classes.push_back({field<std::string>(c, "class_id", name),
                       field<std::vector<double>>(c, "mean_path", name),
                       field<std::size_t>(c, "n_train", name)});
  }
  try {
    const auto mode = parse_covariance_mode(field<std::string>(j, "covariance", name));
    return ClassifierState(
        std::move(classes), field<std::vector<double>>(j, "pooled_var", name),
        parse_distance_measure(field<std::string>(j, "measure", name)), mode,
        mode == CovarianceMode::FullRidge ? field<std::vector<double>>(j, "covariance_matrix", name)
                                          : std::vector<double>{},
        field<double>(j, "ridge", name));
  } catch (const InvalidArgument& e) {
    throw DataError(name + ": invalid classifier: " + e.what());
  }
}

void save_classifier(const std::filesystem::path& path, const ClassifierState& state,
                     std::uint64_t fingerprint, std::uint64_t model_digest) {
  write_file(path, encode_classifier(state, fingerprint, model_digest));
}

ClassifierState load_classifier(const std::filesystem::path& path,
                                std::optional<std::uint64_t> expected_fingerprint,
                                std::optional<std::uint64_t> expected_model_digest) {
  return decode_classifier(read_file(path), path.string(), expected_fingerprint,
                           expected_model_digest);
}

std::string encode_report(const EvalReport& report, const RunConfig& config) {
  json j;
  j["version"] = kReportVersion;
  j["fingerprint"] = fingerprint_hex(feature_fingerprint(config));
  j["tau"] = report.tau;
  j["n_classes"] = report.class_ids.size();
  j["counts"] = counts_json(report.counts);
  const auto& m = report.metrics;
  j["metrics"] = {{"sensitivity", ratio_json(m.sensitivity)},
                  {"specificity", ratio_json(m.specificity)},
                  {"fpr", ratio_json(m.fpr)},
                  {"fnr", ratio_json(m.fnr)},
                  {"accuracy", ratio_json(m.accuracy)},
                  {"balanced_accuracy", ratio_json(m.balanced_accuracy)},
                  {"rank1_accuracy", ratio_json(report.rank1)}};
  json per_class = json::object();
  for (const auto& [id, c] : report.per_class) {
    const auto cm = compute_metrics(c);
    per_class[id] = {{"counts", counts_json(c)},
                     {"sensitivity", ratio_json(cm.sensitivity)},
                     {"specificity", ratio_json(cm.specificity)}};
  }
  j["per_class"] = std::move(per_class);
  j["config"] = json::parse(config_to_json(config));
  return j.dump(2) + "\n";
}

std::string encode_probe_csv(const EvalReport& report) {
  std::string out = "id,role,class,predicted,best_score,decision\n";
  for (std::size_t i = 0; i < report.probes.size(); ++i) {
    const auto& p = report.probes[i];
    const std::size_t best = p.best();
    out += p.id + "," + std::string(to_string(p.role)) + "," + report.class_ids.at(p.class_index) +
           "," + report.class_ids.at(best) + "," + csv_double(p.scores[best]) + "," +
           std::string(to_string(report.decisions.at(i))) + "\n";
  }
  return out;
}

std::string encode_tau_sweep_csv(const EvalReport& report, std::span<const double> taus,
                                 NegativeRule rule) {
  std::string out = "tau,tp,fp,fn,tn,sensitivity,specificity\n";
  for (double tau : taus) {
    const auto c = tally(report.probes, tau, rule);
    const auto m = compute_metrics(c);
    out += csv_double(tau) + "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," +
           std::to_string(c.fn) + "," + std::to_string(c.tn) + "," +
           (m.sensitivity ? csv_double(m.sensitivity->value()) : "") + "," +
           (m.specificity ? csv_double(m.specificity->value()) : "") + "\n";
  }
  return out;
}

}  // namespace gphmm
