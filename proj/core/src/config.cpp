#include "gphmm/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

#include "gphmm/error.hpp"
#include "gphmm/image_io.hpp"

namespace gphmm {

using nlohmann::json;

namespace {

std::string_view to_string(MagnitudeMode m) { return m == MagnitudeMode::L1 ? "l1" : "modulus"; }
MagnitudeMode parse_magnitude(std::string_view s) {
  if (s == "l1") return MagnitudeMode::L1;
  if (s == "modulus") return MagnitudeMode::Modulus;
  throw InvalidArgument("unknown magnitude mode '" + std::string(s) + "' (expected l1 or modulus)");
}

std::string_view to_string(DcCorrection d) { return d == DcCorrection::Discrete ? "discrete" : "analytic"; }
DcCorrection parse_dc(std::string_view s) {
  if (s == "discrete") return DcCorrection::Discrete;
  if (s == "analytic") return DcCorrection::Analytic;
  throw InvalidArgument("unknown dc_correction '" + std::string(s) + "' (expected discrete or analytic)");
}

std::string_view to_string(ConvolutionMethod m) {
  return m == ConvolutionMethod::Direct ? "direct" : "separable";
}
ConvolutionMethod parse_method(std::string_view s) {
  if (s == "direct") return ConvolutionMethod::Direct;
  if (s == "separable") return ConvolutionMethod::Separable;
  throw InvalidArgument("unknown convolution method '" + std::string(s) +
                        "' (expected direct or separable)");
}

json image_json(const RunConfig& c) {
  return {{"width", c.image.width}, {"height", c.image.height}};
}

json gabor_json(const RunConfig& c, bool with_method) {
  const auto& g = c.gabor;
  json j = {{"sigma", g.params.sigma},
            {"k_max", g.params.k_max},
            {"f", g.params.f},
            {"n_scales", g.params.n_scales},
            {"n_orients", g.params.n_orients},
            {"dc_correction", to_string(g.params.dc)},
            {"kernel_size", g.kernel_size},
            {"magnitude", to_string(g.magnitude)}};
  if (with_method) j["convolution"] = to_string(g.method);
  return j;
}

json sampling_json(const RunConfig& c) {
  const auto& s = c.sampling;
  return {{"block_k", s.block_k},
          {"overlap_p", s.overlap_p},
          {"strip_h", s.strip_h},
          {"scan", to_string(s.scan)}};
}

json features_json(const RunConfig& c) { return {{"fallback_scale", c.features.fallback_scale}}; }

json to_json(const RunConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  j["seed"] = c.seed;
  j["image"] = image_json(c);
  j["gabor"] = gabor_json(c, true);
  j["sampling"] = sampling_json(c);
  j["features"] = features_json(c);
  j["hmm"] = {{"n_states", c.hmm.n_states},
              {"max_iters", c.hmm.max_iters},
              {"tol", c.hmm.tol},
              {"var_floor_rel", c.hmm.var_floor_rel},
              {"mode", to_string(c.hmm.mode)}};
  j["classify"] = {{"measure", to_string(c.classify.measure)},
                   {"covariance", to_string(c.classify.covariance)},
                   {"ridge", c.classify.ridge},
                   {"var_floor", c.classify.var_floor}};
  j["eval"] = {{"tau_percentile", c.eval.tau_percentile},
               {"tau_scale", c.eval.tau_scale},
               {"tau", c.eval.tau ? json(*c.eval.tau) : json(nullptr)},
               {"negative_rule", to_string(c.eval.negative_rule)}};
  return j;
}

class Section {
public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  template <class Parse, class T>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = parse(s);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) {
        throw InvalidArgument("config: unknown key '" + name_ + "." + item.key() + "'");
      }
    }
  }

  const json& raw() const { return j_; }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

const json& sub(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

std::string_view to_string(ScanMode m) { return m == ScanMode::Serpentine ? "serpentine" : "zigzag"; }

ScanMode parse_scan_mode(std::string_view name) {
  if (name == "serpentine") return ScanMode::Serpentine;
  if (name == "zigzag") return ScanMode::Zigzag;
  throw InvalidArgument("unknown scan mode '" + std::string(name) + "' (expected serpentine or zigzag)");
}

std::string_view to_string(HmmMode m) { return m == HmmMode::Shared ? "shared" : "per_class"; }

HmmMode parse_hmm_mode(std::string_view name) {
  if (name == "shared") return HmmMode::Shared;
  if (name == "per_class") return HmmMode::PerClass;
  throw InvalidArgument("unknown hmm mode '" + std::string(name) + "' (expected shared or per_class)");
}

void RunConfig::validate() const {
  if (image.width == 0 || image.height == 0) throw InvalidArgument("config: image size must be positive");
  gabor.params.validate();
  if (gabor.kernel_size < 3 || gabor.kernel_size % 2 == 0) {
    throw InvalidArgument("config: gabor.kernel_size must be odd and >= 3");
  }
  if (static_cast<std::size_t>(gabor.kernel_size) > std::min(image.width, image.height)) {
    throw InvalidArgument("config: gabor.kernel_size exceeds the image size");
  }
  const auto plan =
      plan_sampling(image.width, image.height, sampling.block_k, sampling.overlap_p, sampling.strip_h);
  if (!(features.fallback_scale >= 0.0)) throw InvalidArgument("config: features.fallback_scale must be >= 0");
  if (hmm.n_states == 0) throw InvalidArgument("config: hmm.n_states must be >= 1");
  if (hmm.n_states > plan.T()) throw InvalidArgument("config: hmm.n_states exceeds the sequence length");
  if (!(hmm.tol >= 0.0)) throw InvalidArgument("config: hmm.tol must be >= 0");
  if (!(hmm.var_floor_rel > 0.0)) throw InvalidArgument("config: hmm.var_floor_rel must be > 0");
  if (!(classify.ridge > 0.0)) throw InvalidArgument("config: classify.ridge must be > 0");
  if (!(classify.var_floor > 0.0)) throw InvalidArgument("config: classify.var_floor must be > 0");
  if (!(eval.tau_percentile > 0.0 && eval.tau_percentile <= 100.0)) {
    throw InvalidArgument("config: eval.tau_percentile must lie in (0, 100]");
  }
  if (!(eval.tau_scale > 0.0)) throw InvalidArgument("config: eval.tau_scale must be > 0");
}

std::string config_to_json(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig config_from_json(std::string_view text, const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + name + ": " + e.what());
  }
  RunConfig c;
  Section top(j, "");
  int version = kConfigVersion;
  top.get("version", version);
  if (version != kConfigVersion) {
    throw InvalidArgument("config " + name + ": unsupported version " + std::to_string(version));
  }
  top.get("seed", c.seed);
  for (const char* key : {"image", "gabor", "sampling", "features", "hmm", "classify", "eval"}) {
    top.mark(key);
  }
  top.finish();

  Section image(sub(j, "image"), "image");
  image.get("width", c.image.width);
  image.get("height", c.image.height);
  image.finish();

  Section g(sub(j, "gabor"), "gabor");
  g.get("sigma", c.gabor.params.sigma);
  g.get("k_max", c.gabor.params.k_max);
  g.get("f", c.gabor.params.f);
  g.get("n_scales", c.gabor.params.n_scales);
  g.get("n_orients", c.gabor.params.n_orients);
  g.get_enum("dc_correction", c.gabor.params.dc, parse_dc);
  g.get("kernel_size", c.gabor.kernel_size);
  g.get_enum("magnitude", c.gabor.magnitude, parse_magnitude);
  g.get_enum("convolution", c.gabor.method, parse_method);
  g.finish();

  Section s(sub(j, "sampling"), "sampling");
  s.get("block_k", c.sampling.block_k);
  s.get("overlap_p", c.sampling.overlap_p);
  s.get("strip_h", c.sampling.strip_h);
  s.get_enum("scan", c.sampling.scan, parse_scan_mode);
  s.finish();

  Section f(sub(j, "features"), "features");
  f.get("fallback_scale", c.features.fallback_scale);
  f.finish();

  Section h(sub(j, "hmm"), "hmm");
  h.get("n_states", c.hmm.n_states);
  h.get("max_iters", c.hmm.max_iters);
  h.get("tol", c.hmm.tol);
  h.get("var_floor_rel", c.hmm.var_floor_rel);
  h.get_enum("mode", c.hmm.mode, parse_hmm_mode);
  h.finish();

  Section cl(sub(j, "classify"), "classify");
  cl.get_enum("measure", c.classify.measure, parse_distance_measure);
  cl.get_enum("covariance", c.classify.covariance, parse_covariance_mode);
  cl.get("ridge", c.classify.ridge);
  cl.get("var_floor", c.classify.var_floor);
  cl.finish();

  Section e(sub(j, "eval"), "eval");
  e.get("tau_percentile", c.eval.tau_percentile);
  e.get("tau_scale", c.eval.tau_scale);
  e.mark("tau");
  if (e.raw().contains("tau") && !e.raw().at("tau").is_null()) {
    double tau = 0.0;
    e.get("tau", tau);
    c.eval.tau = tau;
  }
  e.get_enum("negative_rule", c.eval.negative_rule, parse_negative_rule);
  e.finish();

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw InvalidArgument(e.what());
  }
  return config_from_json(text, path.string());
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  write_file(path, config_to_json(config));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t feature_fingerprint(const RunConfig& config) {
  const json j = {{"image", image_json(config)},
                  {"gabor", gabor_json(config, false)},
                  {"sampling", sampling_json(config)},
                  {"features", features_json(config)}};
  return fnv1a(j.dump());
}

}  // namespace gphmm
