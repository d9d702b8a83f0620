#include "gphmm/manifest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <set>

#include "gphmm/error.hpp"
#include "gphmm/image_io.hpp"

namespace gphmm {

using nlohmann::json;

namespace {

std::string required_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw DataError(where + ": missing string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

// Uniform index in [0, n) from a 64-bit engine; identical on every platform.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

}  // namespace

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto da = a.substr(i, ie - i), db = b.substr(j, je - j);
      while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
      while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::vector<std::string> Manifest::classes() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (seen.insert(e.class_id).second) out.push_back(e.class_id);
  }
  return out;
}

void Manifest::validate() const {
  std::set<std::string> trained;
  for (const auto& e : entries) {
    if (!std::filesystem::is_regular_file(e.path)) {
      throw DataError("manifest: image not found: " + e.path.string());
    }
    if (e.role == ProbeRole::Train) trained.insert(e.class_id);
  }
  for (const auto& e : entries) {
    if (!trained.contains(e.class_id)) {
      throw DataError("manifest: class '" + e.class_id + "' has no training image (first seen at " +
                      e.path.string() + ")");
    }
  }
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        const std::string& name) {
  Manifest m;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    if (first && j.contains("version") && !j.contains("path")) {
      first = false;
      if (j.at("version") != kManifestVersion) {
        throw DataError(where + ": unsupported manifest version " + j.at("version").dump());
      }
      continue;
    }
    first = false;
    ManifestEntry e;
    std::filesystem::path p = required_string(j, "path", where);
    e.path = p.is_absolute() ? p : base_dir / p;
    e.subject = required_string(j, "subject", where);
    e.role = parse_probe_role(required_string(j, "role", where));
    e.class_id = j.contains("class") ? required_string(j, "class", where) : e.subject;
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_manifest(read_file(path), base, path.string());
}

std::string encode_manifest(const Manifest& manifest) {
  std::string out = json{{"version", kManifestVersion}}.dump() + "\n";
  for (const auto& e : manifest.entries) {
    json j;
    j["path"] = e.path.generic_string();
    j["subject"] = e.subject;
    j["role"] = to_string(e.role);
    j["class"] = e.class_id;
    out += j.dump() + "\n";
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_file(path, encode_manifest(manifest));
}

Manifest make_split_manifest(const std::filesystem::path& root, const SplitOptions& options) {
  if (!std::filesystem::is_directory(root)) {
    throw DataError("dataset root is not a directory: " + root.string());
  }
  std::vector<std::filesystem::path> subjects;
  for (const auto& d : std::filesystem::directory_iterator(root)) {
    if (d.is_directory()) subjects.push_back(d.path());
  }
  std::sort(subjects.begin(), subjects.end(), [](const auto& a, const auto& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  if (subjects.empty()) throw DataError("no subject directories under " + root.string());

  std::vector<std::vector<std::filesystem::path>> images(subjects.size());
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (const auto& f : std::filesystem::directory_iterator(subjects[s])) {
      if (f.is_regular_file() && is_image_file(f.path())) images[s].push_back(f.path());
    }
    std::sort(images[s].begin(), images[s].end(), [](const auto& a, const auto& b) {
      return natural_less(a.filename().string(), b.filename().string());
    });
    if (images[s].size() <= options.n_train) {
      throw DataError("subject " + subjects[s].string() + " has " + std::to_string(images[s].size()) +
                      " images, need more than n_train = " + std::to_string(options.n_train));
    }
  }

  std::mt19937_64 rng(options.seed);
  Manifest m;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const std::string id = subjects[s].filename().string();
    for (std::size_t i = 0; i < images[s].size(); ++i) {
      m.entries.push_back({images[s][i], id, i < options.n_train ? ProbeRole::Train : ProbeRole::Positive, id});
    }
    if (options.n_negatives == 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t o = 0; o < subjects.size(); ++o) {
      if (o == s) continue;
      for (std::size_t i = 0; i < images[o].size(); ++i) pool.emplace_back(o, i);
    }
    if (pool.size() < options.n_negatives) throw DataError("not enough images for the negative sets");
    for (std::size_t i = 0; i < options.n_negatives; ++i) {
      const std::size_t k = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[k]);
      const auto [o, idx] = pool[i];
      m.entries.push_back({images[o][idx], subjects[o].filename().string(), ProbeRole::Negative, id});
    }
  }
  return m;
}

}  // namespace gphmm
