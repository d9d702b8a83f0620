#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gphmm/evaluate.hpp"

namespace gphmm {

struct ManifestEntry {
  std::filesystem::path path;
  std::string subject;
  ProbeRole role = ProbeRole::Train;
  /// Class the image trains or is probed under. Negative probes carry the
  /// class they are presented against; `subject` is their real identity.
  std::string class_id;
  bool operator==(const ManifestEntry&) const = default;
};

inline constexpr int kManifestVersion = 1;

/// JSON Lines dataset description. An optional first line {"version": 1}
/// declares the format version; every other non-empty line is one entry:
///   {"path": "...", "subject": "...", "role": "train|probe_pos|probe_neg", "class": "..."}
/// Relative paths are resolved against the manifest's directory.
struct Manifest {
  std::vector<ManifestEntry> entries;

  /// Class ids in order of first appearance.
  std::vector<std::string> classes() const;
  /// Throws DataError naming the offending entry: missing file, or a class
  /// without any training image.
  void validate() const;
};

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        const std::string& name = "manifest");
Manifest load_manifest(const std::filesystem::path& path);
std::string encode_manifest(const Manifest& manifest);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct SplitOptions {
  /// Leading images (in natural filename order) per subject used for training.
  std::size_t n_train = 1;
  /// Images of other subjects attached to each class as negative probes.
  std::size_t n_negatives = 0;
  std::uint64_t seed = 0;
};

/// Builds a manifest from a directory with one sub-directory per subject
/// (e.g. s1/1.pgm ... s40/10.pgm). Subjects and files are taken in natural
/// order; negatives are drawn with a seeded Fisher-Yates shuffle.
Manifest make_split_manifest(const std::filesystem::path& root, const SplitOptions& options);

/// "s2" < "s10": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

}  // namespace gphmm
