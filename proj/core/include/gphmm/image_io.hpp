#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gphmm/features.hpp"
#include "gphmm/gabor_bank.hpp"
#include "gphmm/grid.hpp"

namespace gphmm {

struct ImageSize {
  std::size_t width = 92;
  std::size_t height = 112;
  bool operator==(const ImageSize&) const = default;
};

/// Reads a PGM (P2 or P5) or PNG (grayscale or RGB) file as gray levels in
/// [0, 255]. RGB is converted with luma 0.299 R + 0.587 G + 0.114 B. When
/// `target` is given and differs from the file's size, the image is resampled
/// bilinearly. Errors name the path and say whether the format is unknown, the
/// file is truncated, or the dimensions are zero.
Image load_image(const std::filesystem::path& path, std::optional<ImageSize> target = std::nullopt);

/// Parses PGM bytes; `name` only appears in error messages.
Image decode_pgm(std::string_view bytes, const std::string& name);

/// Writes an 8-bit PGM, rounding and clamping values to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& image, bool ascii = false);

/// Bilinear resampling with pixel-center alignment; the identity when sizes match.
Image resize_bilinear(const Image& image, std::size_t width, std::size_t height);

/// Feature-image container: "GPFI", u32 version, u64 config fingerprint,
/// u32 width, u32 height, then width*height little-endian float64, row-major.
inline constexpr std::uint32_t kFeatureImageVersion = 1;

std::string encode_feature_image(const FeatureImage& gf, std::uint64_t fingerprint);
FeatureImage decode_feature_image(std::string_view bytes, const std::string& name,
                                  std::uint64_t* fingerprint = nullptr);
void write_feature_image(const std::filesystem::path& path, const FeatureImage& gf,
                         std::uint64_t fingerprint);
FeatureImage read_feature_image(const std::filesystem::path& path,
                                std::uint64_t* fingerprint = nullptr);

/// Min-max normalized 8-bit PGM rendering of a feature image, for inspection.
void export_feature_pgm(const std::filesystem::path& path, const FeatureImage& gf);

/// Observation sequence as text: a header line
///   # gphmm-sequence version=1 fingerprint=<hex> source=<id>
/// followed by one value per line in round-trip precision.
inline constexpr int kSequenceVersion = 1;

std::string encode_sequence_csv(const ObservationSequence& seq, std::uint64_t fingerprint);
ObservationSequence decode_sequence_csv(std::string_view text, const std::string& name,
                                        std::uint64_t* fingerprint = nullptr);
void write_sequence_csv(const std::filesystem::path& path, const ObservationSequence& seq,
                        std::uint64_t fingerprint);
ObservationSequence read_sequence_csv(const std::filesystem::path& path,
                                      std::uint64_t* fingerprint = nullptr);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string fingerprint_hex(std::uint64_t fingerprint);
std::uint64_t parse_fingerprint_hex(std::string_view hex);

}  // namespace gphmm
