#include "gphmm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gphmm/error.hpp"

namespace gphmm {

namespace {

std::string quoted(const std::string& name) { return "'" + name + "'"; }

// Minimal tokenizer for the PNM header: whitespace separated, '#' starts a comment.
class PnmReader {
public:
  PnmReader(std::string_view bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  std::uint64_t next_uint(const char* what) {
    skip_space();
    if (pos_ >= bytes_.size()) {
      throw DataError("truncated file " + quoted(name_) + ": missing " + what);
    }
    std::uint64_t v = 0;
    const auto* begin = bytes_.data() + pos_;
    const auto* end = bytes_.data() + bytes_.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr == begin) {
      throw DataError("malformed PGM " + quoted(name_) + ": expected " + what);
    }
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  // Exactly one whitespace byte separates the header from binary data.
  void skip_single_space() {
    if (pos_ >= bytes_.size()) throw DataError("truncated file " + quoted(name_) + ": no pixel data");
    if (!std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("malformed PGM " + quoted(name_) + ": header not terminated by whitespace");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;
};

Image decode_png(std::string_view bytes, const std::string& name) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw DataError("truncated or corrupt PNG " + quoted(name) + ": " + img.message);
  }
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw DataError("zero image dimensions in " + quoted(name));
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&img, &black, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DataError("truncated or corrupt PNG " + quoted(name) + ": " + msg);
  }
  Image out(img.width, img.height);
  auto px = out.values();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double r = buf[3 * i], g = buf[3 * i + 1], b = buf[3 * i + 2];
    px[i] = (r == g && g == b) ? r : 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return out;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(std::string_view s, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + quoted(path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + quoted(path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("failed writing " + quoted(path.string()));
}

Image decode_pgm(std::string_view bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw DataError("unknown image format in " + quoted(name) + " (expected PGM P2/P5 or PNG)");
  }
  const bool ascii = bytes[1] == '2';
  PnmReader rd(bytes, name);
  const auto width = rd.next_uint("width");
  const auto height = rd.next_uint("height");
  const auto maxval = rd.next_uint("maxval");
  if (width == 0 || height == 0) throw DataError("zero image dimensions in " + quoted(name));
  if (maxval == 0 || maxval > 65535) {
    throw DataError("malformed PGM " + quoted(name) + ": maxval must be in [1, 65535]");
  }
  const double scale = 255.0 / static_cast<double>(maxval);
  Image out(width, height);
  auto px = out.values();
  if (ascii) {
    for (auto& v : px) {
      const auto raw = rd.next_uint("pixel value");
      if (raw > maxval) throw DataError("malformed PGM " + quoted(name) + ": pixel exceeds maxval");
      v = maxval == 255 ? static_cast<double>(raw) : static_cast<double>(raw) * scale;
    }
    return out;
  }
  rd.skip_single_space();
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t need = px.size() * bpp;
  if (bytes.size() - rd.pos() < need) {
    throw DataError("truncated file " + quoted(name) + ": expected " + std::to_string(need) +
                    " bytes of pixel data, found " + std::to_string(bytes.size() - rd.pos()));
  }
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + rd.pos());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned raw = bpp == 1 ? data[i] : (static_cast<unsigned>(data[2 * i]) << 8) | data[2 * i + 1];
    if (raw > maxval) throw DataError("malformed PGM " + quoted(name) + ": pixel exceeds maxval");
    px[i] = maxval == 255 ? static_cast<double>(raw) : static_cast<double>(raw) * scale;
  }
  return out;
}

Image load_image(const std::filesystem::path& path, std::optional<ImageSize> target) {
  const std::string name = path.string();
  const std::string bytes = read_file(path);
  if (bytes.empty()) throw DataError("truncated file " + quoted(name) + ": file is empty");
  Image img;
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    img = decode_png(bytes, name);
  } else {
    img = decode_pgm(bytes, name);
  }
  if (target && (img.width() != target->width || img.height() != target->height)) {
    img = resize_bilinear(img, target->width, target->height);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image, bool ascii) {
  std::string out = (ascii ? "P2\n" : "P5\n") + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const auto v = static_cast<int>(std::lround(std::clamp(image(x, y), 0.0, 255.0)));
      if (ascii) {
        out += std::to_string(v);
        out += x + 1 == image.width() ? '\n' : ' ';
      } else {
        out.push_back(static_cast<char>(v));
      }
    }
  }
  write_file(path, out);
}

Image resize_bilinear(const Image& image, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || image.empty()) {
    throw InvalidArgument("resize_bilinear: zero dimensions");
  }
  if (width == image.width() && height == image.height()) return image;
  const double sx = static_cast<double>(image.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height()) / static_cast<double>(height);
  const auto max_x = static_cast<double>(image.width() - 1);
  const auto max_y = static_cast<double>(image.height() - 1);
  Image out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = image(x0, y0) + wx * (image(x1, y0) - image(x0, y0));
      const double bottom = image(x0, y1) + wx * (image(x1, y1) - image(x0, y1));
      out(x, y) = top + wy * (bottom - top);
    }
  }
  return out;
}

std::string encode_feature_image(const FeatureImage& gf, std::uint64_t fingerprint) {
  std::string s = "GPFI";
  put_u32(s, kFeatureImageVersion);
  put_u64(s, fingerprint);
  put_u32(s, static_cast<std::uint32_t>(gf.width()));
  put_u32(s, static_cast<std::uint32_t>(gf.height()));
  s.reserve(s.size() + 8 * gf.pixels.size());
  for (double v : gf.pixels.values()) put_u64(s, std::bit_cast<std::uint64_t>(v));
  return s;
}

FeatureImage decode_feature_image(std::string_view bytes, const std::string& name,
                                  std::uint64_t* fingerprint) {
  constexpr std::size_t kHeader = 4 + 4 + 8 + 4 + 4;
  if (bytes.size() < 4 || bytes.substr(0, 4) != "GPFI") {
    throw DataError("unknown format in " + quoted(name) + " (not a feature image)");
  }
  if (bytes.size() < kHeader) throw DataError("truncated feature image " + quoted(name));
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kFeatureImageVersion) {
    throw DataError("unsupported feature image version " + std::to_string(version) + " in " +
                    quoted(name));
  }
  if (fingerprint) *fingerprint = get_le(bytes, 8, 8);
  const auto w = static_cast<std::size_t>(get_le(bytes, 16, 4));
  const auto h = static_cast<std::size_t>(get_le(bytes, 20, 4));
  if (w == 0 || h == 0) throw DataError("zero image dimensions in " + quoted(name));
  if (bytes.size() != kHeader + 8 * w * h) throw DataError("truncated feature image " + quoted(name));
  Image px(w, h);
  auto v = px.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::bit_cast<double>(get_le(bytes, kHeader + 8 * i, 8));
  }
  return FeatureImage{std::move(px)};
}

void write_feature_image(const std::filesystem::path& path, const FeatureImage& gf,
                         std::uint64_t fingerprint) {
  write_file(path, encode_feature_image(gf, fingerprint));
}

FeatureImage read_feature_image(const std::filesystem::path& path, std::uint64_t* fingerprint) {
  return decode_feature_image(read_file(path), path.string(), fingerprint);
}

void export_feature_pgm(const std::filesystem::path& path, const FeatureImage& gf) {
  const auto v = gf.pixels.values();
  if (v.empty()) throw InvalidArgument("export_feature_pgm: empty image");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  Image out(gf.width(), gf.height());
  auto dst = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    dst[i] = range > 0.0 ? 255.0 * (v[i] - *lo) / range : 0.0;
  }
  write_pgm(path, out);
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

std::uint64_t parse_fingerprint_hex(std::string_view hex) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size() || hex.size() != 16) {
    throw DataError("malformed fingerprint '" + std::string(hex) + "'");
  }
  return v;
}

std::string encode_sequence_csv(const ObservationSequence& seq, std::uint64_t fingerprint) {
  if (seq.source_id.find_first_of("\r\n") != std::string::npos) {
    throw InvalidArgument("sequence source id must not contain line breaks");
  }
  std::string out = "# gphmm-sequence version=" + std::to_string(kSequenceVersion) +
                    " fingerprint=" + fingerprint_hex(fingerprint) + " source=" + seq.source_id +
                    "\n";
  for (double v : seq.values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

ObservationSequence decode_sequence_csv(std::string_view text, const std::string& name,
                                        std::uint64_t* fingerprint) {
  const std::string_view prefix = "# gphmm-sequence version=";
  if (text.substr(0, prefix.size()) != prefix) {
    throw DataError("unknown format in " + quoted(name) + " (missing sequence header)");
  }
  const auto eol = text.find('\n');
  if (eol == std::string_view::npos) throw DataError("truncated sequence file " + quoted(name));
  const std::string_view header = text.substr(0, eol);

  std::istringstream hs{std::string(header.substr(prefix.size()))};
  int version = 0;
  hs >> version;
  if (version != kSequenceVersion) {
    throw DataError("unsupported sequence version in " + quoted(name));
  }
  std::string fp_field;
  hs >> fp_field;
  if (fp_field.rfind("fingerprint=", 0) != 0) {
    throw DataError("malformed sequence header in " + quoted(name));
  }
  const std::uint64_t fp = parse_fingerprint_hex(std::string_view(fp_field).substr(12));
  if (fingerprint) *fingerprint = fp;

  ObservationSequence seq;
  const auto src = header.find(" source=");
  if (src == std::string_view::npos) throw DataError("malformed sequence header in " + quoted(name));
  seq.source_id = std::string(header.substr(src + 8));

  std::size_t pos = eol + 1;
  while (pos < text.size()) {
    auto next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    const std::string line(text.substr(pos, next - pos));
    pos = next + 1;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0') {
      throw DataError("malformed value '" + line + "' in " + quoted(name));
    }
    seq.values.push_back(v);
  }
  return seq;
}

void write_sequence_csv(const std::filesystem::path& path, const ObservationSequence& seq,
                        std::uint64_t fingerprint) {
  write_file(path, encode_sequence_csv(seq, fingerprint));
}

ObservationSequence read_sequence_csv(const std::filesystem::path& path, std::uint64_t* fingerprint) {
  return decode_sequence_csv(read_file(path), path.string(), fingerprint);
}

}  // namespace gphmm
