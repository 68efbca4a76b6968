#include "sublift/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace sublift {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

long parse_long(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed header token '" + tok + "'");
  }
}

}  // namespace

ScalarField read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const std::string magic = next_token(is);
  if (magic != "P5" && magic != "P2") throw IoError(path.string() + ": not a PGM file");
  const long w = parse_long(next_token(is), path);
  const long h = parse_long(next_token(is), path);
  const long maxval = parse_long(next_token(is), path);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw IoError(path.string() + ": unsupported PGM header");
  ScalarField img{GridShape(w, h)};
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P5") {
    std::vector<unsigned char> buf(static_cast<std::size_t>(w * h));
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw IoError(path.string() + ": truncated PGM data");
    for (std::size_t n = 0; n < buf.size(); ++n) img.values[static_cast<Index>(n)] = buf[n] * scale;
  } else {
    for (Index n = 0; n < img.grid.size(); ++n) {
      const std::string tok = next_token(is);
      if (tok.empty()) throw IoError(path.string() + ": truncated PGM data");
      img.values[n] = static_cast<double>(parse_long(tok, path)) * scale;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const ScalarField& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "P5\n" << image.grid.width << ' ' << image.grid.height << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(image.grid.size()));
  for (Index n = 0; n < image.grid.size(); ++n)
    buf[static_cast<std::size_t>(n)] =
        static_cast<unsigned char>(std::clamp(std::lround(255.0 * image.values[n]), 0L, 255L));
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

ScalarField read_pfm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const std::string magic = next_token(is);
  if (magic != "Pf") throw IoError(path.string() + ": not a grayscale PFM file");
  const long w = parse_long(next_token(is), path);
  const long h = parse_long(next_token(is), path);
  double scale = 0.0;
  try {
    scale = std::stod(next_token(is));
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PFM scale");
  }
  if (w < 1 || h < 1 || scale == 0.0) throw IoError(path.string() + ": invalid PFM header");
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  ScalarField img{GridShape(w, h)};
  std::array<unsigned char, 4> bytes;
  for (long y = h - 1; y >= 0; --y) {
    for (long x = 0; x < w; ++x) {
      if (!is.read(reinterpret_cast<char*>(bytes.data()), 4)) throw IoError(path.string() + ": truncated PFM data");
      if (swap) std::reverse(bytes.begin(), bytes.end());
      float v;
      std::memcpy(&v, bytes.data(), 4);
      img(x, y) = v;
    }
  }
  return img;
}

void write_pfm(const std::filesystem::path& path, const ScalarField& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "Pf\n" << image.grid.width << ' ' << image.grid.height << "\n-1.0\n";
  std::array<unsigned char, 4> bytes;
  for (Index y = image.grid.height - 1; y >= 0; --y) {
    for (Index x = 0; x < image.grid.width; ++x) {
      const float v = static_cast<float>(image(x, y));
      std::memcpy(bytes.data(), &v, 4);
      if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
      os.write(reinterpret_cast<const char*>(bytes.data()), 4);
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

ScalarField read_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".pgm") return read_pgm(path);
  throw IoError(path.string() + ": unsupported image format (expected .pgm or .pfm)");
}

}  // namespace sublift
