#include "gmcfuse/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

unsigned quantize(double v, unsigned maxval) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::floor(c * maxval + 0.5));
}

void png_error_handler(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }
void png_warning_handler(png_structp, png_const_charp) {}

Raster load_png(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian sample order on read
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  std::vector<unsigned char> buffer(rowbytes * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  if (channels != 1 && channels != 3) throw IoError("png: unsupported channel layout in '" + path + "'");

  Raster out;
  out.bit_depth = depth == 16 ? 16 : 8;
  const double scale = depth == 16 ? 65535.0 : 255.0;
  out.channels.assign(static_cast<std::size_t>(channels), Image(width, height));
  for (int y = 0; y < height; ++y) {
    const unsigned char* row = rows[y];
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t s = static_cast<std::size_t>(x) * channels + c;
        const unsigned v = depth == 16 ? static_cast<unsigned>(row[2 * s]) |
                                             (static_cast<unsigned>(row[2 * s + 1]) << 8)
                                       : row[s];
        out.channels[c](x, y) = v / scale;
      }
    }
  }
  return out;
}

void save_png(const std::string& path, const Raster& raster) {
  FilePtr f = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  const int width = raster.width();
  const int height = raster.height();
  const int channels = static_cast<int>(raster.channels.size());
  const int depth = raster.bit_depth == 16 ? 16 : 8;
  const unsigned maxval = depth == 16 ? 65535u : 255u;

  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t bytes = depth == 16 ? 2 : 1;
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * channels * bytes);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const unsigned v = quantize(raster.channels[c](x, y), maxval);
        const std::size_t s = (static_cast<std::size_t>(x) * channels + c) * bytes;
        if (depth == 16) {
          row[s] = static_cast<unsigned char>(v >> 8);  // PNG is big-endian
          row[s + 1] = static_cast<unsigned char>(v & 0xff);
        } else {
          row[s] = static_cast<unsigned char>(v);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

// PNM header tokens may be separated by whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
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

int parse_int(const std::string& tok, const std::string& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("pnm: malformed header in '" + path + "'");
  }
}

Raster load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw IoError("unrecognized image format in '" + path + "'");
  }
  const bool ascii = magic == "P2" || magic == "P3";
  const int channels = (magic == "P3" || magic == "P6") ? 3 : 1;
  const int width = parse_int(next_token(in), path);
  const int height = parse_int(next_token(in), path);
  const int maxval = parse_int(next_token(in), path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("pnm: invalid header values in '" + path + "'");
  }

  Raster out;
  out.bit_depth = maxval > 255 ? 16 : 8;
  out.channels.assign(static_cast<std::size_t>(channels), Image(width, height));
  const double scale = maxval;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        unsigned v = 0;
        if (ascii) {
          const std::string tok = next_token(in);
          if (tok.empty()) throw IoError("pnm: truncated data in '" + path + "'");
          v = static_cast<unsigned>(parse_int(tok, path));
        } else if (maxval > 255) {
          const int hi = in.get();
          const int lo = in.get();
          if (lo == EOF) throw IoError("pnm: truncated data in '" + path + "'");
          v = (static_cast<unsigned>(hi) << 8) | static_cast<unsigned>(lo);
        } else {
          const int b = in.get();
          if (b == EOF) throw IoError("pnm: truncated data in '" + path + "'");
          v = static_cast<unsigned>(b);
        }
        out.channels[c](x, y) = std::min(v / scale, 1.0);
      }
    }
  }
  return out;
}

void save_pnm(const std::string& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const int channels = static_cast<int>(raster.channels.size());
  const unsigned maxval = raster.bit_depth == 16 ? 65535u : 255u;
  out << (channels == 3 ? "P6" : "P5") << '\n'
      << raster.width() << ' ' << raster.height() << '\n'
      << maxval << '\n';
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const unsigned v = quantize(raster.channels[c](x, y), maxval);
        if (maxval > 255) out.put(static_cast<char>(v >> 8));
        out.put(static_cast<char>(v & 0xff));
      }
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace

Raster load_image(const std::string& path) {
  return has_png_signature(path) ? load_png(path) : load_pnm(path);
}

void save_image(const std::string& path, const Raster& raster) {
  if (raster.channels.size() != 1 && raster.channels.size() != 3) {
    throw ArgumentError("save_image: raster must have 1 or 3 channels");
  }
  for (const auto& c : raster.channels) {
    if (!c.same_shape(raster.channels.front())) throw DimensionError("save_image: channel sizes differ");
  }
  const std::string ext = lower_extension(path);
  if (ext == "png") {
    save_png(path, raster);
  } else if (ext == "pgm" || ext == "ppm" || ext == "pnm") {
    save_pnm(path, raster);
  } else {
    throw IoError("unsupported output extension for '" + path + "' (use .png, .pgm or .ppm)");
  }
}

void save_image(const std::string& path, const Image& gray, int bit_depth) {
  save_image(path, Raster{{gray}, bit_depth});
}

Image luma(const Raster& raster) {
  if (raster.is_color()) {
    return rgb_to_ycbcr(ColorImage{raster.channels[0], raster.channels[1], raster.channels[2]}).y;
  }
  return raster.channels.front();
}

}  // namespace gmcfuse
