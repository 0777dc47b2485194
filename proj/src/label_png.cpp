#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "segfuse/io.hpp"

namespace segfuse::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct ErrorSink {
  char message[256] = "unknown libpng error";
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct ReadHandle {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ErrorSink sink;

  ReadHandle() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
    if (png) info = png_create_info_struct(png);
  }
  ~ReadHandle() { png_destroy_read_struct(&png, &info, nullptr); }
  ReadHandle(const ReadHandle&) = delete;
  ReadHandle& operator=(const ReadHandle&) = delete;
};

struct WriteHandle {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ErrorSink sink;

  WriteHandle() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
    if (png) info = png_create_info_struct(png);
  }
  ~WriteHandle() { png_destroy_write_struct(&png, &info); }
  WriteHandle(const WriteHandle&) = delete;
  WriteHandle& operator=(const WriteHandle&) = delete;
};

struct Header {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  bool supported = false;
};

// setjmp lives here so that no object with a destructor is created between
// the jump buffer and the libpng calls that may longjmp back.
bool decode(ReadHandle& h, std::FILE* fp, Header& hdr, std::vector<png_byte>& pixels,
            std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(h.png))) return false;
  png_init_io(h.png, fp);
  png_set_sig_bytes(h.png, 8);
  png_read_info(h.png, h.info);
  hdr.width = png_get_image_width(h.png, h.info);
  hdr.height = png_get_image_height(h.png, h.info);
  hdr.bit_depth = png_get_bit_depth(h.png, h.info);
  hdr.color_type = png_get_color_type(h.png, h.info);
  hdr.supported = hdr.color_type == PNG_COLOR_TYPE_GRAY && (hdr.bit_depth == 8 || hdr.bit_depth == 16);
  if (!hdr.supported) return true;

  const std::size_t row_bytes = png_get_rowbytes(h.png, h.info);
  pixels.resize(row_bytes * hdr.height);
  rows.resize(hdr.height);
  for (png_uint_32 y = 0; y < hdr.height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);
  return true;
}

bool encode(WriteHandle& h, std::FILE* fp, png_uint_32 width, png_uint_32 height, std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(h.png))) return false;
  png_init_io(h.png, fp);
  png_set_IHDR(h.png, h.info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);
  png_write_image(h.png, rows.data());
  png_write_end(h.png, nullptr);
  return true;
}

}  // namespace

InstanceMap read_label_png(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw IoError(IoError::Kind::NotFound, "label map not found: " + path.string());
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(IoError::Kind::NotFound, "cannot open label map: " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, sizeof sig, fp.get()) != sizeof sig || png_sig_cmp(sig, 0, sizeof sig) != 0)
    throw IoError(IoError::Kind::UnsupportedFormat, "not a PNG file: " + path.string());

  ReadHandle h;
  if (!h.png || !h.info) throw IoError(IoError::Kind::Corrupt, "libpng initialisation failed");
  Header hdr;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (!decode(h, fp.get(), hdr, pixels, rows))
    throw IoError(IoError::Kind::Corrupt, path.string() + ": " + h.sink.message);
  if (!hdr.supported)
    throw IoError(IoError::Kind::UnsupportedFormat,
                  path.string() + ": expected single-channel 8- or 16-bit grayscale, got color type " +
                      std::to_string(hdr.color_type) + " at bit depth " + std::to_string(hdr.bit_depth));

  const int w = static_cast<int>(hdr.width);
  const int ht = static_cast<int>(hdr.height);
  std::vector<Label> labels(static_cast<std::size_t>(w) * ht);
  for (int y = 0; y < ht; ++y) {
    const png_byte* row = rows[static_cast<std::size_t>(y)];
    Label* dst = labels.data() + static_cast<std::size_t>(y) * w;
    if (hdr.bit_depth == 8) {
      for (int x = 0; x < w; ++x) dst[x] = row[x];
    } else {
      for (int x = 0; x < w; ++x) dst[x] = static_cast<Label>(row[2 * x]) << 8 | row[2 * x + 1];
    }
  }
  return InstanceMap(w, ht, std::move(labels));
}

void write_label_png(const InstanceMap& map, const std::filesystem::path& path) {
  for (Label v : map.labels())
    if (v > kMaxPngLabel)
      throw IoError(IoError::Kind::LabelOverflow,
                    "label " + std::to_string(v) + " exceeds the 16-bit PNG range (max 65535)");
  if (map.width() < 1 || map.height() < 1)
    throw IoError(IoError::Kind::Unwritable, "cannot write a PNG with a zero dimension: " + path.string());

  const std::size_t row_bytes = static_cast<std::size_t>(map.width()) * 2;
  std::vector<png_byte> pixels(row_bytes * static_cast<std::size_t>(map.height()));
  std::vector<png_bytep> rows(static_cast<std::size_t>(map.height()));
  for (int y = 0; y < map.height(); ++y) {
    png_byte* row = pixels.data() + static_cast<std::size_t>(y) * row_bytes;
    rows[static_cast<std::size_t>(y)] = row;
    auto src = map.row(y);
    for (int x = 0; x < map.width(); ++x) {
      row[2 * x] = static_cast<png_byte>(src[x] >> 8);
      row[2 * x + 1] = static_cast<png_byte>(src[x] & 0xff);
    }
  }

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(IoError::Kind::Unwritable, "cannot create " + path.string());
  WriteHandle h;
  if (!h.png || !h.info) throw IoError(IoError::Kind::Unwritable, "libpng initialisation failed");
  if (!encode(h, fp.get(), static_cast<png_uint_32>(map.width()), static_cast<png_uint_32>(map.height()), rows))
    throw IoError(IoError::Kind::Unwritable, path.string() + ": " + h.sink.message);
  if (std::fflush(fp.get()) != 0) throw IoError(IoError::Kind::Unwritable, "write failed: " + path.string());
}

}  // namespace segfuse::io
