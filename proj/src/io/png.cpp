#include "emdtex/io/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "emdtex/error.hpp"
#include "emdtex/io/files.hpp"

namespace emdtex::io {

namespace {

// libpng reports errors by longjmp. The functions that call setjmp below keep
// only trivially destructible locals so the jump skips no destructors.

struct ReadSource {
  const std::byte* data;
  std::size_t size;
  std::size_t offset;
};

struct ErrorSink {
  char message[256];
};

void on_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  if (sink != nullptr) {
    std::strncpy(sink->message, msg, sizeof(sink->message) - 1);
    sink->message[sizeof(sink->message) - 1] = '\0';
  }
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
  if (src->size - src->offset < length) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->data + src->offset, length);
  src->offset += length;
}

struct ReadHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadHandles() { png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr); }
};

bool read_header(png_structp png, png_infop info, ReadSource* src, PngInfo* out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, src, read_callback);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out->height = png_get_image_height(png, info);
  out->width = png_get_image_width(png, info);
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  return true;
}

bool read_rows(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

struct WriteSink {
  std::vector<std::byte>* out;
};

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
  const auto* begin = reinterpret_cast<const std::byte*>(data);
  sink->out->insert(sink->out->end(), begin, begin + length);
}

void flush_callback(png_structp) {}

struct WriteHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteHandles() { png_destroy_write_struct(&png, info != nullptr ? &info : nullptr); }
};

bool write_all(png_structp png, png_infop info, WriteSink* sink, png_uint_32 width,
               png_uint_32 height, int depth, int color, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, sink, write_callback, flush_callback);
  png_set_IHDR(png, info, width, height, depth, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, info);
  return true;
}

}  // namespace

MultiChannelField decode_png(std::span<const std::byte> bytes, PngInfo* info_out) {
  if (bytes.size() < 8 ||
      png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    throw Error(ErrorCode::kFormat, "not a PNG file");
  }
  ErrorSink sink{};
  ReadHandles h;
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_error, on_warning);
  if (h.png == nullptr) throw Error(ErrorCode::kIo, "png_create_read_struct failed");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw Error(ErrorCode::kIo, "png_create_info_struct failed");

  ReadSource src{bytes.data(), bytes.size(), 0};
  PngInfo info;
  if (!read_header(h.png, h.info, &src, &info)) {
    throw Error(ErrorCode::kFormat, std::string("PNG header: ") + sink.message);
  }
  if (info.channels != 1 && info.channels != 3) {
    throw Error(ErrorCode::kFormat, "unsupported PNG channel layout");
  }
  const std::size_t bytes_per_sample = info.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = info.width * info.channels * bytes_per_sample;
  std::vector<png_byte> pixels(row_bytes * info.height);
  std::vector<png_bytep> rows(info.height);
  for (std::size_t r = 0; r < info.height; ++r) rows[r] = pixels.data() + r * row_bytes;
  if (!read_rows(h.png, h.info, rows.data())) {
    throw Error(ErrorCode::kFormat, std::string("PNG data: ") + sink.message);
  }

  MultiChannelField out(info.height, info.width, info.channels, ValueRange::kUnit);
  const double scale = info.bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (std::size_t r = 0; r < info.height; ++r) {
    const png_byte* row = rows[r];
    for (std::size_t c = 0; c < info.width; ++c) {
      for (std::size_t ch = 0; ch < info.channels; ++ch) {
        const std::size_t k = (c * info.channels + ch) * bytes_per_sample;
        const unsigned code = bytes_per_sample == 2 ? (unsigned{row[k]} << 8) | row[k + 1] : row[k];
        out(r, c, ch) = code * scale;
      }
    }
  }
  if (info_out != nullptr) *info_out = info;
  return out;
}

MultiChannelField read_png(const std::filesystem::path& path, PngInfo* info) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes, info);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::byte> encode_png(const MultiChannelField& field, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::kInvalidArgument, "PNG bit depth must be 8 or 16");
  }
  const std::size_t nc = field.num_channels();
  if (nc != 1 && nc != 3) throw Error(ErrorCode::kInvalidArgument, "PNG needs 1 or 3 channels");
  if (field.height() == 0 || field.width() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty image");
  }
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  const double max_code = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t row_bytes = field.width() * nc * bytes_per_sample;
  std::vector<png_byte> pixels(row_bytes * field.height());
  std::vector<png_bytep> rows(field.height());
  for (std::size_t r = 0; r < field.height(); ++r) {
    rows[r] = pixels.data() + r * row_bytes;
    for (std::size_t c = 0; c < field.width(); ++c) {
      for (std::size_t ch = 0; ch < nc; ++ch) {
        double v = field(r, c, ch);
        v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        const auto code = static_cast<unsigned>(std::lround(v * max_code));
        const std::size_t k = (c * nc + ch) * bytes_per_sample;
        if (bytes_per_sample == 2) {
          rows[r][k] = static_cast<png_byte>(code >> 8);
          rows[r][k + 1] = static_cast<png_byte>(code & 0xFF);
        } else {
          rows[r][k] = static_cast<png_byte>(code);
        }
      }
    }
  }

  ErrorSink sink{};
  WriteHandles h;
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_error, on_warning);
  if (h.png == nullptr) throw Error(ErrorCode::kIo, "png_create_write_struct failed");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw Error(ErrorCode::kIo, "png_create_info_struct failed");
  std::vector<std::byte> out;
  WriteSink ws{&out};
  const int color = nc == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  if (!write_all(h.png, h.info, &ws, static_cast<png_uint_32>(field.width()),
                 static_cast<png_uint_32>(field.height()), bit_depth, color, rows.data())) {
    throw Error(ErrorCode::kIo, std::string("PNG encode: ") + sink.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const MultiChannelField& field, int bit_depth) {
  write_file_atomic(path, encode_png(field, bit_depth));
}

}  // namespace emdtex::io
