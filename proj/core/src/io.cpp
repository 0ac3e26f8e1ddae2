#include "inspect/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "inspect/errors.hpp"

namespace inspect {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

void require_header(const std::vector<std::uint8_t>& bytes, std::size_t need,
                    const fs::path& path) {
  if (bytes.size() < need) {
    throw TruncatedError(path.string() + ": truncated header: expected " + std::to_string(need) +
                         " bytes, got " + std::to_string(bytes.size()));
  }
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  if (raw.size() < 2 || raw[0] != 0x1f || raw[1] != 0x8b) return raw;

  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (gz == nullptr) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  for (;;) {
    const int n = gzread(gz, buf, sizeof buf);
    if (n < 0) {
      int code = 0;
      const std::string msg = gzerror(gz, &code);
      gzclose(gz);
      throw FormatError(path.string() + ": gzip error: " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  gzclose(gz);
  return out;
}

std::vector<PixelField> DatasetHandle::with_label(int label) const {
  if (!has_labels) throw DomainError("dataset has no labels");
  std::vector<PixelField> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (labels[i] == label) out.push_back(images[i]);
  }
  return out;
}

std::vector<int> DatasetHandle::distinct_labels() const {
  const std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

DatasetHandle load_idx(const fs::path& images, const fs::path& labels, int pad_to) {
  const auto img = read_file_bytes(images);
  require_header(img, 4, images);
  const std::uint32_t magic = read_be32(img, 0);
  if (magic != kImageMagic) {
    throw BadMagicError(images.string() + ": bad magic 0x" +
                        [&] {
                          char s[9];
                          std::snprintf(s, sizeof s, "%08x", magic);
                          return std::string(s);
                        }() +
                        ", expected 0x00000803");
  }
  require_header(img, 16, images);
  const std::size_t n = read_be32(img, 4);
  const int rows = static_cast<int>(read_be32(img, 8));
  const int cols = static_cast<int>(read_be32(img, 12));
  const std::size_t plane = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t expected = 16 + n * plane;
  if (img.size() < expected) {
    throw TruncatedError(images.string() + ": truncated payload: expected " +
                         std::to_string(expected) + " bytes, got " + std::to_string(img.size()));
  }

  int pad_r = 0, pad_c = 0;
  int out_h = rows, out_w = cols;
  if (pad_to > 0) {
    if (pad_to < rows || pad_to < cols || (pad_to - rows) % 2 != 0 || (pad_to - cols) % 2 != 0) {
      throw ShapeError("cannot pad " + std::to_string(rows) + "x" + std::to_string(cols) +
                       " symmetrically to " + std::to_string(pad_to));
    }
    pad_r = (pad_to - rows) / 2;
    pad_c = (pad_to - cols) / 2;
    out_h = out_w = pad_to;
  }

  DatasetHandle h;
  h.kind = SourceKind::Idx;
  h.shape = Shape{1, out_h, out_w};
  h.padding = pad_r;
  h.images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PixelField f(h.shape);
    const std::uint8_t* src = img.data() + 16 + i * plane;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        f.at(0, r + pad_r, c + pad_c) = src[r * cols + c] / 255.0;
      }
    }
    h.images.push_back(std::move(f));
  }

  if (!labels.empty()) {
    const auto lab = read_file_bytes(labels);
    require_header(lab, 4, labels);
    if (read_be32(lab, 0) != kLabelMagic) {
      throw BadMagicError(labels.string() + ": bad magic, expected 0x00000801");
    }
    require_header(lab, 8, labels);
    const std::size_t ln = read_be32(lab, 4);
    if (lab.size() < 8 + ln) {
      throw TruncatedError(labels.string() + ": truncated payload: expected " +
                           std::to_string(8 + ln) + " bytes, got " + std::to_string(lab.size()));
    }
    if (ln != n) {
      throw CountMismatchError("label count " + std::to_string(ln) + " != image count " +
                               std::to_string(n));
    }
    h.has_labels = true;
    h.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(n));
    for (int l : h.distinct_labels()) h.class_names.push_back(std::to_string(l));
  }
  return h;
}

void write_idx(const fs::path& images, const fs::path& labels,
               const std::vector<PixelField>& data, const std::vector<int>& label_values) {
  if (data.empty()) throw DomainError("write_idx: no images");
  const Shape shape = data.front().shape();
  if (shape.channels != 1) throw ShapeError("write_idx: IDX images are single-channel");
  std::ofstream out(images, std::ios::binary);
  if (!out) throw IoError("cannot write " + images.string());
  put_be32(out, kImageMagic);
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  put_be32(out, static_cast<std::uint32_t>(shape.height));
  put_be32(out, static_cast<std::uint32_t>(shape.width));
  for (const auto& f : data) {
    require_same(f.shape(), shape, "write_idx");
    for (double v : f.values()) out.put(static_cast<char>(to_byte(v)));
  }
  if (!out) throw IoError("write failed: " + images.string());
  if (labels.empty()) return;
  if (label_values.size() != data.size()) {
    throw CountMismatchError("write_idx: label count differs from image count");
  }
  std::ofstream lo(labels, std::ios::binary);
  if (!lo) throw IoError("cannot write " + labels.string());
  put_be32(lo, kLabelMagic);
  put_be32(lo, static_cast<std::uint32_t>(label_values.size()));
  for (int l : label_values) lo.put(static_cast<char>(static_cast<std::uint8_t>(l)));
  if (!lo) throw IoError("write failed: " + labels.string());
}

namespace {

struct PnmCursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;
  const fs::path& path;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int number() {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw FormatError(path.string() + ": malformed PNM header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1L << 24)) throw FormatError(path.string() + ": PNM header value too large");
    }
    return static_cast<int>(v);
  }
};

}  // namespace

PixelField read_pnm(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(path.string() + ": unsupported image format (need binary P5/P6)");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmCursor cur{bytes, 2, path};
  const int width = cur.number();
  const int height = cur.number();
  const int maxval = cur.number();
  if (width <= 0 || height <= 0) throw FormatError(path.string() + ": empty image");
  if (maxval <= 0 || maxval > 255) {
    throw FormatError(path.string() + ": unsupported maxval " + std::to_string(maxval));
  }
  if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) {
    throw FormatError(path.string() + ": malformed PNM header");
  }
  ++cur.pos;
  const Shape shape{channels, height, width};
  const std::size_t expected = cur.pos + shape.size();
  if (bytes.size() < expected) {
    throw TruncatedError(path.string() + ": truncated payload: expected " +
                         std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  PixelField f(shape);
  const std::uint8_t* src = bytes.data() + cur.pos;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        f.at(ch, r, c) = static_cast<double>(*src++) / maxval;
      }
    }
  }
  return f;
}

void write_pnm(const fs::path& path, const PixelField& image) {
  const Shape s = image.shape();
  if (s.channels != 1 && s.channels != 3) {
    throw ShapeError("write_pnm: need 1 or 3 channels, got " + s.str());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (s.channels == 1 ? "P5" : "P6") << '\n' << s.width << ' ' << s.height << "\n255\n";
  std::vector<char> buf;
  buf.reserve(s.size());
  for (int r = 0; r < s.height; ++r) {
    for (int c = 0; c < s.width; ++c) {
      for (int ch = 0; ch < s.channels; ++ch) {
        buf.push_back(static_cast<char>(to_byte(image.at(ch, r, c))));
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

bool is_hidden(const fs::path& p) {
  const auto name = p.filename().string();
  return !name.empty() && name[0] == '.';
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
  std::vector<fs::path> out;
  for (const auto& e : it) {
    if (is_hidden(e.path())) continue;
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void add_images(DatasetHandle& h, const fs::path& dir, int label) {
  for (const auto& file : sorted_entries(dir, false)) {
    auto ext = file.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".pgm" && ext != ".ppm") {
      throw FormatError(file.string() + ": unsupported format (expected .pgm or .ppm)");
    }
    PixelField img = read_pnm(file);
    if (h.images.empty()) {
      h.shape = img.shape();
    } else if (img.shape() != h.shape) {
      throw ShapeError(file.string() + ": mixed shapes " + img.shape().str() + " vs " +
                       h.shape.str());
    }
    h.images.push_back(std::move(img));
    if (label >= 0) h.labels.push_back(label);
  }
}

}  // namespace

DatasetHandle load_image_dir(const fs::path& dir, DirLayout layout) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  DatasetHandle h;
  h.kind = SourceKind::ImageDir;
  if (layout == DirLayout::Flat) {
    add_images(h, dir, -1);
  } else {
    h.has_labels = true;
    int label = 0;
    for (const auto& sub : sorted_entries(dir, true)) {
      h.class_names.push_back(sub.filename().string());
      add_images(h, sub, label++);
    }
  }
  if (h.images.empty()) throw IoError("no images found under " + dir.string());
  return h;
}

}  // namespace inspect
