#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "inspect/io.hpp"
#include "temp_dir.hpp"

using namespace inspect;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_gz(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  gzFile gz = gzopen(p.string().c_str(), "wb");
  gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(gz);
}

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8), std::uint8_t(v)};
}

std::vector<std::uint8_t> idx_images(std::uint32_t magic, std::uint32_t n, std::uint32_t rows,
                                     std::uint32_t cols, std::size_t payload) {
  std::vector<std::uint8_t> b;
  for (auto v : {magic, n, rows, cols}) {
    const auto w = be32(v);
    b.insert(b.end(), w.begin(), w.end());
  }
  for (std::size_t i = 0; i < payload; ++i) b.push_back(static_cast<std::uint8_t>(i % 256));
  return b;
}

std::vector<std::uint8_t> idx_labels(std::uint32_t n, std::vector<std::uint8_t> labels) {
  auto b = be32(0x801);
  const auto w = be32(n);
  b.insert(b.end(), w.begin(), w.end());
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

}  // namespace

TEST_CASE("IDX pair: parse, scale and pad") {
  TempDir dir;
  write_bytes(dir / "img", idx_images(0x803, 3, 2, 4, 24));
  write_gz(dir / "lab.gz", idx_labels(3, {7, 0, 7}));
  const DatasetHandle h = load_idx(dir / "img", dir / "lab.gz");
  CHECK(h.count() == 3);
  CHECK(h.shape == Shape{1, 2, 4});
  CHECK(h.has_labels);
  CHECK(h.labels == std::vector<int>{7, 0, 7});
  CHECK(h.distinct_labels() == std::vector<int>{0, 7});
  CHECK(h.images[1].at(0, 0, 0) == doctest::Approx(8.0 / 255.0));
  CHECK(h.with_label(7).size() == 2);

  const DatasetHandle p = load_idx(dir / "img", {}, 8);
  CHECK(p.shape == Shape{1, 8, 8});
  CHECK(p.padding == 3);
  CHECK_FALSE(p.has_labels);
  CHECK(p.images[0].at(0, 3, 2) == 0.0);
  CHECK(p.images[0].at(0, 3, 3) == doctest::Approx(1.0 / 255.0));
  CHECK(p.images[0].at(0, 0, 0) == 0.0);
  CHECK_THROWS_AS(load_idx(dir / "img", {}, 7), ShapeError);
}

TEST_CASE("IDX errors are distinct") {
  TempDir dir;
  write_bytes(dir / "labels-as-images", idx_labels(2, {1, 2}));
  CHECK_THROWS_AS(load_idx(dir / "labels-as-images"), BadMagicError);

  write_bytes(dir / "short", idx_images(0x803, 2, 4, 4, 20));
  try {
    load_idx(dir / "short");
    FAIL("expected a truncation error");
  } catch (const TruncatedError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(msg.find("expected 48") != std::string::npos);
    CHECK(msg.find("got 36") != std::string::npos);
  }

  write_bytes(dir / "img", idx_images(0x803, 2, 2, 2, 8));
  write_bytes(dir / "lab", idx_labels(3, {1, 2, 3}));
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lab"), CountMismatchError);
  write_bytes(dir / "badlab", idx_images(0x803, 2, 2, 2, 8));
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "badlab"), BadMagicError);
  CHECK_THROWS_AS(load_idx(dir / "missing"), IoError);
}

TEST_CASE("IDX writer round-trips") {
  TempDir dir;
  std::vector<PixelField> imgs(2, PixelField(Shape{1, 4, 6}));
  imgs[0].at(0, 1, 2) = 1.0;
  imgs[1].at(0, 3, 5) = 128.0 / 255.0;
  write_idx(dir / "i", dir / "l", imgs, {4, 9});
  const DatasetHandle h = load_idx(dir / "i", dir / "l");
  CHECK(h.images[0] == imgs[0]);
  CHECK(h.images[1] == imgs[1]);
  CHECK(h.labels == std::vector<int>{4, 9});
}

TEST_CASE("shipped MNIST subset headers") {
  const fs::path root = INSPECT_DATA_DIR;
  const DatasetHandle h = load_idx(root / "mnist5k-images-idx3-ubyte.gz",
                                   root / "mnist5k-labels-idx1-ubyte.gz");
  CHECK(h.count() == 5000);
  CHECK(h.shape == Shape{1, 28, 28});
  CHECK(h.distinct_labels().size() == 10);
}

TEST_CASE("PNM codec") {
  TempDir dir;
  {
    std::ofstream out(dir / "red.ppm", std::ios::binary);
    out << "P6\n# comment\n2 1\n255\n";
    const char px[] = {'\xff', 0, 0, 0, '\x80', 0};
    out.write(px, 6);
  }
  const PixelField red = read_pnm(dir / "red.ppm");
  CHECK(red.shape() == Shape{3, 1, 2});
  CHECK(red.at(0, 0, 0) == 1.0);
  CHECK(red.at(1, 0, 0) == 0.0);
  CHECK(red.at(2, 0, 0) == 0.0);
  CHECK(red.at(1, 0, 1) == doctest::Approx(128.0 / 255.0));

  PixelField g(Shape{1, 3, 5});
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i * 17 % 256) / 255.0;
  write_pnm(dir / "g.pgm", g);
  CHECK(read_pnm(dir / "g.pgm") == g);
  write_pnm(dir / "red2.ppm", red);
  CHECK(read_pnm(dir / "red2.ppm") == red);

  {
    std::ofstream out(dir / "ascii.pgm");
    out << "P2\n1 1\n255\n0\n";
  }
  CHECK_THROWS_AS(read_pnm(dir / "ascii.pgm"), FormatError);
  {
    std::ofstream out(dir / "short.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n" << "abc";
  }
  CHECK_THROWS_AS(read_pnm(dir / "short.pgm"), TruncatedError);
  {
    std::ofstream out(dir / "wide.pgm", std::ios::binary);
    out << "P5\n1 1\n65535\n" << "ab";
  }
  CHECK_THROWS_AS(read_pnm(dir / "wide.pgm"), FormatError);
}

TEST_CASE("image directories: flat and per-class layouts") {
  TempDir dir;
  fs::create_directories(dir / "flat");
  PixelField img(Shape{1, 4, 4}, 0.5);
  for (int i = 0; i < 3; ++i) write_pnm(dir / ("flat/" + std::to_string(i) + ".pgm"), img);
  const DatasetHandle flat = load_image_dir(dir / "flat", DirLayout::Flat);
  CHECK(flat.kind == SourceKind::ImageDir);
  CHECK(flat.count() == 3);
  CHECK_FALSE(flat.has_labels);

  fs::create_directories(dir / "classes/ship");
  fs::create_directories(dir / "classes/cat");
  write_pnm(dir / "classes/ship/a.pgm", img);
  write_pnm(dir / "classes/cat/a.pgm", img);
  write_pnm(dir / "classes/cat/b.pgm", img);
  const DatasetHandle cls = load_image_dir(dir / "classes", DirLayout::PerClassSubdirs);
  CHECK(cls.class_names == std::vector<std::string>{"cat", "ship"});
  CHECK(cls.labels == std::vector<int>{0, 0, 1});

  write_pnm(dir / "flat/odd.pgm", PixelField(Shape{1, 2, 2}));
  CHECK_THROWS_AS(load_image_dir(dir / "flat", DirLayout::Flat), ShapeError);
  fs::remove(dir / "flat/odd.pgm");
  { std::ofstream(dir / "flat/notes.txt") << "x"; }
  CHECK_THROWS_AS(load_image_dir(dir / "flat", DirLayout::Flat), FormatError);
  CHECK_THROWS_AS(load_image_dir(dir / "nowhere", DirLayout::Flat), IoError);
}
