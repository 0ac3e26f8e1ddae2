// Writes small image directories for the command-line tests.
//   inspect_fixture identical <dir> <count> <size>
//   inspect_fixture blobs <dir> <count> <size> <seed>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "inspect/io.hpp"
#include "inspect/rng.hpp"

namespace fs = std::filesystem;

namespace {

inspect::PixelField blob(int size, inspect::Rng& rng) {
  inspect::PixelField img(inspect::Shape{1, size, size});
  const double cy = size * (0.35 + 0.3 * rng.uniform());
  const double cx = size * (0.35 + 0.3 * rng.uniform());
  const double r = size * (0.15 + 0.1 * rng.uniform());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      img.at(0, y, x) = std::exp(-0.5 * d2 / (r * r));
    }
  }
  return img;
}

std::string name(int i) {
  std::string s = std::to_string(i);
  return "img_" + std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s + ".pgm";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 5) {
    std::cerr << "usage: inspect_fixture identical|blobs <dir> <count> <size> [seed]\n";
    return 2;
  }
  const std::string mode = argv[1];
  const fs::path dir = argv[2];
  const int count = std::stoi(argv[3]);
  const int size = std::stoi(argv[4]);
  fs::create_directories(dir);
  inspect::Rng rng = inspect::Rng::derive(argc > 5 ? std::stoull(argv[5]) : 1, "fixture");
  const inspect::PixelField fixed = blob(size, rng);
  for (int i = 0; i < count; ++i) {
    inspect::write_pnm(dir / name(i), mode == "identical" ? fixed : blob(size, rng));
  }
  return 0;
}
