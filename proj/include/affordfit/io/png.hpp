#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace affordfit {

/// Binary image, row-major, nonzero = inside.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Bitmap() = default;
  Bitmap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool value = true) { data[static_cast<std::size_t>(y) * width + x] = value ? 255 : 0; }
  std::size_t count() const;
  bool operator==(const Bitmap&) const = default;
};

/// Any PNG colour type is accepted and reduced to grey; nonzero is inside.
Bitmap read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const Bitmap& mask);

}  // namespace affordfit
