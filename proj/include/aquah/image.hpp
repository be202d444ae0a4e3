#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aquah {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster with clipping drawing primitives.
class Canvas {
public:
  Canvas(int width, int height, Rgb background = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb get(int x, int y) const;
  void set(int x, int y, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);  // inclusive corners
  void rect_outline(int x0, int y0, int x1, int y1, Rgb c);
  void line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1);
  /// 5x7 glyphs at `scale`, one column of spacing; lower case renders as
  /// upper case and unknown characters as '?'. Returns the advance in pixels.
  int text(int x, int y, std::string_view s, Rgb c, int scale = 1);
  static int text_width(std::string_view s, int scale = 1);
  std::size_t count(Rgb c) const;
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  friend bool operator==(const Canvas&, const Canvas&) = default;

private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// PNG (8-bit RGB, filter 0, zlib level 9) bytes; identical canvases give
/// identical bytes.
std::string encode_png(const Canvas& canvas);
void write_png(const std::filesystem::path& path, const Canvas& canvas);

}  // namespace aquah
