#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "raylearn/common.hpp"
#include "raylearn/image.hpp"

using namespace raylearn;

namespace fs = std::filesystem;

namespace {

ImageBuffer random_image(int w, int h, uint64_t seed, double scale = 2.0) {
  ImageBuffer img(w, h);
  Rng rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, Rgb{rng.next_double(), rng.next_double(), rng.next_double()} * scale);
  return img;
}

std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("image buffer accumulates weighted means") {
  ImageBuffer img(4, 3);
  CHECK(img.value(1, 1) == Rgb{0, 0, 0});
  img.add(1, 1, Rgb{1, 2, 3});
  img.add(1, 1, Rgb{3, 2, 1});
  CHECK(img.value(1, 1) == Rgb{2, 2, 2});
  img.add(2, 0, Rgb{1, 1, 1}, 3.0);
  img.add(2, 0, Rgb{5, 5, 5}, 1.0);
  CHECK(img.value(2, 0) == Rgb{2, 2, 2});
  CHECK(img.sample_count(2, 0) == 4.0);
  CHECK(img.all_finite());
  CHECK_THROWS_AS(img.add(4, 0, Rgb{1, 1, 1}), ContractViolation);
  CHECK_THROWS_AS(ImageBuffer(0, 4), ContractViolation);
}

TEST_CASE("rmse basics") {
  ImageBuffer a = random_image(8, 6, 1);
  CHECK(rmse(a, a, false) == 0.0);
  CHECK(rmse(a, a, true) == 0.0);

  ImageBuffer b = a;
  Rgb v = b.value(3, 2);
  b.set(3, 2, Rgb{v.x + 0.7, v.y, v.z});
  CHECK(rmse(a, b, false) == doctest::Approx(0.7 / std::sqrt(3.0 * 8 * 6)).epsilon(1e-12));

  // Relative mode regularizes by b^2 + 1e-4.
  ImageBuffer black(2, 2), grey(2, 2);
  for (int i = 0; i < 4; ++i) grey.set(i % 2, i / 2, Rgb{0.5, 0.5, 0.5});
  double expect = std::sqrt(0.25 / (0.25 + 1e-4));
  CHECK(rmse(black, grey, true) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isfinite(rmse(grey, black, true)));  // division guarded at zero

  ImageBuffer wrong(3, 2);
  CHECK_THROWS_AS(rmse(a, wrong, false), ContractViolation);
}

TEST_CASE("false color palette") {
  std::vector<int> zeros(12, 0);
  ImageBuffer img = false_color_light_index(zeros, 4, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) CHECK(img.value(x, y) == palette_color(0));

  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      CHECK(length(palette_color(i) - palette_color(j)) > 0.2);

  CHECK(palette_color(3) == palette_color(3));
  CHECK_THROWS_AS(palette_color(-1), ContractViolation);
  CHECK_THROWS_AS(false_color_light_index(zeros, 5, 3), ContractViolation);
}

TEST_CASE("difference image") {
  ImageBuffer a = random_image(5, 5, 2, 1.0);
  ImageBuffer d0 = difference_image(a, a, 10.0);
  for (int i = 0; i < 25; ++i) CHECK(d0.value(i) == Rgb{0, 0, 0});

  ImageBuffer b = a;
  Rgb v = b.value(2, 2);
  b.set(2, 2, v + Rgb{0.1, 0.0, 3.0});
  ImageBuffer d = difference_image(a, b, 10.0);
  CHECK(d.value(2, 2).x == doctest::Approx(0.1).epsilon(1e-12));  // 10 * 0.01
  CHECK(d.value(2, 2).z == 1.0);                                  // clamped
  CHECK(d.value(1, 1) == Rgb{0, 0, 0});
}

TEST_CASE("ppm writing hits exact bytes at the ends of the range") {
  fs::path dir = fs::temp_directory_path() / "raylearn_image_test";
  fs::create_directories(dir);
  std::string path = (dir / "px.ppm").string();

  ImageBuffer black(1, 1);
  write_image(black, path, ImageFormat::kPpm);
  std::string data = read_bytes(path);
  REQUIRE(data.size() == 11 + 3);  // "P6\n1 1\n255\n" + 3 bytes
  CHECK(data.substr(0, 11) == "P6\n1 1\n255\n");
  CHECK(data[11] == 0);
  CHECK(data[12] == 0);
  CHECK(data[13] == 0);

  ImageBuffer white(1, 1);
  white.set(0, 0, Rgb{1, 1, 1});
  write_image(white, path, ImageFormat::kPpm);
  data = read_bytes(path);
  CHECK(uint8_t(data[11]) == 255);
  CHECK(uint8_t(data[13]) == 255);

  // Above-range values clamp; mid grey takes the sRGB curve.
  ImageBuffer grey(1, 1);
  grey.set(0, 0, Rgb{0.5, 2.5, 0.0031308});
  write_image(grey, path, ImageFormat::kPpm);
  data = read_bytes(path);
  CHECK(uint8_t(data[11]) == 188);  // round(255 * (1.055 * 0.5^(1/2.4) - 0.055))
  CHECK(uint8_t(data[12]) == 255);
  CHECK(uint8_t(data[13]) == 10);  // linear toe: round(255 * 12.92 * 0.0031308)

  fs::remove_all(dir);
}

TEST_CASE("pfm round trip is bit exact") {
  fs::path dir = fs::temp_directory_path() / "raylearn_image_test2";
  fs::create_directories(dir);
  std::string path = (dir / "img.pfm").string();

  ImageBuffer img = random_image(7, 5, 3, 4.0);
  write_image(img, path, ImageFormat::kPfm);
  ImageBuffer back = read_pfm(path);
  REQUIRE(back.width() == 7);
  REQUIRE(back.height() == 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      Rgb v = img.value(x, y), r = back.value(x, y);
      for (int c = 0; c < 3; ++c) CHECK(double(float(v[c])) == r[c]);
    }

  // Writing the same buffer twice gives identical files.
  std::string first = read_bytes(path);
  write_image(img, path, ImageFormat::kPfm);
  CHECK(read_bytes(path) == first);

  SUBCASE("rejects bad headers") {
    std::ofstream os(path, std::ios::binary);
    os << "P5\n2 2\n255\n";
    os.close();
    CHECK_THROWS_AS(read_pfm(path), IoError);
  }
  SUBCASE("rejects truncated data") {
    fs::resize_file(path, 30);
    CHECK_THROWS_AS(read_pfm(path), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("format from extension") {
  CHECK(format_for_path("out/render.ppm") == ImageFormat::kPpm);
  CHECK(format_for_path("x.pfm") == ImageFormat::kPfm);
  CHECK_THROWS_AS(format_for_path("image.png"), IoError);
  CHECK_THROWS_AS(format_for_path("noext"), IoError);
}
