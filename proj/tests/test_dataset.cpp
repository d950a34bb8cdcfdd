#include <fstream>

#include "doctest.h"
#include "metapipe/classifiers.hpp"
#include "metapipe/dataset.hpp"
#include "test_helpers.hpp"

using namespace metapipe;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

RgbImage solid(std::size_t h, std::size_t w, std::uint8_t v) {
  return {h, w, std::vector<std::uint8_t>(h * w * 3, v)};
}

}  // namespace

TEST_CASE("load_labeled_images follows csv order") {
  auto dir = test::scratch_dir("load_ok");
  write_png(dir / "a.png", solid(2, 2, 10));
  write_png(dir / "b.png", solid(2, 2, 200));
  write_text(dir / "labels.csv", "id,label\na,1\nb,0\n");
  auto set = load_labeled_images(dir, dir / "labels.csv");
  REQUIRE(set.size() == 2);
  CHECK(set.ids == std::vector<std::string>{"a", "b"});
  CHECK(set.labels == Labels{1, 0});
  CHECK(set.height == 2);
  CHECK(set.width == 2);
  CHECK(set.images[1].pixels[0] == 200);

  write_text(dir / "noheader.csv", "b,0\r\na,1\r\n");
  auto set2 = load_labeled_images(dir, dir / "noheader.csv");
  CHECK(set2.ids == std::vector<std::string>{"b", "a"});
}

TEST_CASE("load_labeled_images error paths name the offender") {
  auto dir = test::scratch_dir("load_err");
  write_png(dir / "a.png", solid(2, 2, 1));
  write_png(dir / "big.png", solid(3, 2, 1));

  write_text(dir / "bad_label.csv", "a,2\n");
  try {
    load_labeled_images(dir, dir / "bad_label.csv");
    FAIL("expected rejection");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("'2'") != std::string::npos);
  }

  write_text(dir / "empty.csv", "");
  CHECK_THROWS_WITH_AS(load_labeled_images(dir, dir / "empty.csv"),
                       doctest::Contains("no samples"), Error);
  write_text(dir / "header_only.csv", "id,label\n");
  CHECK_THROWS_WITH_AS(load_labeled_images(dir, dir / "header_only.csv"),
                       doctest::Contains("no samples"), Error);

  write_text(dir / "missing.csv", "a,1\nghost,0\n");
  CHECK_THROWS_WITH_AS(load_labeled_images(dir, dir / "missing.csv"), doctest::Contains("ghost"),
                       Error);

  write_text(dir / "mismatch.csv", "a,1\nbig,0\n");
  CHECK_THROWS_WITH_AS(load_labeled_images(dir, dir / "mismatch.csv"), doctest::Contains("big"),
                       Error);

  write_text(dir / "junk.png", "not a png");
  write_text(dir / "junk.csv", "junk,1\n");
  CHECK_THROWS_WITH_AS(load_labeled_images(dir, dir / "junk.csv"), doctest::Contains("junk"),
                       Error);
}

TEST_CASE("flatten ordering") {
  LabeledImageSet one{{"p"}, {RgbImage{1, 1, {255, 0, 0}}}, {1}, 1, 1};
  auto x = flatten(one);
  CHECK(x == Matrix(1, 3, {255, 0, 0}));

  LabeledImageSet two{{"p"}, {RgbImage{1, 2, {1, 2, 3, 4, 5, 6}}}, {0}, 1, 2};
  CHECK(flatten(two) == Matrix(1, 6, {1, 2, 3, 4, 5, 6}));

  CHECK_THROWS_AS(flatten(LabeledImageSet{}), Error);
}

TEST_CASE("flatten round-trips random images") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const std::size_t h = 1 + rng.next_range(6), w = 1 + rng.next_range(6);
    LabeledImageSet set;
    set.height = h;
    set.width = w;
    for (int i = 0; i < 3; ++i) {
      RgbImage img{h, w, std::vector<std::uint8_t>(h * w * 3)};
      for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_range(256));
      set.ids.push_back(std::to_string(i));
      set.images.push_back(img);
      set.labels.push_back(i % 2);
    }
    auto x = flatten(set);
    REQUIRE(x.cols() == h * w * 3);
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(unflatten_row(x.row(i), h, w) == set.images[i]);
  }
}

TEST_CASE("png files round-trip through disk") {
  auto dir = test::scratch_dir("png_rt");
  Rng rng(4);
  RgbImage img{3, 5, std::vector<std::uint8_t>(45)};
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_range(256));
  write_png(dir / "x.png", img);
  CHECK(read_png(dir / "x.png") == img);
}

TEST_CASE("subsample") {
  Matrix x(6, 1, {0, 1, 2, 3, 4, 5});
  Labels y{0, 1, 0, 1, 0, 1};
  Rng r1(9), r2(9);
  auto full = subsample(x, y, 6, r1);
  std::vector<double> vals(full.x.data());
  std::sort(vals.begin(), vals.end());
  CHECK(vals == x.data());
  for (std::size_t i = 0; i < 6; ++i) CHECK(full.y[i] == static_cast<int>(full.x(i, 0)) % 2);

  auto again = subsample(x, y, 6, r2);
  CHECK(again.x == full.x);

  Rng r3(1);
  auto single = subsample(x, y, 1, r3);
  CHECK(single.x.rows() == 1);
  CHECK_THROWS_AS(subsample(x, y, 0, r3), Error);
  CHECK_THROWS_AS(subsample(x, y, 7, r3), Error);
}

TEST_CASE("synth_two_cluster") {
  Rng rng(2024);
  auto d = synth_two_cluster(7, 3, 4.0, 1.0, rng);
  CHECK(d.x.rows() == 7);
  CHECK(std::count(d.y.begin(), d.y.end(), 1) == 4);

  Rng bad(0);
  CHECK_THROWS_AS(synth_two_cluster(1, 3, 1.0, 1.0, bad), Error);
  CHECK_THROWS_AS(synth_two_cluster(4, 0, 1.0, 1.0, bad), Error);
  CHECK_THROWS_AS(synth_two_cluster(4, 2, 1.0, 0.0, bad), Error);
}

TEST_CASE("well separated synthetic clusters are linearly separable") {
  Rng rng(42);
  auto d = synth_two_cluster(200, 5, 10.0, 0.1, rng);
  // Per-axis class ranges do not overlap: every positive coordinate exceeds
  // every negative one, so the hyperplane sum(x) = 0 separates the classes.
  for (std::size_t c = 0; c < 5; ++c) {
    double min_pos = 1e300, max_neg = -1e300;
    for (std::size_t i = 0; i < d.x.rows(); ++i) {
      if (d.y[i]) min_pos = std::min(min_pos, d.x(i, c));
      else max_neg = std::max(max_neg, d.x(i, c));
    }
    CHECK(min_pos > max_neg);
  }
  auto model = logreg_fit(d.x, d.y, LogRegParams{});
  CHECK(accuracy(logreg_predict(model, d.x), d.y) == 1.0);
}

TEST_CASE("zero separation gives coin-flip accuracy") {
  Rng rng(5);
  auto train = synth_two_cluster(2000, 3, 0.0, 1.0, rng);
  auto test = synth_two_cluster(2000, 3, 0.0, 1.0, rng);
  auto model = logreg_fit(train.x, train.y, LogRegParams{});
  CHECK(accuracy(logreg_predict(model, test.x), test.y) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("features csv round-trip") {
  auto dir = test::scratch_dir("features_csv");
  Rng rng(8);
  auto d = synth_two_cluster(10, 4, 2.0, 1.0, rng);
  write_features_csv(dir / "f.csv", d);
  auto back = read_features_csv(dir / "f.csv");
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
}
