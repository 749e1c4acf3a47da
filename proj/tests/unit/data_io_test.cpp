#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "maga/corpus.hpp"
#include "maga/corruption.hpp"
#include "maga/errors.hpp"
#include "maga/netpbm.hpp"
#include "maga/scene.hpp"
#include "test_util.hpp"

namespace maga {
namespace {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void expect_support_subset(const Tensor& input, const Tensor& gt) {
  ASSERT_EQ(input.shape(), gt.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.values()[i] != 0.0) {
      EXPECT_NE(gt.values()[i], 0.0);
      EXPECT_EQ(input.values()[i], gt.values()[i]);
    }
  }
}

std::size_t nonzeros(const Tensor& t) {
  return static_cast<std::size_t>(std::count_if(t.values().begin(), t.values().end(), [](double v) { return v != 0.0; }));
}

SceneSpec small_spec(std::uint64_t seed, std::size_t n = 32) {
  SceneSpec s;
  s.seed = seed;
  s.height = n;
  s.width = n;
  return s;
}

double uv(std::size_t i, std::size_t n) { return (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n) - 1.0; }

TEST(RenderTest, EmptySceneIsFarBackground) {
  const SceneSpec spec = small_spec(1, 16);
  const RenderedScene r = render_primitives({}, spec);
  for (double v : r.depth_gt.values()) EXPECT_EQ(v, 10.0);
  ASSERT_EQ(r.color.shape(), (Shape{16, 16, 3}));
}

TEST(RenderTest, CoveringPlaneGivesConstantDepth) {
  Plane p;
  p.z0 = 2.0;
  const RenderedScene r = render_primitives({p}, small_spec(1, 16));
  for (double v : r.depth_gt.values()) EXPECT_EQ(v, 2.0);
}

TEST(RenderTest, OverlappingSpheresMatchAnalyticZBuffer) {
  Sphere a;
  a.cu = -0.2;
  a.radius = 0.6;
  a.cz = 4.0;
  a.depth_radius = 1.0;
  Sphere b;
  b.cu = 0.3;
  b.cv = 0.1;
  b.radius = 0.5;
  b.cz = 3.5;
  b.depth_radius = 0.5;
  const std::size_t n = 32;
  const RenderedScene r = render_primitives({a, b}, small_spec(1, n));
  std::size_t both = 0;
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double u = uv(x, n), v = uv(y, n);
      double want = 10.0;
      int hits = 0;
      for (const Sphere& s : {a, b}) {
        const double d2 = (u - s.cu) * (u - s.cu) + (v - s.cv) * (v - s.cv);
        if (d2 <= s.radius * s.radius) {
          want = std::min(want, s.cz - s.depth_radius * std::sqrt(1.0 - d2 / (s.radius * s.radius)));
          ++hits;
        }
      }
      both += hits == 2;
      EXPECT_NEAR(r.depth_gt.at({y, x, 0}), want, 1e-12) << y << "," << x;
    }
  }
  EXPECT_GT(both, 0u);
}

TEST(RenderTest, SceneIsDeterministicAndInRange) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RenderedScene a = render_scene(small_spec(seed));
    const RenderedScene b = render_scene(small_spec(seed));
    test::expect_bit_equal(a.depth_gt, b.depth_gt);
    test::expect_bit_equal(a.color, b.color);
    for (double v : a.depth_gt.values()) {
      EXPECT_GE(v, 1.0);
      EXPECT_LE(v, 10.0);
    }
    for (double v : a.color.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    const std::size_t count = sample_primitives(small_spec(seed)).size();
    EXPECT_GE(count, 3u);
    EXPECT_LE(count, 8u);
  }
}

TEST(RenderTest, RejectsExtentNotDivisibleByEight) {
  EXPECT_THROW(render_scene(small_spec(1, 20)), ArgumentError);
}

TEST(CorruptRawTest, ConstantSceneHasOnlyBlobHoles) {
  const Tensor flat({32, 32, 1}, 4.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RawCorruptionParams no_edges;
    no_edges.edge_threshold = 1e9;
    const Tensor out = corrupt_raw(flat, seed);
    test::expect_bit_equal(out, corrupt_raw(flat, seed, no_edges));
    EXPECT_GT(missing_fraction(out), 0.0);
    EXPECT_LE(missing_fraction(out), 0.25);
  }
}

TEST(CorruptRawTest, EdgeBandAroundDiscontinuity) {
  std::vector<double> v(16 * 16);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) v[y * 16 + x] = x < 8 ? 2.0 : 6.0;
  }
  RawCorruptionParams p;
  p.min_blobs = 0;
  p.max_blobs = 0;
  p.min_coverage = 0.0;
  p.max_coverage = 0.0;
  const Tensor out = corrupt_raw(Tensor({16, 16, 1}, v), 3, p);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      EXPECT_EQ(out.at({y, x, 0}) == 0.0, x >= 7 && x <= 9) << y << "," << x;
    }
  }
}

TEST(CorruptRawTest, MissingFractionBoundedOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Tensor gt = render_scene(small_spec(seed, 64)).depth_gt;
    const Tensor in = corrupt_raw(gt, raw_seed_for(seed));
    const double missing = missing_fraction(in);
    EXPECT_GE(missing, 0.05) << seed;
    EXPECT_LE(missing, 0.45) << seed;
    expect_support_subset(in, gt);
  }
}

TEST(CorruptRawTest, SameSeedSameMask) {
  const Tensor gt = render_scene(small_spec(4)).depth_gt;
  test::expect_bit_equal(corrupt_raw(gt, 9), corrupt_raw(gt, 9));
  EXPECT_THROW(corrupt_raw(Tensor({4, 4, 2}, 1.0), 1), DimensionError);
}

TEST(CorruptSparseTest, AllPixelsKeepsEverything) {
  const Tensor gt = render_scene(small_spec(5, 16)).depth_gt;
  test::expect_bit_equal(corrupt_sparse(gt, 256, 1), gt);
}

TEST(CorruptSparseTest, FiveHundredOnSixtyFour) {
  const Tensor gt = render_scene(small_spec(6, 64)).depth_gt;
  const Tensor in = corrupt_sparse(gt, 500, 11);
  EXPECT_EQ(nonzeros(in), 500u);
  expect_support_subset(in, gt);
}

TEST(CorruptSparseTest, SeedsChangeSupportNotCardinality) {
  const Tensor gt = render_scene(small_spec(7, 32)).depth_gt;
  const Tensor a = corrupt_sparse(gt, 100, 1);
  const Tensor b = corrupt_sparse(gt, 100, 2);
  EXPECT_EQ(nonzeros(a), 100u);
  EXPECT_EQ(nonzeros(b), 100u);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += (a.values()[i] == 0.0) != (b.values()[i] == 0.0);
  EXPECT_GT(differ, 0u);
  test::expect_bit_equal(a, corrupt_sparse(gt, 100, 1));
}

TEST(CorruptSparseTest, CountTooLargeAndDepthCap) {
  const Tensor gt = render_scene(small_spec(8, 16)).depth_gt;
  EXPECT_THROW(corrupt_sparse(gt, 257, 1), ArgumentError);
  const Tensor capped = corrupt_sparse(gt, 10, 3, 10.0 - 1e-9);
  for (double v : capped.values()) EXPECT_LT(v, 10.0);
}

TEST(NetpbmTest, HandEncodedDepthPixel) {
  const std::vector<std::uint8_t> bytes = encode_depth_pgm(Tensor({1, 1, 1}, std::vector<double>{1.234}));
  const std::string header = "P5\n1 1\n65535\n";
  ASSERT_EQ(bytes.size(), header.size() + 2);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
  EXPECT_EQ(bytes[header.size()], 0x04);
  EXPECT_EQ(bytes[header.size() + 1], 0xD2);
}

TEST(NetpbmTest, DepthRoundTripWithinHalfMillimetre) {
  SplitMix64 rng(41);
  const Tensor d = test::random_tensor(rng, {9, 7, 1}, 0.0, 60.0);
  const Tensor back = decode_depth_pgm(encode_depth_pgm(d));
  ASSERT_EQ(back.shape(), d.shape());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_LE(std::abs(back.values()[i] - d.values()[i]), 0.0005 + 1e-12);
  test::expect_bit_equal(back, quantize_depth(d));
  EXPECT_EQ(encode_depth_pgm(back), encode_depth_pgm(d));
}

TEST(NetpbmTest, ColorRoundTrip) {
  SplitMix64 rng(42);
  const Tensor c = test::random_tensor(rng, {5, 6, 3}, 0.0, 1.0);
  const Tensor back = decode_color_ppm(encode_color_ppm(c));
  test::expect_bit_equal(back, quantize_color(c));
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(std::abs(back.values()[i] - c.values()[i]), 0.5 / 255 + 1e-12);
}

TEST(NetpbmTest, SingleCommentAcceptedSecondRejected) {
  std::string one = "P5\n# made by hand\n1 1\n65535\n";
  one += '\x04';
  one += '\xD2';
  const Tensor t = decode_depth_pgm(std::vector<std::uint8_t>(one.begin(), one.end()));
  EXPECT_DOUBLE_EQ(t.item(), 1.234);
  std::string two = "P5\n# one\n# two\n1 1\n65535\n";
  two += "\x04\xD2";
  EXPECT_THROW(decode_depth_pgm(std::vector<std::uint8_t>(two.begin(), two.end())), FormatError);
}

TEST(NetpbmTest, MalformedInputsCarryOffsets) {
  const std::vector<std::uint8_t> good = encode_depth_pgm(Tensor({2, 2, 1}, 1.0));
  auto expect_format = [](const std::vector<std::uint8_t>& b, std::size_t want_offset) {
    try {
      decode_depth_pgm(b);
      ADD_FAILURE() << "expected FormatError";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), want_offset) << e.what();
    }
  };
  auto bad_magic = good;
  bad_magic[1] = '6';
  expect_format(bad_magic, 0);
  const std::string maxval = "P5\n2 2\n255\n";
  std::vector<std::uint8_t> mv(maxval.begin(), maxval.end());
  mv.resize(mv.size() + 4, 0);
  EXPECT_THROW(decode_depth_pgm(mv), FormatError);
  auto truncated = good;
  truncated.pop_back();
  expect_format(truncated, truncated.size());
  auto oversized = good;
  oversized.push_back(0);
  expect_format(oversized, good.size());
  const std::string garbage = "P5\nx 2\n65535\n";
  EXPECT_THROW(decode_depth_pgm(std::vector<std::uint8_t>(garbage.begin(), garbage.end())), FormatError);
  EXPECT_THROW(decode_color_ppm(good), FormatError);
}

TEST(NetpbmTest, RejectsOutOfRangeValues) {
  EXPECT_THROW(encode_depth_pgm(Tensor({1, 1, 1}, -1.0)), ArgumentError);
  EXPECT_THROW(encode_depth_pgm(Tensor({1, 1, 1}, 70.0)), ArgumentError);
  EXPECT_THROW(encode_color_ppm(Tensor({1, 1, 3}, 1.5)), ArgumentError);
  EXPECT_THROW(encode_depth_pgm(Tensor({1, 1, 3}, 1.0)), DimensionError);
}

TEST(CorpusTest, WriteRereadRewriteIsBitIdentical) {
  test::TempDir dir("corpus_rt");
  CorpusSpec spec;
  spec.out_dir = dir.str();
  spec.train_count = 3;
  spec.val_count = 2;
  spec.size = 16;
  spec.sparse_count = 40;
  spec.seed = 5;
  write_corpus(spec);
  std::size_t files = 0;
  for (const std::string split : {"train", "val"}) {
    const std::size_t count = split == "train" ? 3 : 2;
    for (std::size_t i = 0; i < count; ++i) {
      const std::string stem = sample_stem(dir.str(), split, i);
      for (const std::string suffix : {"_raw.pgm", "_sparse.pgm", "_gt.pgm"}) {
        const std::string path = stem + suffix;
        const std::vector<std::uint8_t> before = read_bytes(path);
        write_depth_pgm(path, read_depth_pgm(path));
        EXPECT_EQ(read_bytes(path), before) << path;
        ++files;
      }
      const std::string path = stem + "_color.ppm";
      const std::vector<std::uint8_t> before = read_bytes(path);
      write_color_ppm(path, read_color_ppm(path));
      EXPECT_EQ(read_bytes(path), before) << path;
      ++files;
    }
  }
  EXPECT_EQ(files, 20u);
}

TEST(CorpusTest, LayoutManifestAndLoad) {
  test::TempDir dir("corpus_layout");
  CorpusSpec spec;
  spec.out_dir = dir.str();
  spec.train_count = 3;
  spec.val_count = 1;
  spec.size = 16;
  spec.sparse_count = 30;
  const std::vector<ManifestRow> rows = write_corpus(spec);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(fs::exists(dir.path() / "train" / "00002_gt.pgm"));
  EXPECT_TRUE(fs::exists(dir.path() / "val" / "00000_color.ppm"));
  const std::vector<ManifestRow> back = read_manifest(dir.str());
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].split, rows[i].split);
    EXPECT_EQ(back[i].index, rows[i].index);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].sparse_count, 30u);
  }
  const std::string manifest = [&] {
    const auto b = read_bytes((dir.path() / "manifest.tsv").string());
    return std::string(b.begin(), b.end());
  }();
  EXPECT_EQ(manifest.find('\r'), std::string::npos);
  EXPECT_NE(manifest.find('\t'), std::string::npos);

  const std::vector<Sample> train = load_split(dir.str(), "train");
  ASSERT_EQ(train.size(), 3u);
  for (const Sample& s : train) {
    EXPECT_EQ(nonzeros(s.depth_input), 30u);
    expect_support_subset(s.depth_input, s.depth_gt);
    for (double v : s.depth_gt.values()) EXPECT_GT(v, 0.0);
    EXPECT_EQ(s.color.shape(), (Shape{16, 16, 3}));
  }
  const std::vector<Sample> raw = load_split(dir.str(), "train", Protocol::raw);
  for (const Sample& s : raw) expect_support_subset(s.depth_input, s.depth_gt);
  EXPECT_THROW(load_split(dir.str(), "test"), ArgumentError);
}

TEST(CorpusTest, ThreadCountDoesNotChangeBytes) {
  test::TempDir a("corpus_t1");
  test::TempDir b("corpus_t3");
  CorpusSpec spec;
  spec.train_count = 4;
  spec.val_count = 2;
  spec.size = 16;
  spec.sparse_count = 20;
  spec.seed = 9;
  spec.out_dir = a.str();
  write_corpus(spec, 1);
  spec.out_dir = b.str();
  write_corpus(spec, 3);
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a.path());
    EXPECT_EQ(read_bytes(entry.path().string()), read_bytes((b.path() / rel).string())) << rel;
  }
}

TEST(CorpusTest, GenerateSampleIsDeterministic) {
  SampleOptions o;
  o.size = 16;
  o.sparse_count = 25;
  const Sample a = generate_sample(77, o);
  const Sample b = generate_sample(77, o);
  test::expect_bit_equal(a.depth_input, b.depth_input);
  test::expect_bit_equal(a.color, b.color);
  EXPECT_EQ(nonzeros(a.depth_input), 25u);
  EXPECT_NE(scene_seed_for(1, "train", 0), scene_seed_for(1, "val", 0));
  EXPECT_NE(scene_seed_for(1, "train", 0), scene_seed_for(1, "train", 1));
  EXPECT_EQ(parse_protocol("raw"), Protocol::raw);
  EXPECT_EQ(to_string(Protocol::sparse), "sparse");
  EXPECT_THROW(parse_protocol("dense"), ArgumentError);
}

}  // namespace
}  // namespace maga
