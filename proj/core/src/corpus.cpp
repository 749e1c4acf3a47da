#include "maga/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "maga/corruption.hpp"
#include "maga/errors.hpp"
#include "maga/netpbm.hpp"
#include "maga/rng.hpp"
#include "maga/scene.hpp"

namespace maga {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "split\tindex\tseed\tprotocol\tsparse_count\tsize";

std::uint64_t split_stream(const std::string& split) {
  if (split == "train") return 1;
  if (split == "val") return 2;
  throw ArgumentError("unknown split " + split + " (expected train or val)");
}

void write_sample_files(const std::string& stem, const Sample& raw, const Sample& sparse) {
  write_color_ppm(stem + "_color.ppm", raw.color);
  write_depth_pgm(stem + "_gt.pgm", raw.depth_gt);
  write_depth_pgm(stem + "_raw.pgm", raw.depth_input);
  write_depth_pgm(stem + "_sparse.pgm", sparse.depth_input);
}

}  // namespace

std::string to_string(Protocol p) { return p == Protocol::raw ? "raw" : "sparse"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "raw") return Protocol::raw;
  if (s == "sparse") return Protocol::sparse;
  throw ArgumentError("unknown protocol " + s + " (expected raw or sparse)");
}

std::uint64_t scene_seed_for(std::uint64_t corpus_seed, const std::string& split, std::size_t index) {
  return derive_seed(derive_seed(corpus_seed, split_stream(split)), index);
}

std::uint64_t raw_seed_for(std::uint64_t scene_seed) { return derive_seed(scene_seed, 1); }
std::uint64_t sparse_seed_for(std::uint64_t scene_seed) { return derive_seed(scene_seed, 2); }

Sample generate_sample(std::uint64_t scene_seed, const SampleOptions& options) {
  SceneSpec spec;
  spec.seed = scene_seed;
  spec.height = spec.width = options.size;
  RenderedScene scene = render_scene(spec);
  Sample s;
  s.color = scene.color;
  s.depth_gt = scene.depth_gt;
  s.depth_input = options.protocol == Protocol::raw
                      ? corrupt_raw(scene.depth_gt, raw_seed_for(scene_seed))
                      : corrupt_sparse(scene.depth_gt, options.sparse_count, sparse_seed_for(scene_seed),
                                       options.depth_cap);
  s.meta = {scene_seed, options.protocol, options.sparse_count};
  return s;
}

std::string sample_stem(const std::string& corpus_dir, const std::string& split, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%05zu", index);
  return (fs::path(corpus_dir) / split / name).string();
}

std::vector<ManifestRow> write_corpus(const CorpusSpec& spec, std::size_t threads) {
  if (spec.train_count == 0) throw ArgumentError("corpus needs at least one training sample");
  std::vector<ManifestRow> rows;
  for (const char* split : {"train", "val"}) {
    const std::size_t n = std::string(split) == "train" ? spec.train_count : spec.val_count;
    fs::create_directories(fs::path(spec.out_dir) / split);
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({split, i, scene_seed_for(spec.seed, split, i), spec.protocol, spec.sparse_count, spec.size});
    }
  }

  SampleOptions raw_opts{spec.size, Protocol::raw, spec.sparse_count, spec.depth_cap};
  SampleOptions sparse_opts{spec.size, Protocol::sparse, spec.sparse_count, spec.depth_cap};
  auto produce = [&](const ManifestRow& row) {
    const Sample raw = generate_sample(row.seed, raw_opts);
    const Sample sparse = generate_sample(row.seed, sparse_opts);
    write_sample_files(sample_stem(spec.out_dir, row.split, row.index), raw, sparse);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, rows.size()));
  if (workers == 1) {
    for (const auto& row : rows) produce(row);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows.size(); i += workers) {
          try {
            produce(rows[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::ofstream manifest(fs::path(spec.out_dir) / "manifest.tsv", std::ios::binary | std::ios::trunc);
  if (!manifest) throw ArgumentError("cannot write manifest in " + spec.out_dir);
  manifest << kManifestHeader << '\n';
  for (const auto& r : rows) {
    manifest << r.split << '\t' << r.index << '\t' << r.seed << '\t' << to_string(r.protocol) << '\t'
             << r.sparse_count << '\t' << r.size << '\n';
  }
  if (!manifest) throw ArgumentError("failed writing manifest in " + spec.out_dir);
  return rows;
}

std::vector<ManifestRow> read_manifest(const std::string& corpus_dir) {
  const auto path = fs::path(corpus_dir) / "manifest.tsv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw FormatError("unexpected manifest header in " + path.string(), 0);
  }
  std::vector<ManifestRow> rows;
  std::uint64_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestRow r;
    std::string protocol;
    if (!std::getline(fields, r.split, '\t') || !(fields >> r.index) || !(fields >> r.seed) ||
        !(fields >> protocol) || !(fields >> r.sparse_count) || !(fields >> r.size)) {
      throw FormatError("malformed manifest row in " + path.string(), offset);
    }
    r.protocol = parse_protocol(protocol);
    rows.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return rows;
}

namespace {

std::vector<Sample> load_rows(const std::string& corpus_dir, const std::string& split,
                              const std::vector<ManifestRow>& rows, const Protocol* forced) {
  split_stream(split);
  std::vector<Sample> out;
  for (const auto& row : rows) {
    if (row.split != split) continue;
    const Protocol protocol = forced ? *forced : row.protocol;
    const std::string stem = sample_stem(corpus_dir, split, row.index);
    Sample s;
    s.color = read_color_ppm(stem + "_color.ppm");
    s.depth_gt = read_depth_pgm(stem + "_gt.pgm");
    s.depth_input = read_depth_pgm(stem + (protocol == Protocol::raw ? "_raw.pgm" : "_sparse.pgm"));
    s.meta = {row.seed, protocol, row.sparse_count};
    if (s.color.dim(0) != s.depth_gt.dim(0) || s.color.dim(1) != s.depth_gt.dim(1) ||
        s.depth_input.shape() != s.depth_gt.shape()) {
      throw DimensionError("sample " + stem + " has mismatched extents");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<Sample> load_split(const std::string& corpus_dir, const std::string& split, Protocol protocol) {
  return load_rows(corpus_dir, split, read_manifest(corpus_dir), &protocol);
}

std::vector<Sample> load_split(const std::string& corpus_dir, const std::string& split) {
  return load_rows(corpus_dir, split, read_manifest(corpus_dir), nullptr);
}

}  // namespace maga
