#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "maga/tensor.hpp"

namespace maga {

/// raw: edge shadows plus irregular holes. sparse: a fixed number of
/// uniformly sampled ground-truth pixels.
enum class Protocol { raw, sparse };

std::string to_string(Protocol p);
/// Throws ArgumentError for anything other than "raw" or "sparse".
Protocol parse_protocol(const std::string& s);

struct SampleMeta {
  std::uint64_t scene_seed = 0;
  Protocol protocol = Protocol::sparse;
  std::size_t sparse_count = 500;
};

struct Sample {
  Tensor color;        // h x w x 3 in [0, 1]
  Tensor depth_input;  // h x w x 1, 0 = missing
  Tensor depth_gt;     // h x w x 1, strictly positive
  SampleMeta meta;
};

struct SampleOptions {
  std::size_t size = 64;
  Protocol protocol = Protocol::sparse;
  std::size_t sparse_count = 500;
  double depth_cap = std::numeric_limits<double>::infinity();
};

/// Renders the scene for `scene_seed` and corrupts it per `options`. Values
/// are not quantised; see load_split for the on-disk view.
Sample generate_sample(std::uint64_t scene_seed, const SampleOptions& options);

/// Seeds used for the scene and for each corruption of a sample.
std::uint64_t scene_seed_for(std::uint64_t corpus_seed, const std::string& split, std::size_t index);
std::uint64_t raw_seed_for(std::uint64_t scene_seed);
std::uint64_t sparse_seed_for(std::uint64_t scene_seed);

struct CorpusSpec {
  std::string out_dir;
  std::size_t train_count = 200;
  std::size_t val_count = 40;
  std::size_t size = 64;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::sparse;
  std::size_t sparse_count = 500;
  double depth_cap = std::numeric_limits<double>::infinity();
};

struct ManifestRow {
  std::string split;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::sparse;
  std::size_t sparse_count = 0;
  std::size_t size = 0;
};

/// Writes `{out}/{train,val}/{index:05}_{color.ppm,raw.pgm,sparse.pgm,gt.pgm}`
/// and `{out}/manifest.tsv`. Samples are independent, so up to `threads`
/// workers write them concurrently; the output is identical for any count.
std::vector<ManifestRow> write_corpus(const CorpusSpec& spec, std::size_t threads = 1);

std::vector<ManifestRow> read_manifest(const std::string& corpus_dir);

/// File stem of a sample, e.g. "{dir}/train/00007".
std::string sample_stem(const std::string& corpus_dir, const std::string& split, std::size_t index);

/// Loads every sample of `split` with the depth input of `protocol`.
std::vector<Sample> load_split(const std::string& corpus_dir, const std::string& split, Protocol protocol);

/// As above, using the protocol recorded in the manifest.
std::vector<Sample> load_split(const std::string& corpus_dir, const std::string& split);

}  // namespace maga
