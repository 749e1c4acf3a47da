#include "maga/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "maga/errors.hpp"

namespace maga {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("checkpoint truncated in ") + what, pos_);
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParamStore& params) {
  std::vector<std::uint8_t> out = {'M', 'A', 'G', 'A'};
  put_le<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& [path, t] : params.entries()) {
    if (path.size() > 0xFFFF) throw ArgumentError("parameter path too long: " + path);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(path.size()));
    out.insert(out.end(), path.begin(), path.end());
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t e : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

void decode_checkpoint(const std::vector<std::uint8_t>& bytes, ParamStore& params) {
  Reader r(bytes);
  if (r.str(4, "magic") != "MAGA") throw FormatError("bad checkpoint magic", 0);
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  std::set<std::string> seen;
  auto& entries = params.mutable_entries();
  while (!r.done()) {
    const std::size_t record_start = r.pos();
    const auto len = r.le<std::uint16_t>("path length");
    const std::string path = r.str(len, "path");
    const auto rank = r.le<std::uint8_t>("rank");
    Shape shape;
    for (std::uint8_t i = 0; i < rank; ++i) shape.push_back(r.le<std::uint32_t>("extent"));
    auto it = entries.find(path);
    if (it == entries.end()) throw FormatError("checkpoint has unknown parameter " + path, record_start);
    if (it->second.shape() != shape) {
      throw FormatError("checkpoint shape " + shape_string(shape) + " for " + path + " does not match model " +
                            shape_string(it->second.shape()),
                        record_start);
    }
    if (!seen.insert(path).second) throw FormatError("duplicate parameter " + path, record_start);
    auto dst = it->second.mutable_values();
    for (double& v : dst) v = std::bit_cast<double>(r.le<std::uint64_t>("payload"));
  }
  if (seen.size() != entries.size()) {
    for (const auto& [path, t] : entries) {
      if (!seen.count(path)) throw FormatError("checkpoint is missing parameter " + path, bytes.size());
    }
  }
}

void save_checkpoint(const ParamStore& params, const std::string& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArgumentError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ArgumentError("failed writing " + path);
}

void load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  decode_checkpoint(bytes, params);
}

}  // namespace maga
