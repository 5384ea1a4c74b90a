#include "vulcan/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <set>

#include "vulcan/io.hpp"

namespace vulcan::nn {

namespace {

constexpr char kMagic[] = "VULCAN1";
constexpr std::size_t kMagicLen = 7;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("truncated file");
  }
};

}  // namespace

std::string encode_checkpoint(const std::vector<const Parameter*>& params) {
  std::string out(kMagic, kMagicLen);
  for (const Parameter* p : params) {
    put_le(out, p->name.size(), 4);
    out += p->name;
    put_le(out, p->value.shape.size(), 4);
    for (std::size_t d : p->value.shape) put_le(out, d, 8);
    for (double v : p->value.data) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0) throw CheckpointError("bad magic");
  Reader r(bytes);
  r.take(kMagicLen);
  std::vector<std::pair<std::string, Tensor>> out;
  while (!r.done()) {
    const std::string name = r.take(r.le(4));
    const std::uint64_t rank = r.le(4);
    if (rank > 8) throw CheckpointError("implausible rank for " + name);
    std::vector<std::size_t> shape;
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape.push_back(r.le(8));
      count *= shape.back();
      if (count > (std::uint64_t{1} << 32)) throw CheckpointError("implausible size for " + name);
    }
    Tensor t(shape);
    for (double& v : t.data) v = std::bit_cast<double>(r.le(8));
    out.emplace_back(name, std::move(t));
  }
  return out;
}

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
  write_file_atomically(path, encode_checkpoint(params));
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

void assign_checkpoint(const std::vector<std::pair<std::string, Tensor>>& records, ParameterStore& store) {
  std::set<std::string> seen;
  for (const auto& [name, t] : records) {
    if (!store.contains(name)) throw CheckpointError("unexpected parameter '" + name + "'");
    Parameter& p = store.get(name);
    if (p.value.shape != t.shape) {
      throw CheckpointError("shape of '" + name + "' is " + shape_string(t.shape) + ", model expects " +
                            shape_string(p.value.shape));
    }
    p.value = t;
    seen.insert(name);
  }
  for (const auto& name : store.names()) {
    if (seen.count(name) == 0) throw CheckpointError("missing parameter '" + name + "'");
  }
}

void load_checkpoint(const std::string& path, ParameterStore& store) { assign_checkpoint(read_checkpoint(path), store); }

}  // namespace vulcan::nn
