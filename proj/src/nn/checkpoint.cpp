#include "mdvdrp/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mdvdrp::nn {
namespace {

constexpr char kMagic[8] = {'M', 'D', 'V', 'D', 'R', 'P', 'C', 'K'};

template <class T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("checkpoint: truncated file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  if (static_cast<std::size_t>(ckpt.values.size()) != ckpt.layout.size()) {
    throw std::invalid_argument("checkpoint: value count does not match layout");
  }
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, ckpt.meta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.layout.blocks().size()));
  for (const auto& b : ckpt.layout.blocks()) {
    put_string(out, b.name);
    put<std::uint64_t>(out, b.offset);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(b.rows));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(b.cols));
  }
  put<std::uint64_t>(out, static_cast<std::uint64_t>(ckpt.values.size()));
  for (Index i = 0; i < ckpt.values.size(); ++i) put<double>(out, ckpt.values[i]);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.meta = get_string(in);
  const auto n_blocks = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    auto name = get_string(in);
    const auto offset = get<std::uint64_t>(in);
    const auto rows = static_cast<Index>(get<std::uint64_t>(in));
    const auto cols = static_cast<Index>(get<std::uint64_t>(in));
    if (ckpt.layout.add(name, rows, cols) != offset) throw std::runtime_error("checkpoint: inconsistent block offset");
  }
  const auto n = get<std::uint64_t>(in);
  if (n != ckpt.layout.size()) throw std::runtime_error("checkpoint: value count does not match layout");
  ckpt.values.resize(static_cast<Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) ckpt.values[static_cast<Index>(i)] = get<double>(in);
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace mdvdrp::nn
