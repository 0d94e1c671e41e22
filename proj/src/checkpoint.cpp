#include "egopush/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace egopush {

namespace {

constexpr char kMagic[8] = {'E', 'G', 'P', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<const Tensor*>& tensors,
                     std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, config_hash);
  std::uint32_t count = static_cast<std::uint32_t>(tensors.size());
  write_pod(out, count);
  for (const Tensor* t : tensors) {
    std::uint32_t name_len = static_cast<std::uint32_t>(t->name.size());
    write_pod(out, name_len);
    out.write(t->name.data(), name_len);
    std::uint32_t rows = static_cast<std::uint32_t>(t->v.rows());
    std::uint32_t cols = static_cast<std::uint32_t>(t->v.cols());
    write_pod(out, rows);
    write_pod(out, cols);
    out.write(reinterpret_cast<const char*>(t->v.data()),
              static_cast<std::streamsize>(sizeof(double) * t->v.size()));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::uint64_t checkpoint_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  std::uint64_t hash = 0;
  read_pod(in, hash);
  return hash;
}

void load_checkpoint(const std::string& path,
                     const std::vector<Tensor*>& tensors,
                     std::uint64_t expected_hash, bool force) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  std::uint64_t hash = 0;
  read_pod(in, hash);
  if (hash != expected_hash && !force)
    throw std::runtime_error(
        "checkpoint: config hash mismatch (use force to override)");
  std::uint32_t count = 0;
  read_pod(in, count);
  if (count != tensors.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (Tensor* t : tensors) {
    std::uint32_t name_len = 0;
    read_pod(in, name_len);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != t->name)
      throw std::runtime_error("checkpoint: tensor name mismatch: expected " +
                               t->name + ", got " + name);
    std::uint32_t rows = 0, cols = 0;
    read_pod(in, rows);
    read_pod(in, cols);
    if (rows != t->v.rows() || cols != t->v.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + t->name);
    in.read(reinterpret_cast<char*>(t->v.data()),
            static_cast<std::streamsize>(sizeof(double) * t->v.size()));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
  }
}

}  // namespace egopush
