#include "gcg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "gcg/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian host");

namespace gcg {

namespace {

constexpr char kMagic[8] = {'G', 'C', 'G', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw ParseError("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  for (const auto& [name, e] : store.entries()) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(e.value.shape.size()));
    for (int d : e.value.shape) write_u32(os, static_cast<uint32_t>(d));
    std::vector<float> vals(e.value.data.begin(), e.value.data.end());
    os.write(reinterpret_cast<const char*>(vals.data()),
             static_cast<std::streamsize>(vals.size() * sizeof(float)));
  }
  if (!os) throw ConfigError("checkpoint write failed: " + path.string());
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("bad checkpoint magic in " + path.string());
  }
  ParamStore store;
  while (true) {
    is.peek();
    if (is.eof()) break;
    uint32_t name_len = read_u32(is);
    if (name_len > 4096) throw ParseError("checkpoint name length out of range");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t rank = read_u32(is);
    if (rank == 0 || rank > 4) throw ParseError("checkpoint rank out of range for " + name);
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(read_u32(is));
    int64_t n = Tensor::numel_of(shape);
    std::vector<float> vals(static_cast<size_t>(n));
    is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw ParseError("checkpoint truncated in " + name);
    Tensor t(shape);
    for (int64_t i = 0; i < n; ++i) t[i] = static_cast<double>(vals[i]);
    store.create(name, std::move(t));
  }
  return store;
}

void load_checkpoint_into(const std::filesystem::path& path, ParamStore& store) {
  ParamStore loaded = load_checkpoint(path);
  for (auto& [name, e] : store.entries()) {
    if (!loaded.has(name)) throw ConfigError("checkpoint missing parameter " + name);
    const Tensor& src = loaded.value(name);
    if (!src.same_shape(e.value)) {
      throw ConfigError("checkpoint shape mismatch for " + name + ": " + src.shape_str() + " vs " +
                        e.value.shape_str());
    }
    e.value.data = src.data;
  }
  for (const auto& [name, e] : loaded.entries()) {
    if (!store.has(name)) throw ConfigError("checkpoint has unknown parameter " + name);
  }
}

}  // namespace gcg
