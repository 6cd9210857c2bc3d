#include "percpool/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "percpool/errors.hpp"

namespace percpool {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

std::uint64_t get_uint(std::istream& is, int bytes, const char* what) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), bytes)) {
    throw DataError(std::string("checkpoint truncated while reading ") + what);
  }
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::string get_string(std::istream& is, const char* what) {
  const std::uint64_t n = get_uint(is, 8, what);
  if (n > (1u << 24)) throw DataError(std::string("checkpoint ") + what + " length is implausible");
  std::string s(n, '\0');
  if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw DataError(std::string("checkpoint truncated while reading ") + what);
  }
  return s;
}

}  // namespace

template <typename T>
Checkpoint make_checkpoint(const TrainConfig& config, Model<T>& model) {
  Checkpoint ckpt;
  ckpt.config_text = serialize_config(config);
  for (auto& e : model.net.state()) ckpt.tensors.emplace_back(e.name, e.tensor->template cast<float>());
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write checkpoint " + file.string());
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_u32(os, ckpt.version);
  put_u64(os, ckpt.config_text.size());
  os.write(ckpt.config_text.data(), static_cast<std::streamsize>(ckpt.config_text.size()));
  put_u64(os, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor(os, t);
  }
  if (!os) throw DataError("error writing checkpoint " + file.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + file.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw DataError(file.string() + " is not a checkpoint (bad magic)");
  }
  Checkpoint ckpt;
  ckpt.version = static_cast<std::uint32_t>(get_uint(is, 4, "version"));
  if (ckpt.version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.config_text = get_string(is, "config");
  const std::uint64_t count = get_uint(is, 8, "entry count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = get_string(is, "tensor name");
    ckpt.tensors.emplace_back(std::move(name), read_tensor<float>(is));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint payload");
  return ckpt;
}

template <typename T>
Model<T> restore_model(const Checkpoint& ckpt) {
  Model<T> model = build_model<T>(ckpt.config());
  auto entries = model.net.state();
  if (entries.size() != ckpt.tensors.size()) {
    throw DataError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
                    std::to_string(entries.size()));
  }
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  for (auto& e : entries) {
    auto it = by_name.find(e.name);
    if (it == by_name.end()) throw DataError("checkpoint is missing tensor " + e.name);
    const Tensor<float>& src = *it->second;
    if (!(src.shape() == e.tensor->shape())) {
      throw DataError("tensor " + e.name + " has shape " + src.shape().str() + ", expected " +
                      e.tensor->shape().str());
    }
    auto dst = e.tensor->data();
    auto in = src.data();
    std::transform(in.begin(), in.end(), dst.begin(), [](float v) { return static_cast<T>(v); });
  }
  return model;
}

template Checkpoint make_checkpoint<float>(const TrainConfig&, Model<float>&);
template Checkpoint make_checkpoint<double>(const TrainConfig&, Model<double>&);
template Model<float> restore_model<float>(const Checkpoint&);
template Model<double> restore_model<double>(const Checkpoint&);

}  // namespace percpool
