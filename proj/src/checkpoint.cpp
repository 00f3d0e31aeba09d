#include "vsum/checkpoint.hpp"

#include <bit>

#include "binary_io.hpp"
#include "vsum/error.hpp"

namespace vsum {

namespace {

constexpr std::string_view kMagic = "KFCK";

template <typename T>
std::vector<NamedTensor> export_params(const ParamStore<T>& store) {
  std::vector<NamedTensor> out;
  for (const auto& p : store) {
    NamedTensor t;
    t.name = p.name;
    t.shape.assign(p.shape.begin(), p.shape.end());
    t.data.assign(p.value.begin(), p.value.end());
    out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
void import_params(ParamStore<T>& store, const std::vector<NamedTensor>& tensors) {
  for (auto& p : store) {
    const NamedTensor* found = nullptr;
    for (const auto& t : tensors) {
      if (t.name == p.name) {
        found = &t;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::kCorruptFile, "checkpoint lacks parameter " + p.name);
    if (!std::equal(found->shape.begin(), found->shape.end(), p.shape.begin(), p.shape.end()) ||
        found->data.size() != p.value.size()) {
      throw Error(ErrorCode::kCorruptFile, "checkpoint parameter " + p.name + " has the wrong shape");
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = static_cast<T>(found->data[i]);
  }
}

template <typename T>
void write_values(binio::Writer& w, const auto& values) {
  for (auto v : values) {
    if constexpr (sizeof(T) == 4) {
      w.f32(static_cast<float>(v));
    } else {
      w.f64(static_cast<double>(v));
    }
  }
}

template <typename T>
void write_record(binio::Writer& w, const std::string& name, const std::vector<std::uint64_t>& shape,
                  const auto& values) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (auto s : shape) w.u64(s);
  write_values<T>(w, values);
}

struct RawRecord {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

}  // namespace

template <typename T>
ModelCheckpoint<T> make_checkpoint(const GeneratorModel<T>& model) {
  ModelCheckpoint<T> c;
  c.role = ModelRole::kGenerator;
  c.config = model.config();
  c.params = export_params(model.params());
  c.mask_token.assign(model.mask_token().begin(), model.mask_token().end());
  return c;
}

template <typename T>
ModelCheckpoint<T> make_checkpoint(const SummarizerModel<T>& model) {
  ModelCheckpoint<T> c;
  c.role = ModelRole::kSummarizer;
  c.config = model.config();
  c.params = export_params(model.params());
  c.mask_token.assign(model.mask_token().begin(), model.mask_token().end());
  return c;
}

template <typename T>
GeneratorModel<T> generator_from_checkpoint(const ModelCheckpoint<T>& ckpt) {
  if (ckpt.role != ModelRole::kGenerator) throw Error(ErrorCode::kConfigMismatch, "checkpoint is not a generator");
  GeneratorModel<T> model(ckpt.config, 0);
  import_params(model.params(), ckpt.params);
  model.set_mask_token(ckpt.mask_token);
  return model;
}

template <typename T>
SummarizerModel<T> summarizer_from_checkpoint(const ModelCheckpoint<T>& ckpt) {
  if (ckpt.role != ModelRole::kSummarizer) throw Error(ErrorCode::kConfigMismatch, "checkpoint is not a summarizer");
  SummarizerModel<T> model(ckpt.config, 0);
  import_params(model.params(), ckpt.params);
  model.set_mask_token(ckpt.mask_token);
  return model;
}

template <typename T>
std::string serialize_checkpoint(const ModelCheckpoint<T>& c) {
  binio::Writer w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(c.role));
  w.u8(static_cast<std::uint8_t>(sizeof(T)));
  for (auto v : {c.config.layers, c.config.heads, c.config.dim, c.config.ff, c.config.max_len}) w.u64(v);
  w.u64(c.epoch);
  w.f64(c.best_loss);
  for (auto word : c.rng.words) w.u64(word);
  w.u8(c.rng.has_spare_normal ? 1 : 0);
  w.f64(c.rng.spare_normal);
  w.u64(c.optimizer.step);

  const bool has_moments = !c.optimizer.m.empty();
  if (has_moments && (c.optimizer.m.size() != c.params.size() || c.optimizer.v.size() != c.params.size())) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match parameters");
  }
  const std::size_t records = c.params.size() * (has_moments ? 3 : 1) + 1;
  w.u32(static_cast<std::uint32_t>(records));
  for (const auto& p : c.params) write_record<T>(w, p.name, p.shape, p.data);
  write_record<T>(w, "mask_token", {c.mask_token.size()}, c.mask_token);
  if (has_moments) {
    for (std::size_t i = 0; i < c.params.size(); ++i) {
      write_record<T>(w, "adamw.m/" + c.params[i].name, c.params[i].shape, c.optimizer.m[i]);
      write_record<T>(w, "adamw.v/" + c.params[i].name, c.params[i].shape, c.optimizer.v[i]);
    }
  }
  const std::string& body = w.buffer();
  const std::uint64_t checksum = fnv1a64(body);
  binio::Writer tail;
  tail.u64(checksum);
  return body + tail.buffer();
}

template <typename T>
ModelCheckpoint<T> deserialize_checkpoint(const std::string& bytes) {
  binio::Reader r(bytes, ErrorCode::kCorruptFile);
  if (bytes.size() < 4 || r.bytes(4) != kMagic) throw Error(ErrorCode::kCorruptFile, "bad checkpoint magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                 " is not supported (reader expects " +
                                                 std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < 8 + 8) throw Error(ErrorCode::kCorruptFile, "checkpoint truncated");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  binio::Reader tail(std::string_view(bytes).substr(bytes.size() - 8), ErrorCode::kCorruptFile);
  if (fnv1a64(body) != tail.u64()) throw Error(ErrorCode::kCorruptFile, "checkpoint checksum mismatch");

  ModelCheckpoint<T> c;
  const std::uint8_t role = r.u8();
  if (role > 1) throw Error(ErrorCode::kCorruptFile, "unknown model role");
  c.role = static_cast<ModelRole>(role);
  const std::uint8_t width = r.u8();
  if (width != 4 && width != 8) throw Error(ErrorCode::kCorruptFile, "unknown scalar width");
  c.config.layers = r.u64();
  c.config.heads = r.u64();
  c.config.dim = r.u64();
  c.config.ff = r.u64();
  c.config.max_len = r.u64();
  try {
    c.config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptFile, e.what());
  }
  c.epoch = r.u64();
  c.best_loss = r.f64();
  for (auto& word : c.rng.words) word = r.u64();
  c.rng.has_spare_normal = r.u8() != 0;
  c.rng.spare_normal = r.f64();
  c.optimizer.step = r.u64();

  const std::uint32_t count = r.u32();
  std::vector<RawRecord> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    RawRecord rec;
    rec.name = r.str();
    const std::uint32_t rank = r.u32();
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      rec.shape.push_back(r.u64());
      n *= rec.shape.back();
    }
    if (n > r.remaining() / width) throw Error(ErrorCode::kCorruptFile, "record " + rec.name + " truncated");
    rec.data.resize(n);
    for (auto& v : rec.data) v = width == 4 ? static_cast<double>(r.f32()) : r.f64();
    records.push_back(std::move(rec));
  }
  if (r.position() != body.size()) throw Error(ErrorCode::kCorruptFile, "trailing bytes in checkpoint");

  auto find = [&](const std::string& name) -> const RawRecord* {
    for (const auto& rec : records) {
      if (rec.name == name) return &rec;
    }
    return nullptr;
  };
  for (const auto& rec : records) {
    if (rec.name == "mask_token" || rec.name.starts_with("adamw.")) continue;
    c.params.push_back({rec.name, rec.shape, rec.data});
  }
  const RawRecord* token = find("mask_token");
  if (!token) throw Error(ErrorCode::kCorruptFile, "checkpoint lacks mask_token");
  c.mask_token.assign(token->data.begin(), token->data.end());
  for (const auto& p : c.params) {
    const RawRecord* m = find("adamw.m/" + p.name);
    const RawRecord* v = find("adamw.v/" + p.name);
    if (!m || !v) continue;
    c.optimizer.m.emplace_back(m->data.begin(), m->data.end());
    c.optimizer.v.emplace_back(v->data.begin(), v->data.end());
  }
  if (!c.optimizer.m.empty() && c.optimizer.m.size() != c.params.size()) {
    throw Error(ErrorCode::kCorruptFile, "optimizer moments cover only part of the parameters");
  }
  return c;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint<T>& ckpt) {
  binio::write_file(path.string(), serialize_checkpoint(ckpt));
}

template <typename T>
ModelCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingCheckpoint, path.string() + " does not exist");
  }
  return deserialize_checkpoint<T>(binio::read_file(path.string()));
}

ModelRole peek_checkpoint_role(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kMissingCheckpoint, path.string() + " does not exist");
  }
  const std::string bytes = binio::read_file(path.string());
  binio::Reader r(bytes, ErrorCode::kCorruptFile);
  if (r.bytes(4) != kMagic) throw Error(ErrorCode::kCorruptFile, "bad checkpoint magic");
  if (r.u32() != kCheckpointVersion) throw Error(ErrorCode::kVersionMismatch, "unsupported checkpoint version");
  const std::uint8_t role = r.u8();
  if (role > 1) throw Error(ErrorCode::kCorruptFile, "unknown model role");
  return static_cast<ModelRole>(role);
}

#define VSUM_INSTANTIATE(T)                                                               \
  template ModelCheckpoint<T> make_checkpoint<T>(const GeneratorModel<T>&);               \
  template ModelCheckpoint<T> make_checkpoint<T>(const SummarizerModel<T>&);              \
  template GeneratorModel<T> generator_from_checkpoint<T>(const ModelCheckpoint<T>&);     \
  template SummarizerModel<T> summarizer_from_checkpoint<T>(const ModelCheckpoint<T>&);   \
  template std::string serialize_checkpoint<T>(const ModelCheckpoint<T>&);                \
  template ModelCheckpoint<T> deserialize_checkpoint<T>(const std::string&);              \
  template void save_checkpoint<T>(const std::filesystem::path&, const ModelCheckpoint<T>&); \
  template ModelCheckpoint<T> load_checkpoint<T>(const std::filesystem::path&);

VSUM_INSTANTIATE(float)
VSUM_INSTANTIATE(double)
#undef VSUM_INSTANTIATE

}  // namespace vsum
