#include "mergenas/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace mergenas {

namespace {

constexpr char kMagic[4] = {'M', 'N', 'C', 'K'};

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  put_u32(out, static_cast<uint32_t>(v));
  put_u32(out, static_cast<uint32_t>(v >> 32));
}

void put_f64(std::ostream& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw format_error("checkpoint truncated");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(std::istream& in) {
  const uint64_t lo = get_u32(in);
  const uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

double get_f64(std::istream& in) {
  const uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_tensor_payload(std::ostream& out, const Tensor& t) {
  for (double v : t.data) put_f64(out, v);
}

void get_tensor_payload(std::istream& in, Tensor& t) {
  for (double& v : t.data) v = get_f64(in);
}

}  // namespace

void save_checkpoint(const PolicyParams& p, const AdamState* adam, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp + "' for writing");
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, adam ? 1u : 0u);
    // config fingerprint
    put_u32(out, static_cast<uint32_t>(p.cfg.emb_dim));
    put_u32(out, static_cast<uint32_t>(p.cfg.d_model));
    put_u32(out, static_cast<uint32_t>(p.cfg.n_layers));
    put_u32(out, static_cast<uint32_t>(p.cfg.ff_dim));
    put_u32(out, static_cast<uint32_t>(p.cfg.max_len));
    put_f64(out, p.cfg.emb_init);
    // manifest
    put_u64(out, static_cast<uint64_t>(p.store.size()));
    for (int i = 0; i < p.store.size(); ++i) {
      const std::string& name = p.store.names[i];
      put_u32(out, static_cast<uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      const Tensor& t = p.store.values[i];
      put_u32(out, static_cast<uint32_t>(t.rows()));
      put_u32(out, static_cast<uint32_t>(t.cols()));
    }
    // payload
    for (const Tensor& t : p.store.values) put_tensor_payload(out, t);
    if (adam) {
      if (static_cast<int>(adam->m.size()) != p.store.size())
        throw contract_error("save_checkpoint: optimizer state does not match parameters");
      put_u64(out, static_cast<uint64_t>(adam->t));
      for (const Tensor& t : adam->m) put_tensor_payload(out, t);
      for (const Tensor& t : adam->v) put_tensor_payload(out, t);
    }
    if (!out) throw io_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw io_error("cannot rename '" + tmp + "' to '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw format_error("'" + path + "' is not a checkpoint (bad magic)");
  const uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw format_error("checkpoint version " + std::to_string(version) +
                       " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
  const uint32_t flags = get_u32(in);

  LoadedCheckpoint ck;
  ck.cfg.emb_dim = static_cast<int>(get_u32(in));
  ck.cfg.d_model = static_cast<int>(get_u32(in));
  ck.cfg.n_layers = static_cast<int>(get_u32(in));
  ck.cfg.ff_dim = static_cast<int>(get_u32(in));
  ck.cfg.max_len = static_cast<int>(get_u32(in));
  ck.cfg.emb_init = get_f64(in);

  const uint64_t n = get_u64(in);
  std::vector<std::pair<std::string, std::pair<int, int>>> manifest;
  manifest.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    const uint32_t len = get_u32(in);
    if (len > 4096) throw format_error("checkpoint manifest entry name too long");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw format_error("checkpoint truncated in manifest");
    const int r = static_cast<int>(get_u32(in));
    const int c = static_cast<int>(get_u32(in));
    if (r < 1 || c < 1) throw format_error("checkpoint manifest has bad shape for " + name);
    manifest.emplace_back(std::move(name), std::make_pair(r, c));
  }
  for (auto& [name, shape] : manifest) {
    Tensor t(shape.first, shape.second, 0.0);
    get_tensor_payload(in, t);
    if (!in) throw format_error("checkpoint truncated in payload");
    ck.store.add(name, std::move(t));
  }
  if (flags & 1u) {
    AdamState adam;
    adam.t = static_cast<int64_t>(get_u64(in));
    for (auto& [name, shape] : manifest) {
      (void)name;
      Tensor t(shape.first, shape.second, 0.0);
      get_tensor_payload(in, t);
      adam.m.push_back(std::move(t));
    }
    for (auto& [name, shape] : manifest) {
      (void)name;
      Tensor t(shape.first, shape.second, 0.0);
      get_tensor_payload(in, t);
      adam.v.push_back(std::move(t));
    }
    if (!in) throw format_error("checkpoint truncated in optimizer state");
    ck.adam = std::move(adam);
  }
  return ck;
}

std::vector<std::string> RemapReport::fresh_states() const {
  std::vector<std::string> out;
  for (const std::string& name : fresh)
    if (name.rfind("emb/state/", 0) == 0) out.push_back(name.substr(10));
  return out;
}

PolicyParams load_with_remap(const LoadedCheckpoint& ckpt, const MergedSpace& new_space,
                             const PolicyConfig& cfg, Rng& rng, RemapReport* report) {
  if (ckpt.cfg.d_model != cfg.d_model || ckpt.cfg.emb_dim != cfg.emb_dim ||
      ckpt.cfg.n_layers != cfg.n_layers || ckpt.cfg.ff_dim != cfg.ff_dim)
    throw format_error("checkpoint model geometry (d_model " +
                       std::to_string(ckpt.cfg.d_model) +
                       ") incompatible with requested configuration (d_model " +
                       std::to_string(cfg.d_model) + ")");

  // Fresh init first: the rng stream depends only on the new space, so a
  // remapped load is as reproducible as a cold start.
  PolicyParams p = PolicyParams::init(new_space, cfg, rng);
  RemapReport rep;
  for (int i = 0; i < p.store.size(); ++i) {
    const std::string& name = p.store.names[i];
    if (ckpt.store.contains(name)) {
      const Tensor& src = ckpt.store.values[ckpt.store.find(name)];
      if (!src.same_shape(p.store.values[i]))
        throw format_error("checkpoint parameter '" + name + "' has shape " +
                           src.shape_str() + ", new space needs " +
                           p.store.values[i].shape_str());
      p.store.values[i] = src;
      rep.reused.push_back(name);
    } else {
      rep.fresh.push_back(name);
    }
  }
  for (const std::string& name : ckpt.store.names)
    if (!p.store.contains(name)) rep.dropped.push_back(name);
  if (report) *report = std::move(rep);
  return p;
}

}  // namespace mergenas
