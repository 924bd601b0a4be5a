#ifndef FORECLASSNET_CHECKPOINT_HPP
#define FORECLASSNET_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "foreclassnet/errors.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

namespace detail {

constexpr char kCheckpointMagic[4] = {'F', 'C', 'N', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size())
      throw io_error("checkpoint: truncated file (wanted " + std::to_string(n) +
                     " bytes at offset " + std::to_string(pos_) + ")");
  }
  const std::string& data_;
  std::size_t pos_;
};

inline std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

struct CheckpointContents {
  std::uint32_t version = detail::kCheckpointVersion;
  std::string config_text;
  std::string rng_state;
  std::vector<Parameter> params;  // names, shapes, values (grads not stored)
};

/// Single-file, versioned, checksummed parameter store. Float-64 payloads are
/// written little-endian bit-for-bit, so load(save(model)) reproduces forward
/// outputs exactly.
inline void save_checkpoint(const std::string& path, const std::string& config_text,
                            const std::string& rng_state,
                            const std::vector<Parameter*>& params) {
  std::string body;
  detail::put_u32(body, detail::kCheckpointVersion);
  detail::put_u64(body, config_text.size());
  body += config_text;
  detail::put_u64(body, rng_state.size());
  body += rng_state;
  detail::put_u32(body, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    detail::put_u32(body, static_cast<std::uint32_t>(p->name.size()));
    body += p->name;
    detail::put_u32(body, static_cast<std::uint32_t>(p->shape.size()));
    for (std::size_t d : p->shape) detail::put_u64(body, d);
    for (double v : p->value) detail::put_f64(body, v);
  }
  std::string out(detail::kCheckpointMagic, 4);
  out += body;
  detail::put_u64(out, detail::fnv1a(body.data(), body.size()));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw io_error("failed writing '" + path + "'");
}

inline CheckpointContents load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (data.size() < 12 || std::memcmp(data.data(), detail::kCheckpointMagic, 4) != 0)
    throw io_error("checkpoint '" + path + "': bad magic (not an FCN1 file)");
  const std::size_t body_len = data.size() - 4 - 8;
  const std::uint64_t stored =
      detail::ByteReader(data, data.size() - 8).u64();
  const std::uint64_t actual = detail::fnv1a(data.data() + 4, body_len);
  if (stored != actual)
    throw io_error("checkpoint '" + path + "': checksum mismatch (corrupt or truncated)");

  detail::ByteReader r(data, 4);
  CheckpointContents c;
  c.version = r.u32();
  if (c.version != detail::kCheckpointVersion)
    throw io_error("checkpoint '" + path + "': unsupported version " +
                   std::to_string(c.version) + " (this build reads version " +
                   std::to_string(detail::kCheckpointVersion) + ")");
  c.config_text = r.bytes(r.u64());
  c.rng_state = r.bytes(r.u64());
  const std::uint32_t n = r.u32();
  c.params.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Parameter p;
    p.name = r.bytes(r.u32());
    const std::uint32_t ndim = r.u32();
    p.shape.resize(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) p.shape[d] = r.u64();
    p.value.resize(numel(p.shape));
    for (double& v : p.value) v = r.f64();
    p.grad.assign(p.value.size(), 0.0);
    c.params.push_back(std::move(p));
  }
  return c;
}

/// Copies stored values into live parameters, matching by name and verifying
/// shapes. Every file parameter must land somewhere and every model parameter
/// must be filled.
inline void apply_checkpoint(const CheckpointContents& c,
                             const std::vector<Parameter*>& model_params) {
  if (c.params.size() != model_params.size())
    throw io_error("checkpoint: file has " + std::to_string(c.params.size()) +
                   " parameters, model expects " + std::to_string(model_params.size()));
  for (std::size_t i = 0; i < model_params.size(); ++i) {
    Parameter* dst = model_params[i];
    const Parameter* src = nullptr;
    for (const Parameter& p : c.params)
      if (p.name == dst->name) {
        src = &p;
        break;
      }
    if (!src) throw io_error("checkpoint: parameter '" + dst->name + "' not found in file");
    if (src->shape != dst->shape)
      throw io_error("checkpoint: parameter '" + dst->name + "' has shape " +
                     shape_str(src->shape) + " in file but the model expects " +
                     shape_str(dst->shape));
    dst->value = src->value;
    dst->zero_grad();
  }
}

}  // namespace fcn

#endif  // FORECLASSNET_CHECKPOINT_HPP
