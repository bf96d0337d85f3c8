#include "safeshed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace safeshed {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'C', 'K', 'P', 'T', '0', '\0'};
constexpr const char* kSchemaTag = "safeshed.checkpoint.v1";

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
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

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw std::runtime_error("checkpoint: truncated file");
    }
  }

  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint Checkpoint::from_state(const TrainerState& state, std::uint64_t config_hash) {
  Checkpoint c;
  c.config_hash = config_hash;
  c.state = state;
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const TrainerState& s = checkpoint.state;
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, checkpoint.version);
  const std::string schema = kSchemaTag;
  put_u32(buf, static_cast<std::uint32_t>(schema.size()));
  buf.append(schema);
  put_u64(buf, checkpoint.config_hash);
  put_u64(buf, static_cast<std::uint64_t>(s.iteration));
  put_u64(buf, s.master_seed);
  put_u64(buf, s.rng_cursor);
  put_f64(buf, s.multiplier);
  put_f64(buf, s.step_size);
  put_f64(buf, s.noise_std);
  put_f64(buf, s.policy.action_low);
  put_f64(buf, s.policy.action_high);
  put_u32(buf, static_cast<std::uint32_t>(s.policy.weights.rows));
  put_u32(buf, static_cast<std::uint32_t>(s.policy.weights.cols));
  for (double w : s.policy.weights.data) {
    put_f64(buf, w);
  }
  put_u64(buf, static_cast<std::uint64_t>(s.stats.count));
  put_u32(buf, static_cast<std::uint32_t>(s.stats.dim()));
  for (double v : s.stats.mean) {
    put_f64(buf, v);
  }
  for (double v : s.stats.m2) {
    put_f64(buf, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw std::runtime_error("checkpoint write failed: " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader reader(std::move(data));

  const std::string magic = reader.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  Checkpoint c;
  c.version = reader.u32();
  if (c.version != 1) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(c.version));
  }
  const std::uint32_t schema_len = reader.u32();
  const std::string schema = reader.bytes(schema_len);
  if (schema != kSchemaTag) {
    throw std::runtime_error("checkpoint: unexpected schema tag '" + schema + "'");
  }
  c.config_hash = reader.u64();
  TrainerState& s = c.state;
  s.iteration = static_cast<int>(reader.u64());
  s.master_seed = reader.u64();
  s.rng_cursor = reader.u64();
  s.multiplier = reader.f64();
  s.step_size = reader.f64();
  s.noise_std = reader.f64();
  s.policy.action_low = reader.f64();
  s.policy.action_high = reader.f64();
  const std::uint32_t rows = reader.u32();
  const std::uint32_t cols = reader.u32();
  s.policy.weights = Matrix(static_cast<int>(rows), static_cast<int>(cols));
  for (double& w : s.policy.weights.data) {
    w = reader.f64();
  }
  const std::uint64_t count = reader.u64();
  const std::uint32_t dim = reader.u32();
  s.stats = RunningStats(static_cast<int>(dim));
  s.stats.count = static_cast<std::int64_t>(count);
  for (double& v : s.stats.mean) {
    v = reader.f64();
  }
  for (double& v : s.stats.m2) {
    v = reader.f64();
  }
  if (!reader.exhausted()) {
    throw std::runtime_error("checkpoint: trailing bytes");
  }
  return c;
}

namespace {

nlohmann::json lossless_array(const std::vector<double>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : values) {
    arr.push_back({{"value", v}, {"bits", std::bit_cast<std::uint64_t>(v)}});
  }
  return arr;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
  const TrainerState& s = checkpoint.state;
  nlohmann::json j;
  j["schema"] = kSchemaTag;
  j["version"] = checkpoint.version;
  j["config_hash"] = checkpoint.config_hash;
  j["iteration"] = s.iteration;
  j["master_seed"] = s.master_seed;
  j["rng_cursor"] = s.rng_cursor;
  j["multiplier"] = s.multiplier;
  j["step_size"] = s.step_size;
  j["noise_std"] = s.noise_std;
  j["policy"] = {{"action_low", s.policy.action_low},
                 {"action_high", s.policy.action_high},
                 {"rows", s.policy.weights.rows},
                 {"cols", s.policy.weights.cols},
                 {"weights", lossless_array(s.policy.weights.data)}};
  j["stats"] = {{"count", s.stats.count},
                {"mean", lossless_array(s.stats.mean)},
                {"m2", lossless_array(s.stats.m2)}};
  return j;
}

}  // namespace safeshed
