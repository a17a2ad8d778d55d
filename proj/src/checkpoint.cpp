#include <bit>
#include <cstring>
#include <fstream>

#include "imae/training.hpp"

namespace imae {

namespace {

constexpr char kMagic[4] = {'I', 'M', 'A', 'E'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("truncated checkpoint " + path_);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  const char* take(std::size_t n) {
    need(n);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& path() const { return path_; }

 private:
  std::vector<char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

struct StoredBlock {
  std::string name;
  double* data;
  Index rows;
  Index cols;
};

// Every stored array, biases included even when they are not trained.
std::vector<StoredBlock> stored_blocks(Network& net) {
  std::vector<StoredBlock> out;
  for (std::size_t k = 0; k < net.layer_count(); ++k) {
    auto& l = net.layer(k);
    const std::string prefix = "layer" + std::to_string(k);
    if (!net.shares_weights(k)) out.push_back({prefix + ".weights", l.weights.data(), l.weights.rows(), l.weights.cols()});
    out.push_back({prefix + ".bias", l.bias.data(), 1, l.bias.size()});
  }
  if (net.is_vae()) {
    auto& h = net.logvar_head();
    out.push_back({"logvar.weights", h.weights.data(), h.weights.rows(), h.weights.cols()});
    out.push_back({"logvar.bias", h.bias.data(), 1, h.bias.size()});
  }
  return out;
}

}  // namespace

void save_checkpoint(const Network& net, const TrainConfig& cfg, const std::filesystem::path& path) {
  if (!(net.architecture() == cfg.arch)) throw ConfigError("save_checkpoint: network does not match config");
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(cfg.to_text());
  Network copy = net;
  const auto blocks = stored_blocks(copy);
  w.u32(static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    w.str(b.name);
    w.u32(static_cast<std::uint32_t>(b.rows));
    w.u32(static_cast<std::uint32_t>(b.cols));
    for (Index i = 0; i < b.rows * b.cols; ++i) w.f64(b.data[i]);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path.string());

  if (std::memcmp(r.take(4), kMagic, 4) != 0) throw FormatError("not an IMAE checkpoint: " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  }
  TrainConfig cfg;
  try {
    cfg = TrainConfig::from_text(r.str());
    cfg.validate();
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError("corrupt checkpoint config in " + path.string() + ": " + e.what());
  }

  Network net(cfg.arch);
  auto blocks = stored_blocks(net);
  const std::uint32_t count = r.u32();
  if (count != blocks.size()) {
    throw FormatError("checkpoint " + path.string() + " has " + std::to_string(count) +
                      " parameter blocks, expected " + std::to_string(blocks.size()));
  }
  for (auto& b : blocks) {
    const std::string name = r.str();
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (name != b.name || rows != b.rows || cols != b.cols) {
      throw FormatError("checkpoint block '" + name + "' (" + std::to_string(rows) + "x" +
                        std::to_string(cols) + ") does not match expected '" + b.name + "'");
    }
    for (Index i = 0; i < b.rows * b.cols; ++i) b.data[i] = r.f64();
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint payload in " + path.string());
  return {std::move(net), std::move(cfg)};
}

}  // namespace imae
