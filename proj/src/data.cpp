#include "imae/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace imae {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (buf.size() < offset + 4) throw IoError("truncated IDX header in " + path.string());
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

Dataset Dataset::select(const std::vector<Index>& indices) const {
  Dataset out;
  out.name = name;
  out.images.resize(static_cast<Index>(indices.size()), features());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    if (i < 0 || i >= size()) throw ArgumentError("Dataset::select: index out of range");
    out.images.row(static_cast<Index>(r)) = images.row(i);
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

Dataset Dataset::head(Index n) const {
  if (n < 0 || n > size()) throw ArgumentError("Dataset::head: n exceeds dataset size");
  Dataset out;
  out.name = name;
  out.images = images.topRows(n);
  out.labels.assign(labels.begin(), labels.begin() + n);
  return out;
}

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::none:
      break;
    case NoiseKind::mask:
      if (!(level >= 0.0 && level <= 1.0)) throw ArgumentError("mask noise: p must lie in [0, 1]");
      break;
    case NoiseKind::gaussian:
      if (!(level >= 0.0)) throw ArgumentError("gaussian noise: sigma must be >= 0");
      break;
  }
}

std::string NoiseSpec::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::mask: os << "mask:" << level; break;
    case NoiseKind::gaussian: os << "gaussian:" << level; break;
  }
  return os.str();
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
  if (text.empty() || text == "none") return none();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("noise spec '" + text + "': expected kind:level");
  const std::string kind = text.substr(0, colon);
  double level = 0.0;
  try {
    std::size_t used = 0;
    level = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ArgumentError("noise spec '" + text + "': bad level");
  }
  NoiseSpec spec;
  if (kind == "mask") {
    spec = mask(level);
  } else if (kind == "gaussian") {
    spec = gaussian(level);
  } else {
    throw ArgumentError("noise spec '" + text + "': unknown kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

IdxPaths mnist_paths(const std::filesystem::path& dir, bool train) {
  const std::string prefix = train ? "train" : "t10k";
  return {dir / (prefix + "-images-idx3-ubyte"), dir / (prefix + "-labels-idx1-ubyte")};
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::string name) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != kImagesMagic) {
    throw FormatError("bad IDX image magic " + hex32(img_magic) + " in " + images_path.string() +
                      " (expected " + hex32(kImagesMagic) + ")");
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels_path);
  if (lab_magic != kLabelsMagic) {
    throw FormatError("bad IDX label magic " + hex32(lab_magic) + " in " + labels_path.string() +
                      " (expected " + hex32(kLabelsMagic) + ")");
  }

  const std::uint32_t count = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  const std::uint32_t label_count = read_be32(lab, 4, labels_path);
  if (count != label_count) {
    throw ConsistencyError("IDX count mismatch: " + std::to_string(count) + " images vs " +
                           std::to_string(label_count) + " labels");
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  if (img.size() < 16 + std::size_t{count} * pixels) {
    throw IoError("truncated IDX image payload in " + images_path.string());
  }
  if (lab.size() < 8 + std::size_t{count}) {
    throw IoError("truncated IDX label payload in " + labels_path.string());
  }

  Dataset ds;
  ds.name = name.empty() ? images_path.filename().string() : std::move(name);
  ds.images.resize(count, static_cast<Index>(pixels));
  double* dst = ds.images.data();
  const unsigned char* src = img.data() + 16;
  for (std::size_t i = 0; i < std::size_t{count} * pixels; ++i) dst[i] = src[i] / 255.0;
  ds.labels.assign(lab.begin() + 8, lab.begin() + 8 + count);
  return ds;
}

void write_idx(const Dataset& ds, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int image_rows, int image_cols) {
  if (Index{image_rows} * image_cols != ds.features()) {
    throw ShapeError("write_idx: image geometry does not match feature count");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw IoError("write_idx: cannot open output files");
  write_be32(img, kImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(ds.size()));
  write_be32(img, static_cast<std::uint32_t>(image_rows));
  write_be32(img, static_cast<std::uint32_t>(image_cols));
  std::vector<char> bytes(static_cast<std::size_t>(ds.images.size()));
  const double* src = ds.images.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::clamp(std::round(src[i] * 255.0), 0.0, 255.0);
    bytes[i] = static_cast<char>(static_cast<unsigned char>(v));
  }
  img.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

  write_be32(lab, kLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(ds.labels.size()));
  for (int l : ds.labels) lab.put(static_cast<char>(l));
  if (!img || !lab) throw IoError("write_idx: write failed");
}

Matrix corrupt(const Matrix& batch, const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  switch (noise.kind) {
    case NoiseKind::none:
      return batch;
    case NoiseKind::mask:
      return batch.cwiseProduct(bernoulli_mask(rng, batch.rows(), batch.cols(), 1.0 - noise.level));
    case NoiseKind::gaussian:
      return batch + gaussian(rng, batch.rows(), batch.cols(), 0.0, noise.level);
  }
  return batch;
}

std::vector<Index> permutation(Index n, Rng& rng, Index k) {
  if (k < 0 || k > n) k = n;
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k && i + 1 < n; ++i) {
    const Index j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

std::vector<std::vector<Index>> batches(Index n, Index batch_size, Rng& rng, bool shuffle) {
  if (batch_size < 1) throw ArgumentError("batches: batch_size must be >= 1");
  if (n < 1) throw ArgumentError("batches: empty dataset");
  if (batch_size > n) throw ArgumentError("batches: batch_size exceeds dataset size");
  std::vector<Index> order;
  if (shuffle) {
    order = permutation(n, rng);
  } else {
    order.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  }
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < n; start += batch_size) {
    const Index end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + start, order.begin() + end);
  }
  return out;
}

Dataset sample_subset(const Dataset& ds, Index n, Rng& rng) {
  if (n < 0 || n > ds.size()) {
    throw ArgumentError("sample_subset: n=" + std::to_string(n) + " exceeds dataset size " +
                        std::to_string(ds.size()));
  }
  return ds.select(permutation(ds.size(), rng, n));
}

}  // namespace imae
