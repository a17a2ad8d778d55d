#include "imae/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "imae/config.hpp"

namespace imae {

namespace {

constexpr Index kChunk = 1000;

}  // namespace

double sigma_prime(const Network& net, const Matrix& data) {
  if (net.is_vae() || net.latent_activation() != Activation::sigmoid) {
    throw ConfigError("sigma_prime: latent layer is not sigmoid");
  }
  double sum = 0.0;
  for (Index start = 0; start < data.rows(); start += kChunk) {
    const Index len = std::min(kChunk, data.rows() - start);
    sum += sigmoid_derivative(encode(net, Matrix(data.middleRows(start, len)))).sum();
  }
  return sum / static_cast<double>(data.rows() * net.architecture().latent_width());
}

Matrix reconstruct(const Network& net, const Matrix& batch) {
  Matrix out(batch.rows(), net.layers().back().bias.size());
  for (Index start = 0; start < batch.rows(); start += kChunk) {
    const Index len = std::min(kChunk, batch.rows() - start);
    out.middleRows(start, len) = forward_mean(net, Matrix(batch.middleRows(start, len)));
  }
  return out;
}

std::vector<NoiseSpec> default_robustness_grid() {
  return {NoiseSpec::mask(0.0),       NoiseSpec::mask(0.3),        NoiseSpec::mask(0.5),
          NoiseSpec::mask(0.75),      NoiseSpec::gaussian(0.03),   NoiseSpec::gaussian(0.15),
          NoiseSpec::gaussian(0.35),  NoiseSpec::gaussian(0.45)};
}

std::vector<RobustnessRow> robustness_sweep(const Network& net, const Dataset& test,
                                            const std::vector<NoiseSpec>& specs, Rng& rng) {
  std::vector<RobustnessRow> rows;
  for (const auto& spec : specs) {
    spec.validate();
    const Matrix noisy = corrupt(test.images, spec, rng);
    rows.push_back({spec, reconstruction_l2(test.images, reconstruct(net, noisy))});
  }
  return rows;
}

ClusterEvalResult cluster_eval(const Network& net, const Dataset& test, const ClusterEvalOptions& opt,
                               Rng& rng) {
  if (opt.iterations < 1) throw ArgumentError("cluster_eval: iterations must be >= 1");
  opt.noise.validate();
  ClusterEvalResult r;
  const bool noisy = opt.noise.kind != NoiseKind::none;
  double clean_sum = 0.0;
  double noisy_sum = 0.0;
  for (int it = 0; it < opt.iterations; ++it) {
    const std::uint64_t seed = rng.next_u64();
    r.seeds.push_back(seed);
    Rng it_rng(seed);
    const Dataset sample = sample_subset(test, opt.n, it_rng);

    const ClusterResult clean = kmeans(encode(net, sample.images), opt.k, it_rng, opt.max_iters);
    r.per_iteration_clean.push_back(rand_index(clean.assignments, sample.labels, opt.k));
    clean_sum += r.per_iteration_clean.back();

    if (noisy) {
      const Matrix corrupted = corrupt(sample.images, opt.noise, it_rng);
      const ClusterResult km = kmeans(encode(net, corrupted), opt.k, it_rng, opt.max_iters);
      r.per_iteration_noisy.push_back(rand_index(km.assignments, sample.labels, opt.k));
      noisy_sum += r.per_iteration_noisy.back();
    }
  }
  r.rand_clean = clean_sum / opt.iterations;
  if (noisy) r.rand_noisy = noisy_sum / opt.iterations;
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["robustness"] = nlohmann::ordered_json::array();
  for (const auto& row : robustness) {
    j["robustness"].push_back({{"noise", row.noise.to_string()}, {"mean_l2", row.mean_l2}});
  }
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["rand_clean"] = opt(rand_clean);
  j["rand_noisy"] = opt(rand_noisy);
  j["cluster_noise"] = cluster_noise;
  j["sigma_prime"] = opt(sigma_prime);
  j["iterations"] = iterations;
  j["seeds"] = seeds;
  j["config"] = config;
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "model,metric,noise,value\n";
  for (const auto& row : robustness) {
    os << model << ",mean_l2," << row.noise.to_string() << ',' << format_double(row.mean_l2) << '\n';
  }
  if (rand_clean) os << model << ",rand_clean,none," << format_double(*rand_clean) << '\n';
  if (rand_noisy) os << model << ",rand_noisy," << cluster_noise << ',' << format_double(*rand_noisy) << '\n';
  if (sigma_prime) os << model << ",sigma_prime,none," << format_double(*sigma_prime) << '\n';
  return os.str();
}

void EvalReport::write(const std::filesystem::path& json_path, const std::filesystem::path& csv_path) const {
  std::ofstream js(json_path);
  std::ofstream cs(csv_path);
  if (!js || !cs) throw IoError("cannot write evaluation report to " + json_path.string());
  js << to_json();
  cs << to_csv();
  if (!js || !cs) throw IoError("write failed: " + json_path.string());
}

void export_codes(const Network& net, const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const Index width = net.architecture().latent_width();
  out << "label";
  for (Index j = 0; j < width; ++j) out << ",z" << j;
  out << '\n';
  char buf[32];
  for (Index start = 0; start < data.size(); start += kChunk) {
    const Index len = std::min(kChunk, data.size() - start);
    const Matrix codes = encode(net, Matrix(data.images.middleRows(start, len)));
    for (Index i = 0; i < len; ++i) {
      out << data.labels[static_cast<std::size_t>(start + i)];
      for (Index j = 0; j < width; ++j) {
        std::snprintf(buf, sizeof buf, "%.12g", codes(i, j));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

CodeTable read_codes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty codes file " + path.string());
  const auto width = static_cast<Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  CodeTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    t.labels.push_back(std::stoi(cell));
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<Index>(row.size()) != width) throw FormatError("ragged row in " + path.string());
    rows.push_back(std::move(row));
  }
  t.codes.resize(static_cast<Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j = 0; j < width; ++j) t.codes(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  return t;
}

}  // namespace imae
