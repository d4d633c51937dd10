#include "recon/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "recon/errors.hpp"
#include "recon/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "weights file I/O assumes a little-endian host");

namespace recon {

namespace {

constexpr std::size_t kCifarPixels = 3072;
constexpr std::size_t kCifarRecord = kCifarPixels + 1;

std::string arch_name(Arch a) {
  switch (a) {
    case Arch::Affine: return "affine";
    case Arch::OneHidden: return "one_hidden";
    case Arch::Mlp: return "mlp";
  }
  return "?";
}

Arch arch_from(const std::string& s) {
  if (s == "affine") return Arch::Affine;
  if (s == "one_hidden") return Arch::OneHidden;
  if (s == "mlp") return Arch::Mlp;
  throw IoError("unknown arch '" + s + "'");
}

}  // namespace

LabeledImages load_cifar10(const std::vector<std::string>& files) {
  std::vector<std::vector<unsigned char>> payloads;
  std::size_t total = 0;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_cifar10: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() % kCifarRecord != 0) {
      throw IoError("load_cifar10: " + path + " is truncated (" + std::to_string(bytes.size()) +
                    " bytes is not a multiple of 3073)");
    }
    total += bytes.size() / kCifarRecord;
    payloads.push_back(std::move(bytes));
  }

  LabeledImages out;
  out.pixels = Matrix(total, kCifarPixels);
  out.labels.reserve(total);
  std::size_t row = 0;
  for (const auto& bytes : payloads) {
    for (std::size_t off = 0; off < bytes.size(); off += kCifarRecord, ++row) {
      const unsigned char label = bytes[off];
      if (label > 9) {
        throw IoError("load_cifar10: label byte " + std::to_string(int(label)) + " out of range");
      }
      out.labels.push_back(label);
      auto dst = out.pixels.row(row);
      for (std::size_t j = 0; j < kCifarPixels; ++j) {
        dst[j] = static_cast<double>(bytes[off + 1 + j]) / 255.0;
      }
    }
  }
  return out;
}

Dataset select_binary(const LabeledImages& images, int class_a, int class_b, std::size_t per_class,
                      std::uint64_t seed) {
  require(class_a != class_b, "select_binary: classes must differ");
  require(per_class > 0, "select_binary: per_class must be positive");

  auto pick = [&](int cls, std::uint64_t stream) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < images.labels.size(); ++i) {
      if (images.labels[i] == cls) idx.push_back(i);
    }
    if (idx.size() < per_class) {
      throw NumericError("select_binary: class " + std::to_string(cls) + " has only " +
                         std::to_string(idx.size()) + " samples, need " + std::to_string(per_class));
    }
    RngStream rng(seed, stream);
    rng.shuffle_indices(idx);
    idx.resize(per_class);
    return idx;
  };

  const auto ia = pick(class_a, stream_id_for("select-binary", 0));
  const auto ib = pick(class_b, stream_id_for("select-binary", 1));

  Dataset out;
  out.inputs = Matrix(2 * per_class, images.pixels.cols());
  out.labels.assign(2 * per_class, 0.0);
  for (std::size_t i = 0; i < per_class; ++i) {
    auto src = images.pixels.row(ia[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
    out.labels[i] = 1.0;
  }
  for (std::size_t i = 0; i < per_class; ++i) {
    auto src = images.pixels.row(ib[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(per_class + i).begin());
    out.labels[per_class + i] = -1.0;
  }
  return out;
}

std::pair<Dataset, Dataset> partition_disjoint(const Dataset& data, double fraction,
                                               std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, "partition_disjoint: fraction must be in (0,1)");
  const std::size_t n = data.n();
  const std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  require(n_train > 0 && n_train < n, "partition_disjoint: a side would be empty");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(seed, stream_id_for("partition"));
  rng.shuffle_indices(idx);

  std::vector<std::size_t> tr(idx.begin(), idx.begin() + n_train);
  std::vector<std::size_t> ho(idx.begin() + n_train, idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(ho.begin(), ho.end());

  auto gather = [&](const std::vector<std::size_t>& rows) {
    Dataset d;
    d.inputs = Matrix(rows.size(), data.k());
    d.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = data.inputs.row(rows[i]);
      std::copy(src.begin(), src.end(), d.inputs.row(i).begin());
      d.labels[i] = data.labels[rows[i]];
    }
    return d;
  };
  return {gather(tr), gather(ho)};
}

Dataset synth_dataset(std::size_t n, std::size_t k, double separation, std::uint64_t seed) {
  require(n >= 2 && n % 2 == 0, "synth_dataset: n must be even and at least 2");
  require(k >= 1, "synth_dataset: k must be positive");
  require(separation > 0.0, "synth_dataset: separation must be positive");

  RngStream rng(seed, stream_id_for("synth"));
  Vector dir(k);
  for (double& v : dir) v = rng.gaussian();
  const double dn = nrm2(dir);
  for (double& v : dir) v /= dn;

  Dataset out;
  out.inputs = Matrix(n, k);
  out.labels.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = i < half ? 1.0 : -1.0;
    out.labels[i] = sign;
    auto row = out.inputs.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double mean = 0.5 + sign * 0.5 * separation * dir[j];
      row[j] = std::clamp(mean + kSynthNoiseSigma * rng.gaussian(), 0.0, 1.0);
    }
  }
  return out;
}

std::vector<std::string> export_images(const Matrix& x, const ImageGeometry& geo,
                                       const std::string& out_dir, const std::string& prefix) {
  require(geo.channels == 1 || geo.channels == 3, "export_images: channels must be 1 or 3");
  require(geo.height * geo.width * geo.channels == x.cols(),
          "export_images: geometry does not match row length");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const std::size_t plane = geo.height * geo.width;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04zu.ppm", prefix.c_str(), i);
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_images: cannot write " + path);
    out << "P6\n" << geo.width << " " << geo.height << "\n255\n";
    auto row = x.row(i);
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t src = geo.channels == 3 ? c * plane + p : p;
        const double v = std::clamp(row[src], 0.0, 1.0);
        out.put(static_cast<char>(std::lround(v * 255.0)));
      }
    }
    if (!out) throw IoError("export_images: write failed for " + path);
    names.push_back(name);
  }
  return names;
}

Vector read_ppm(const std::string& path, ImageGeometry* geo_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ppm: cannot open " + path);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255) throw IoError("read_ppm: unsupported format in " + path);
  in.get();  // the single whitespace after the header
  std::vector<unsigned char> bytes(w * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError("read_ppm: truncated pixel data in " + path);

  if (geo_out) *geo_out = {h, w, 3};
  Vector row(w * h * 3);
  const std::size_t plane = w * h;
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      row[c * plane + p] = static_cast<double>(bytes[p * 3 + c]) / 255.0;
    }
  }
  return row;
}

void save_weights(const std::string& path, const ParamVector& theta, const LossSpec& loss,
                  std::uint64_t seed) {
  const ModelSpec& spec = theta.spec();
  nlohmann::json header = {
      {"format", "recon-weights-v1"},
      {"arch", arch_name(spec.arch)},
      {"input_dim", spec.input_dim},
      {"hidden_dim", spec.hidden_dim},
      {"hidden_widths", spec.hidden_widths},
      {"activation", spec.activation == Activation::Relu ? "relu" : "softplus"},
      {"softplus_beta", spec.softplus_beta},
      {"loss", loss.kind == LossKind::Logistic ? "logistic" : "mse"},
      {"weight_decay", loss.weight_decay},
      {"seed", seed},
      {"param_count", theta.size()},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_weights: cannot write " + path);
  out << header.dump() << "\n";
  out.write(reinterpret_cast<const char*>(theta.flat.data()),
            static_cast<std::streamsize>(theta.flat.size() * sizeof(double)));
  if (!out) throw IoError("save_weights: write failed for " + path);
}

WeightsFile load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_weights: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("load_weights: missing header in " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_weights: bad header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != "recon-weights-v1") {
    throw IoError("load_weights: unrecognized format in " + path);
  }

  ModelSpec spec;
  spec.arch = arch_from(header.at("arch").get<std::string>());
  spec.input_dim = header.at("input_dim").get<std::size_t>();
  spec.hidden_dim = header.value("hidden_dim", std::size_t{0});
  spec.hidden_widths = header.value("hidden_widths", std::vector<std::size_t>{});
  spec.activation = header.value("activation", "relu") == std::string("relu") ? Activation::Relu
                                                                              : Activation::Softplus;
  spec.softplus_beta = header.value("softplus_beta", 20.0);
  spec.validate();

  WeightsFile wf;
  wf.loss.kind = header.value("loss", "logistic") == std::string("mse") ? LossKind::Mse
                                                                        : LossKind::Logistic;
  wf.loss.weight_decay = header.value("weight_decay", 0.0);
  wf.seed = header.value("seed", std::uint64_t{0});

  const std::size_t count = header.at("param_count").get<std::size_t>();
  Vector flat(count);
  in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw IoError("load_weights: truncated parameter block in " + path);
  }
  wf.theta = ParamVector(spec, std::move(flat));
  return wf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_csv: cannot write " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write_matrix_csv: write failed for " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_matrix_csv: cannot open " + path);
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Vector row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("read_matrix_csv: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::uint64_t dataset_fingerprint(const Dataset& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix_bytes = [&h](const void* ptr, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(ptr);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001B3ULL;
    }
  };
  mix_bytes(data.inputs.data(), data.inputs.size() * sizeof(double));
  mix_bytes(data.labels.data(), data.labels.size() * sizeof(double));
  return h;
}

}  // namespace recon
