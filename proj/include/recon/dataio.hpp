#pragma once

// Data ingestion and artifact export. External formats kept here:
//   - CIFAR-10 binary: 3073-byte records, 1 label byte + 3072 pixel bytes
//     (1024 R, 1024 G, 1024 B, each 32x32 row-major); pixels map to v/255.
//   - PPM P6 images: "P6\n<w> <h>\n255\n" + RGB bytes.
//   - Weights file: one JSON header line (spec, loss, rho, seed) followed by
//     the raw little-endian float64 flat parameter array.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "recon/model.hpp"

namespace recon {

struct LabeledImages {
  Matrix pixels;            // N x 3072, values in [0,1]
  std::vector<int> labels;  // 0..9
};

LabeledImages load_cifar10(const std::vector<std::string>& files);

// labels map class_a -> +1, class_b -> -1; per_class rows picked per class
// with a seeded shuffle of the class's file-order indices
Dataset select_binary(const LabeledImages& images, int class_a, int class_b, std::size_t per_class,
                      std::uint64_t seed);

// Row-disjoint split with |train| = floor(fraction * N). Row order inside each
// side follows the input order.
std::pair<Dataset, Dataset> partition_disjoint(const Dataset& data, double fraction,
                                               std::uint64_t seed);

// Two Gaussian blobs in [0,1]^K: means 0.5 +- (separation/2) u for a random
// unit direction u, per-coordinate noise kSynthNoiseSigma, samples clipped to
// the box. First half labelled +1, second half -1.
inline constexpr double kSynthNoiseSigma = 0.05;
Dataset synth_dataset(std::size_t n, std::size_t k, double separation, std::uint64_t seed);

struct ImageGeometry {
  std::size_t height = 0, width = 0, channels = 0;  // channels 1 or 3, planar layout
};

// One PPM per row (values clamped to [0,1], scaled to 255); returns the file
// names written, relative to out_dir. Single-channel data is replicated to
// gray RGB.
std::vector<std::string> export_images(const Matrix& x, const ImageGeometry& geo,
                                       const std::string& out_dir, const std::string& prefix);

// inverse of export_images for one file: planar [0,1] row ordered like the
// matrix rows above
Vector read_ppm(const std::string& path, ImageGeometry* geo = nullptr);

struct WeightsFile {
  ParamVector theta;
  LossSpec loss;
  std::uint64_t seed = 0;
  WeightsFile() : theta(ModelSpec::affine(1)) {}
};

void save_weights(const std::string& path, const ParamVector& theta, const LossSpec& loss,
                  std::uint64_t seed);
WeightsFile load_weights(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// 17-significant-digit formatting: parses back to the identical double, so
// replays produce byte-identical text artifacts
std::string fmt_double(double v);

// FNV-1a over the raw matrix/label bytes; manifests store it as hex
std::uint64_t dataset_fingerprint(const Dataset& data);

}  // namespace recon
