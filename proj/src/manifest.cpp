#include "recon/manifest.hpp"

#include <fstream>

#include "recon/dataio.hpp"
#include "recon/errors.hpp"

namespace recon {

std::pair<Dataset, Dataset> resolve_data(const DataConfig& cfg) {
  Dataset full;
  if (cfg.source == "synth") {
    full = synth_dataset(cfg.n, cfg.k, cfg.separation, cfg.seed);
  } else if (cfg.source == "cifar") {
    require(!cfg.cifar_files.empty(), "resolve_data: cifar source needs --cifar-files");
    const LabeledImages imgs = load_cifar10(cfg.cifar_files);
    full = select_binary(imgs, cfg.class_a, cfg.class_b, cfg.per_class, cfg.seed);
  } else {
    require(false, "resolve_data: unknown source '" + cfg.source + "'");
  }
  return partition_disjoint(full, 1.0 - cfg.holdout_fraction, cfg.seed);
}

void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = {{"arch", s.arch == Arch::Affine ? "affine" : (s.arch == Arch::OneHidden ? "one_hidden" : "mlp")},
       {"input_dim", s.input_dim},
       {"hidden_dim", s.hidden_dim},
       {"hidden_widths", s.hidden_widths},
       {"activation", s.activation == Activation::Relu ? "relu" : "softplus"},
       {"softplus_beta", s.softplus_beta}};
}

void from_json(const nlohmann::json& j, ModelSpec& s) {
  const std::string arch = j.value("arch", "affine");
  s.arch = arch == "affine" ? Arch::Affine : (arch == "one_hidden" ? Arch::OneHidden : Arch::Mlp);
  s.input_dim = j.value("input_dim", std::size_t{0});
  s.hidden_dim = j.value("hidden_dim", std::size_t{0});
  s.hidden_widths = j.value("hidden_widths", std::vector<std::size_t>{});
  s.activation = j.value("activation", "relu") == std::string("relu") ? Activation::Relu
                                                                      : Activation::Softplus;
  s.softplus_beta = j.value("softplus_beta", 20.0);
}

void to_json(nlohmann::json& j, const LossSpec& s) {
  j = {{"kind", s.kind == LossKind::Logistic ? "logistic" : "mse"},
       {"weight_decay", s.weight_decay}};
}

void from_json(const nlohmann::json& j, LossSpec& s) {
  s.kind = j.value("kind", "logistic") == std::string("mse") ? LossKind::Mse : LossKind::Logistic;
  s.weight_decay = j.value("weight_decay", 0.0);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"lr", c.lr},
       {"momentum", c.momentum},
       {"max_iters", c.max_iters},
       {"grad_tol", c.grad_tol},
       {"seed", c.seed},
       {"theta_init", c.theta_init == ThetaInit::UniformStd ? "uniform" : "gaussian"},
       {"init_sigma", c.init_sigma}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  c.seed = j.value("seed", c.seed);
  c.theta_init = j.value("theta_init", "uniform") == std::string("gaussian") ? ThetaInit::Gaussian
                                                                             : ThetaInit::UniformStd;
  c.init_sigma = j.value("init_sigma", c.init_sigma);
}

void to_json(nlohmann::json& j, const CgConfig& c) {
  j = {{"max_iters", c.max_iters}, {"tol", c.tol}, {"damping", c.damping}};
}

void from_json(const nlohmann::json& j, CgConfig& c) {
  c.max_iters = j.value("max_iters", c.max_iters);
  c.tol = j.value("tol", c.tol);
  c.damping = j.value("damping", c.damping);
}

void to_json(nlohmann::json& j, const ReconConfig& c) {
  j = {{"eta", c.eta},
       {"outer_iters", c.outer_iters},
       {"stop_tol", c.stop_tol},
       {"lower", c.lower},
       {"cg", c.cg},
       {"project_box", c.project_box},
       {"max_backtracks", c.max_backtracks}};
}

void from_json(const nlohmann::json& j, ReconConfig& c) {
  c.eta = j.value("eta", c.eta);
  c.outer_iters = j.value("outer_iters", c.outer_iters);
  c.stop_tol = j.value("stop_tol", c.stop_tol);
  if (j.contains("lower")) j.at("lower").get_to(c.lower);
  if (j.contains("cg")) j.at("cg").get_to(c.cg);
  c.project_box = j.value("project_box", c.project_box);
  c.max_backtracks = j.value("max_backtracks", c.max_backtracks);
}

void to_json(nlohmann::json& j, const GradPenConfig& c) {
  j = {{"lr", c.lr},
       {"momentum", c.momentum},
       {"iters", c.iters},
       {"stop_tol", c.stop_tol},
       {"max_backoffs", c.max_backoffs}};
}

void from_json(const nlohmann::json& j, GradPenConfig& c) {
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.iters = j.value("iters", c.iters);
  c.stop_tol = j.value("stop_tol", c.stop_tol);
  c.max_backoffs = j.value("max_backoffs", c.max_backoffs);
}

void to_json(nlohmann::json& j, const MixScheme& m) {
  j = {{"lambda1", m.lambda1}, {"lambda2", m.lambda2}};
}

void from_json(const nlohmann::json& j, MixScheme& m) {
  m.lambda1 = j.value("lambda1", 1.0);
  m.lambda2 = j.value("lambda2", 1.0);
}

void to_json(nlohmann::json& j, const InitScheme& s) {
  const char* kind = "uniform01";
  switch (s.kind) {
    case InitKind::Uniform01: kind = "random"; break;
    case InitKind::Gaussian: kind = "gaussian"; break;
    case InitKind::GroundTruth: kind = "gt"; break;
    case InitKind::Partition: kind = "partition"; break;
    case InitKind::Mix: kind = "mix"; break;
  }
  j = {{"kind", kind}, {"sigma", s.sigma}, {"mix", s.mix}};
}

void from_json(const nlohmann::json& j, InitScheme& s) {
  const std::string kind = j.value("kind", "random");
  if (kind == "random" || kind == "uniform01") s.kind = InitKind::Uniform01;
  else if (kind == "gaussian") s.kind = InitKind::Gaussian;
  else if (kind == "gt") s.kind = InitKind::GroundTruth;
  else if (kind == "partition") s.kind = InitKind::Partition;
  else if (kind == "mix") s.kind = InitKind::Mix;
  else require(false, "InitScheme: unknown kind '" + kind + "'");
  s.sigma = j.value("sigma", 1.0);
  if (j.contains("mix")) j.at("mix").get_to(s.mix);
}

void to_json(nlohmann::json& j, const DataConfig& c) {
  j = {{"source", c.source},
       {"n", c.n},
       {"k", c.k},
       {"separation", c.separation},
       {"cifar_files", c.cifar_files},
       {"class_a", c.class_a},
       {"class_b", c.class_b},
       {"per_class", c.per_class},
       {"holdout_fraction", c.holdout_fraction},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, DataConfig& c) {
  c.source = j.value("source", c.source);
  c.n = j.value("n", c.n);
  c.k = j.value("k", c.k);
  c.separation = j.value("separation", c.separation);
  c.cifar_files = j.value("cifar_files", c.cifar_files);
  c.class_a = j.value("class_a", c.class_a);
  c.class_b = j.value("class_b", c.class_b);
  c.per_class = j.value("per_class", c.per_class);
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  c.seed = j.value("seed", c.seed);
}

void write_manifest(const std::string& path, const nlohmann::json& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("write_manifest: cannot write " + path);
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("write_manifest: write failed for " + path);
}

nlohmann::json read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_manifest: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_manifest: bad JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace recon
