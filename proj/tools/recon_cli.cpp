// Command-line driver tying the pipeline together: train a classifier, run
// either reconstruction attack against its weights, sweep the initialization
// mixing grid, and emit the linear-case analysis report. Every command writes
// a manifest with its merged effective configuration; `recon replay`
// re-executes a manifest and reproduces all numeric artifacts byte for byte.
//
// Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 I/O failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "recon/bilevel.hpp"
#include "recon/dataio.hpp"
#include "recon/errors.hpp"
#include "recon/gradpen.hpp"
#include "recon/linear_analysis.hpp"
#include "recon/manifest.hpp"
#include "recon/metrics.hpp"
#include "recon/rng.hpp"
#include "recon/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace recon;

namespace {

// ---- output locations ------------------------------------------------------

std::string output_root() {
  if (const char* env = std::getenv("RECON_OUT_ROOT"); env && *env) return env;
  return "runs";
}

std::string timestamp_dir(const std::string& command, std::uint64_t seed) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm_utc);
  return output_root() + "/" + std::string(buf) + "-" + command + "-seed" + std::to_string(seed);
}

std::string ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

// ---- config file merging -----------------------------------------------
// Precedence: CLI flag > JSON config file > built-in default. Flags the user
// did not pass are overwritten from the config file when present there.

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("bad JSON in config file " + path + ": " + std::string(e.what()));
  }
  return j;
}

// dotted lookup: "data.n" walks nested objects
const json* find_path(const json& j, const std::string& dotted) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &cur->at(key);
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

template <typename T>
void merge_absent(const CLI::App& app, const std::string& flag, const json& cfg,
                  const std::string& dotted, T& value) {
  if (app.count(flag) == 0) {
    if (const json* v = find_path(cfg, dotted)) v->get_to(value);
  }
}

// ---- shared option groups ----------------------------------------------

struct DataFlags {
  DataConfig cfg;
  void attach(CLI::App* app) {
    app->add_option("--data", cfg.source, "data source: synth | cifar");
    app->add_option("--n", cfg.n, "synthetic dataset size (before the split)");
    app->add_option("--k", cfg.k, "input dimension");
    app->add_option("--separation", cfg.separation, "blob mean separation");
    app->add_option("--cifar-files", cfg.cifar_files, "CIFAR-10 binary batch files");
    app->add_option("--class-a", cfg.class_a, "CIFAR class mapped to +1");
    app->add_option("--class-b", cfg.class_b, "CIFAR class mapped to -1");
    app->add_option("--per-class", cfg.per_class, "CIFAR samples per class");
    app->add_option("--holdout-fraction", cfg.holdout_fraction, "held-out partition fraction");
    app->add_option("--data-seed", cfg.seed, "dataset generation/split seed");
  }
  void merge(const CLI::App& app, const json& j) {
    merge_absent(app, "--data", j, "data.source", cfg.source);
    merge_absent(app, "--n", j, "data.n", cfg.n);
    merge_absent(app, "--k", j, "data.k", cfg.k);
    merge_absent(app, "--separation", j, "data.separation", cfg.separation);
    merge_absent(app, "--cifar-files", j, "data.cifar_files", cfg.cifar_files);
    merge_absent(app, "--class-a", j, "data.class_a", cfg.class_a);
    merge_absent(app, "--class-b", j, "data.class_b", cfg.class_b);
    merge_absent(app, "--per-class", j, "data.per_class", cfg.per_class);
    merge_absent(app, "--holdout-fraction", j, "data.holdout_fraction", cfg.holdout_fraction);
    merge_absent(app, "--data-seed", j, "data.seed", cfg.seed);
  }
};

ImageGeometry default_geometry(std::size_t k) {
  if (k == 3072) return {32, 32, 3};
  const auto r = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(k))));
  if (r * r == k) return {r, r, 1};
  return {1, k, 1};
}

// ---- artifact writers ----------------------------------------------------

void write_train_trace(const std::string& path, const TrainReport& rep) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "iter,energy\n";
  for (std::size_t i = 0; i < rep.energy_trace.size(); ++i) {
    out << i << ',' << fmt_double(rep.energy_trace[i]) << '\n';
  }
}

void write_recon_trace(const std::string& path, const ReconResult& res) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "iter,objective,grad_norm,theta_dist,step\n";
  for (const auto& r : res.trace) {
    out << r.iter << ',' << fmt_double(r.objective) << ',' << fmt_double(r.grad_norm) << ','
        << fmt_double(r.theta_dist) << ',' << fmt_double(r.step) << '\n';
  }
}

void write_nn_csv(const std::string& path, const std::vector<NNRecord>& table,
                  const Matrix& recons, const Matrix& refset) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "recon_index,nn_index,l2,rank_of_nn\n";
  for (const auto& r : table) {
    out << r.recon_index << ',' << r.nn_index << ',' << fmt_double(r.l2) << ','
        << rank_of(recons.row(r.recon_index), refset, r.nn_index) << '\n';
  }
}

void write_grid_csv(const std::string& path, const std::vector<GridCell>& cells) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "lambda1,lambda2,avg_l2_to_gt,avg_l2_to_partition,avg_l2_to_random\n";
  for (const auto& c : cells) {
    out << fmt_double(c.lambda1) << ',' << fmt_double(c.lambda2) << ','
        << fmt_double(c.avg_l2_to_gt) << ',' << fmt_double(c.avg_l2_to_partition) << ','
        << fmt_double(c.avg_l2_to_random) << '\n';
  }
}

std::string hex64(std::uint64_t v) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = "0123456789abcdef"[v & 0xf];
  return s;
}

// ---- command configs -----------------------------------------------------

struct TrainCmd {
  DataConfig data;
  ModelSpec spec;
  LossSpec loss;
  TrainConfig train_cfg;
  std::uint64_t master_seed = 1;
};

struct ReconCmd {
  std::string weights_path;
  DataConfig data;
  std::string method = "bilevel";
  InitScheme init;
  ReconConfig bilevel_cfg;
  GradPenConfig gradpen_cfg;
  std::uint64_t master_seed = 1;
  std::vector<std::size_t> geometry;  // h,w,c override
};

struct SweepCmd {
  std::string weights_path;
  DataConfig data;
  std::string method = "both";
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
  ReconConfig bilevel_cfg;
  GradPenConfig gradpen_cfg;
  std::uint64_t master_seed = 1;
};

struct LinCmd {
  std::string weights_path;
  DataConfig data;
  std::string construct;  // "", "collapse", "interp"
  std::size_t collapse_n = 8;
  double collapse_margin = 25.0;
  std::uint64_t master_seed = 1;
};

// ---- command implementations -----------------------------------------------

json run_train(const TrainCmd& c, const std::string& out_dir) {
  auto [train_set, holdout] = resolve_data(c.data);
  (void)holdout;
  ModelSpec spec = c.spec;
  spec.input_dim = train_set.k();
  if (spec.arch == Arch::OneHidden && spec.hidden_dim == 0) spec.hidden_dim = 2 * spec.input_dim;
  spec.validate();

  TrainConfig tc = c.train_cfg;
  tc.seed = RngStream(c.master_seed, stream_id_for("train", 0)).next_u64();

  const TrainReport rep = train(spec, train_set, c.loss, tc);
  if (!rep.converged) {
    throw NumericError("training did not reach grad_tol (final |grad| = " +
                       std::to_string(rep.final_grad_norm) + ")");
  }

  save_weights(out_dir + "/weights.bin", rep.theta_star, c.loss, tc.seed);
  write_train_trace(out_dir + "/train_trace.csv", rep);

  json manifest = {
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"command", "train"},
      {"master_seed", c.master_seed},
      {"config", {{"data", c.data}, {"spec", spec}, {"loss", c.loss}, {"train", tc}}},
      {"dataset_fingerprint", hex64(dataset_fingerprint(train_set))},
      {"artifacts", {"weights.bin", "train_trace.csv"}},
      {"result",
       {{"converged", rep.converged},
        {"iters_used", rep.iters_used},
        {"final_grad_norm", rep.final_grad_norm},
        {"final_energy", rep.energy_trace.back()}}},
  };
  return manifest;
}

json run_reconstruct(const ReconCmd& c, const std::string& out_dir) {
  auto [train_set, holdout] = resolve_data(c.data);
  WeightsFile wf = load_weights(c.weights_path);
  require(wf.theta.spec().input_dim == train_set.k(),
          "weights input_dim does not match the dataset");

  InitSources sources{train_set.inputs, holdout.inputs};
  RngStream rng(c.master_seed, stream_id_for("init", 0));
  InitResult init = make_init(c.init, train_set.n(), train_set.k(), &sources, rng);

  ReconResult res;
  if (c.method == "bilevel") {
    res = reconstruct(wf.theta, train_set.labels, init.x0, wf.loss, c.bilevel_cfg);
  } else if (c.method == "gradpen") {
    res = reconstruct_gradpen(wf.theta, train_set.labels, init.x0, wf.loss, c.gradpen_cfg);
  } else {
    require(false, "unknown method '" + c.method + "' (use bilevel or gradpen)");
  }

  ImageGeometry geo = default_geometry(train_set.k());
  if (c.geometry.size() == 3) geo = {c.geometry[0], c.geometry[1], c.geometry[2]};

  export_images(res.x_rec, geo, out_dir + "/images", "recon");
  write_matrix_csv(out_dir + "/x_rec.csv", res.x_rec);
  write_recon_trace(out_dir + "/recon_trace.csv", res);
  const auto table = nn_table(res.x_rec, train_set.inputs);
  write_nn_csv(out_dir + "/nn_table.csv", table, res.x_rec, train_set.inputs);

  const double theta_dist = theta_distance(wf.theta.flat, res.theta_final);
  json summary = {
      {"method", c.method},
      {"converged", res.converged},
      {"outer_iters", res.trace.empty() ? std::size_t{0} : res.trace.back().iter},
      {"theta_dist", theta_dist},
      {"mean_nn_l2_to_train", mean_nn_l2(res.x_rec, train_set.inputs)},
      {"lower_solves", res.lower_solves},
  };
  {
    std::ofstream out(out_dir + "/summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << summary.dump(2) << "\n";
  }

  json manifest = {
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"command", "reconstruct"},
      {"master_seed", c.master_seed},
      {"config",
       {{"weights", c.weights_path},
        {"data", c.data},
        {"method", c.method},
        {"init", c.init},
        {"bilevel", c.bilevel_cfg},
        {"gradpen", c.gradpen_cfg},
        {"geometry", {geo.height, geo.width, geo.channels}}}},
      {"dataset_fingerprint", hex64(dataset_fingerprint(train_set))},
      {"init_partition_rows", init.partition_rows},
      {"artifacts", {"x_rec.csv", "recon_trace.csv", "nn_table.csv", "summary.json"}},
      {"result", summary},
  };
  return manifest;
}

json run_sweep(const SweepCmd& c, const std::string& out_dir) {
  require(!c.lambdas.empty(), "sweep: lambda list must be nonempty");
  auto [train_set, holdout] = resolve_data(c.data);
  WeightsFile wf = load_weights(c.weights_path);
  require(wf.theta.spec().input_dim == train_set.k(),
          "weights input_dim does not match the dataset");

  const std::size_t n = train_set.n(), k = train_set.k();

  // sources fixed once per sweep; cells only vary the lambdas
  InitSources sources{train_set.inputs, holdout.inputs};
  RngStream part_rng(c.master_seed, stream_id_for("sweep-partition"));
  InitScheme part_scheme;
  part_scheme.kind = InitKind::Partition;
  InitResult part = make_init(part_scheme, n, k, &sources, part_rng);

  RngStream rnd_rng(c.master_seed, stream_id_for("sweep-noise"));
  InitScheme rnd_scheme;  // Uniform01
  InitResult rnd = make_init(rnd_scheme, n, k, nullptr, rnd_rng);

  // reference noise set for the avg_l2_to_random column, distinct stream
  RngStream ref_rng(c.master_seed, stream_id_for("sweep-noise-ref"));
  InitResult noise_ref = make_init(rnd_scheme, n, k, nullptr, ref_rng);

  const auto grid = lambda_grid(c.lambdas);

  auto run_cells = [&](const std::string& method) {
    std::vector<GridRun> runs(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Matrix x0 = mix_init(grid[i], train_set.inputs, part.x0, rnd.x0);
      ReconResult res;
      if (method == "bilevel") {
        res = reconstruct(wf.theta, train_set.labels, x0, wf.loss, c.bilevel_cfg);
      } else {
        res = reconstruct_gradpen(wf.theta, train_set.labels, x0, wf.loss, c.gradpen_cfg);
      }
      runs[i] = {grid[i], std::move(res.x_rec)};
    }
    return grid_aggregate(runs, train_set.inputs, part.x0, noise_ref.x0);
  };

  std::vector<std::string> artifacts;
  json cell_counts = json::object();
  for (const std::string method : {"bilevel", "gradpen"}) {
    if (c.method != "both" && c.method != method) continue;
    const auto cells = run_cells(method);
    const std::string name = "grid_" + method + ".csv";
    write_grid_csv(out_dir + "/" + name, cells);
    artifacts.push_back(name);
    cell_counts[method] = cells.size();
  }
  require(!artifacts.empty(), "unknown method '" + c.method + "' (use bilevel, gradpen or both)");

  json manifest = {
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"command", "sweep"},
      {"master_seed", c.master_seed},
      {"config",
       {{"weights", c.weights_path},
        {"data", c.data},
        {"method", c.method},
        {"lambdas", c.lambdas},
        {"bilevel", c.bilevel_cfg},
        {"gradpen", c.gradpen_cfg}}},
      {"dataset_fingerprint", hex64(dataset_fingerprint(train_set))},
      {"init_partition_rows", part.partition_rows},
      {"artifacts", artifacts},
      {"result", {{"cells", cell_counts}}},
  };
  return manifest;
}

json run_linear_analysis(const LinCmd& c, const std::string& out_dir) {
  auto [train_set, holdout] = resolve_data(c.data);
  WeightsFile wf = load_weights(c.weights_path);
  require(wf.theta.spec().arch == Arch::Affine, "linear-analysis requires affine weights");
  require(wf.theta.spec().input_dim == train_set.k(),
          "weights input_dim does not match the dataset");

  const auto rep =
      underdetermination_report(train_set.n(), train_set.k(), 1, &train_set, &wf.theta, &wf.loss);
  json report = {
      {"n_equations", rep.n_equations},
      {"n_unknowns", rep.n_unknowns},
      {"kernel_dim_lower_bound", rep.kernel_dim_lower_bound},
      {"stationarity_residual", rep.residual},
  };

  std::vector<std::string> artifacts{"report.json"};
  if (c.construct == "interp") {
    const Matrix x = construct_interpolating_inputs(wf.theta, train_set.labels);
    Dataset d{x, train_set.labels};
    const LossSpec mse{LossKind::Mse, 0.0};
    report["interpolating_penalty"] = penalty(wf.theta, d, mse);
    write_matrix_csv(out_dir + "/constructed_inputs.csv", x);
    artifacts.push_back("constructed_inputs.csv");
  } else if (c.construct == "collapse") {
    // seed: the holdout row with the largest margin, pushed up to the target
    const Vector z = forward(wf.theta, holdout.inputs);
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.size(); ++i) {
      if (holdout.labels[i] * z[i] > holdout.labels[best] * z[best]) best = i;
    }
    const double y = holdout.labels[best];
    Vector seed(holdout.inputs.row(best).begin(), holdout.inputs.row(best).end());
    seed = push_to_margin(wf.theta, seed, y, c.collapse_margin);
    const Dataset collapsed = construct_collapse(seed, wf.theta, y, c.collapse_n, 20.0);
    const LossSpec pure{LossKind::Logistic, 0.0};
    report["collapse_penalty"] = penalty(wf.theta, collapsed, pure);
    report["collapse_n"] = c.collapse_n;
    write_matrix_csv(out_dir + "/constructed_inputs.csv", collapsed.inputs);
    artifacts.push_back("constructed_inputs.csv");
  } else if (!c.construct.empty()) {
    require(false, "unknown construction '" + c.construct + "' (use collapse or interp)");
  }

  {
    std::ofstream out(out_dir + "/report.json");
    if (!out) throw IoError("cannot write report.json");
    out << report.dump(2) << "\n";
  }

  json manifest = {
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"command", "linear-analysis"},
      {"master_seed", c.master_seed},
      {"config",
       {{"weights", c.weights_path},
        {"data", c.data},
        {"construct", c.construct},
        {"collapse_n", c.collapse_n},
        {"collapse_margin", c.collapse_margin}}},
      {"dataset_fingerprint", hex64(dataset_fingerprint(train_set))},
      {"artifacts", artifacts},
      {"result", report},
  };
  return manifest;
}

// rebuild a command struct from a stored manifest and run it again
json replay_manifest(const json& m, const std::string& out_dir) {
  const std::string command = m.at("command").get<std::string>();
  const json& cfg = m.at("config");
  if (command == "train") {
    TrainCmd c;
    cfg.at("data").get_to(c.data);
    cfg.at("spec").get_to(c.spec);
    cfg.at("loss").get_to(c.loss);
    cfg.at("train").get_to(c.train_cfg);
    c.master_seed = m.at("master_seed").get<std::uint64_t>();
    return run_train(c, out_dir);
  }
  if (command == "reconstruct") {
    ReconCmd c;
    c.weights_path = cfg.at("weights").get<std::string>();
    cfg.at("data").get_to(c.data);
    c.method = cfg.at("method").get<std::string>();
    cfg.at("init").get_to(c.init);
    cfg.at("bilevel").get_to(c.bilevel_cfg);
    cfg.at("gradpen").get_to(c.gradpen_cfg);
    if (cfg.contains("geometry")) c.geometry = cfg.at("geometry").get<std::vector<std::size_t>>();
    c.master_seed = m.at("master_seed").get<std::uint64_t>();
    return run_reconstruct(c, out_dir);
  }
  if (command == "sweep") {
    SweepCmd c;
    c.weights_path = cfg.at("weights").get<std::string>();
    cfg.at("data").get_to(c.data);
    c.method = cfg.at("method").get<std::string>();
    c.lambdas = cfg.at("lambdas").get<std::vector<double>>();
    cfg.at("bilevel").get_to(c.bilevel_cfg);
    cfg.at("gradpen").get_to(c.gradpen_cfg);
    c.master_seed = m.at("master_seed").get<std::uint64_t>();
    return run_sweep(c, out_dir);
  }
  if (command == "linear-analysis") {
    LinCmd c;
    c.weights_path = cfg.at("weights").get<std::string>();
    cfg.at("data").get_to(c.data);
    c.construct = cfg.value("construct", "");
    c.collapse_n = cfg.value("collapse_n", std::size_t{8});
    c.collapse_margin = cfg.value("collapse_margin", 25.0);
    c.master_seed = m.at("master_seed").get<std::uint64_t>();
    return run_linear_analysis(c, out_dir);
  }
  throw IoError("replay: unknown command '" + command + "' in manifest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"training-data reconstruction from trained classifier weights"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir_flag;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags take precedence)");
    sub->add_option("--out", out_dir_flag,
                    "output directory (default: <root>/<timestamp>-<cmd>-seed<seed>)");
  };

  // ---- train ----
  TrainCmd tc;
  DataFlags t_data;
  std::string t_arch = "affine", t_loss = "logistic", t_act = "relu", t_init = "uniform";
  std::vector<std::size_t> t_hidden_widths;
  auto* train_app = app.add_subcommand("train", "train a classifier by full-batch GD with momentum");
  add_common(train_app);
  t_data.attach(train_app);
  train_app->add_option("--arch", t_arch, "affine | onehidden | mlp");
  train_app->add_option("--hidden", tc.spec.hidden_dim, "hidden width (onehidden; default 2K)");
  train_app->add_option("--mlp-widths", t_hidden_widths, "hidden widths (mlp)")->delimiter(',');
  train_app->add_option("--activation", t_act, "relu | softplus");
  train_app->add_option("--beta", tc.spec.softplus_beta, "softplus sharpness");
  train_app->add_option("--loss", t_loss, "logistic | mse");
  train_app->add_option("--rho", tc.loss.weight_decay, "weight decay");
  train_app->add_option("--lr", tc.train_cfg.lr, "learning rate");
  train_app->add_option("--momentum", tc.train_cfg.momentum, "momentum");
  train_app->add_option("--max-iters", tc.train_cfg.max_iters, "iteration budget");
  train_app->add_option("--grad-tol", tc.train_cfg.grad_tol, "gradient-norm stopping tolerance");
  train_app->add_option("--theta-init", t_init, "uniform | gaussian");
  train_app->add_option("--init-sigma", tc.train_cfg.init_sigma, "gaussian init sigma");
  train_app->add_option("--seed", tc.master_seed, "master seed");

  // ---- reconstruct ----
  ReconCmd rc;
  DataFlags r_data;
  std::string r_init = "random";
  auto* rec_app = app.add_subcommand("reconstruct", "run a reconstruction attack against weights");
  add_common(rec_app);
  r_data.attach(rec_app);
  rec_app->add_option("--weights", rc.weights_path, "weights file from `recon train`")->required();
  rec_app->add_option("--method", rc.method, "bilevel | gradpen");
  rec_app->add_option("--init", r_init, "random | gaussian | gt | partition | mix");
  rec_app->add_option("--sigma", rc.init.sigma, "gaussian init sigma");
  rec_app->add_option("--lambda1", rc.init.mix.lambda1, "mix: weight of GT inside the data part");
  rec_app->add_option("--lambda2", rc.init.mix.lambda2, "mix: weight of the data part vs noise");
  rec_app->add_option("--eta", rc.bilevel_cfg.eta, "bilevel upper-level learning rate");
  rec_app->add_option("--outer-iters", rc.bilevel_cfg.outer_iters, "bilevel outer iterations");
  rec_app->add_option("--stop-tol", rc.bilevel_cfg.stop_tol, "hypergradient stop tolerance");
  rec_app->add_option("--lower-lr", rc.bilevel_cfg.lower.lr, "lower-solver learning rate");
  rec_app->add_option("--lower-momentum", rc.bilevel_cfg.lower.momentum, "lower-solver momentum");
  rec_app->add_option("--lower-grad-tol", rc.bilevel_cfg.lower.grad_tol, "lower-solver grad tol");
  rec_app->add_option("--lower-max-iters", rc.bilevel_cfg.lower.max_iters, "lower-solver budget");
  rec_app->add_option("--cg-tol", rc.bilevel_cfg.cg.tol, "CG relative residual");
  rec_app->add_option("--cg-damping", rc.bilevel_cfg.cg.damping, "CG Hessian damping mu");
  rec_app->add_flag("--project-box", rc.bilevel_cfg.project_box, "clamp x to [0,1] after steps");
  rec_app->add_option("--gp-lr", rc.gradpen_cfg.lr, "gradpen learning rate");
  rec_app->add_option("--gp-momentum", rc.gradpen_cfg.momentum, "gradpen momentum");
  rec_app->add_option("--gp-iters", rc.gradpen_cfg.iters, "gradpen iterations");
  rec_app->add_option("--geometry", rc.geometry, "image export geometry: h w c")->expected(3);
  rec_app->add_option("--seed", rc.master_seed, "master seed");

  // ---- sweep ----
  SweepCmd sc;
  DataFlags s_data;
  auto* sweep_app = app.add_subcommand("sweep", "lambda1/lambda2 initialization mixing grid");
  add_common(sweep_app);
  s_data.attach(sweep_app);
  sweep_app->add_option("--weights", sc.weights_path, "weights file")->required();
  sweep_app->add_option("--method", sc.method, "bilevel | gradpen | both");
  sweep_app->add_option("--lambdas", sc.lambdas, "lambda values for both axes")->delimiter(',');
  sweep_app->add_option("--eta", sc.bilevel_cfg.eta, "bilevel upper-level learning rate");
  sweep_app->add_option("--outer-iters", sc.bilevel_cfg.outer_iters, "bilevel outer iterations");
  sweep_app->add_option("--lower-lr", sc.bilevel_cfg.lower.lr, "lower-solver learning rate");
  sweep_app->add_option("--lower-momentum", sc.bilevel_cfg.lower.momentum, "lower-solver momentum");
  sweep_app->add_option("--lower-grad-tol", sc.bilevel_cfg.lower.grad_tol, "lower-solver grad tol");
  sweep_app->add_option("--lower-max-iters", sc.bilevel_cfg.lower.max_iters, "lower-solver budget");
  sweep_app->add_option("--gp-lr", sc.gradpen_cfg.lr, "gradpen learning rate");
  sweep_app->add_option("--gp-iters", sc.gradpen_cfg.iters, "gradpen iterations");
  sweep_app->add_option("--seed", sc.master_seed, "master seed");

  // ---- linear-analysis ----
  LinCmd lc;
  DataFlags l_data;
  auto* lin_app = app.add_subcommand(
      "linear-analysis", "stationarity residual, underdetermination counts, constructions");
  add_common(lin_app);
  l_data.attach(lin_app);
  lin_app->add_option("--weights", lc.weights_path, "affine weights file")->required();
  lin_app->add_option("--construct", lc.construct, "collapse | interp");
  lin_app->add_option("--collapse-n", lc.collapse_n, "copies in the collapse dataset");
  lin_app->add_option("--collapse-margin", lc.collapse_margin, "target classification margin");
  lin_app->add_option("--seed", lc.master_seed, "master seed");

  // ---- replay ----
  std::string replay_path;
  auto* replay_app = app.add_subcommand("replay", "re-execute a manifest bit-identically");
  replay_app->add_option("--manifest", replay_path, "manifest.json of a previous run")->required();
  add_common(replay_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg_file = load_config_file(config_path);
    json manifest;
    std::string out_dir;

    if (train_app->parsed()) {
      t_data.merge(*train_app, cfg_file);
      tc.data = t_data.cfg;
      merge_absent(*train_app, "--arch", cfg_file, "arch", t_arch);
      merge_absent(*train_app, "--hidden", cfg_file, "hidden", tc.spec.hidden_dim);
      merge_absent(*train_app, "--mlp-widths", cfg_file, "mlp_widths", t_hidden_widths);
      merge_absent(*train_app, "--activation", cfg_file, "activation", t_act);
      merge_absent(*train_app, "--beta", cfg_file, "beta", tc.spec.softplus_beta);
      merge_absent(*train_app, "--loss", cfg_file, "loss", t_loss);
      merge_absent(*train_app, "--rho", cfg_file, "rho", tc.loss.weight_decay);
      merge_absent(*train_app, "--lr", cfg_file, "lr", tc.train_cfg.lr);
      merge_absent(*train_app, "--momentum", cfg_file, "momentum", tc.train_cfg.momentum);
      merge_absent(*train_app, "--max-iters", cfg_file, "max_iters", tc.train_cfg.max_iters);
      merge_absent(*train_app, "--grad-tol", cfg_file, "grad_tol", tc.train_cfg.grad_tol);
      merge_absent(*train_app, "--theta-init", cfg_file, "theta_init", t_init);
      merge_absent(*train_app, "--seed", cfg_file, "seed", tc.master_seed);
      require(t_arch == "affine" || t_arch == "onehidden" || t_arch == "mlp",
              "unknown arch '" + t_arch + "'");
      tc.spec.arch =
          t_arch == "affine" ? Arch::Affine : (t_arch == "onehidden" ? Arch::OneHidden : Arch::Mlp);
      tc.spec.hidden_widths = t_hidden_widths;
      tc.spec.activation = t_act == "softplus" ? Activation::Softplus : Activation::Relu;
      tc.loss.kind = t_loss == "mse" ? LossKind::Mse : LossKind::Logistic;
      tc.train_cfg.theta_init = t_init == "gaussian" ? ThetaInit::Gaussian : ThetaInit::UniformStd;
      tc.spec.input_dim = 1;  // placeholder; run_train sets it from the data

      out_dir =
          ensure_dir(out_dir_flag.empty() ? timestamp_dir("train", tc.master_seed) : out_dir_flag);
      manifest = run_train(tc, out_dir);
    } else if (rec_app->parsed()) {
      r_data.merge(*rec_app, cfg_file);
      rc.data = r_data.cfg;
      merge_absent(*rec_app, "--method", cfg_file, "method", rc.method);
      merge_absent(*rec_app, "--init", cfg_file, "init", r_init);
      merge_absent(*rec_app, "--eta", cfg_file, "eta", rc.bilevel_cfg.eta);
      merge_absent(*rec_app, "--outer-iters", cfg_file, "outer_iters", rc.bilevel_cfg.outer_iters);
      merge_absent(*rec_app, "--lower-lr", cfg_file, "lower_lr", rc.bilevel_cfg.lower.lr);
      merge_absent(*rec_app, "--gp-lr", cfg_file, "gp_lr", rc.gradpen_cfg.lr);
      merge_absent(*rec_app, "--gp-iters", cfg_file, "gp_iters", rc.gradpen_cfg.iters);
      merge_absent(*rec_app, "--seed", cfg_file, "seed", rc.master_seed);
      if (r_init == "random") rc.init.kind = InitKind::Uniform01;
      else if (r_init == "gaussian") rc.init.kind = InitKind::Gaussian;
      else if (r_init == "gt") rc.init.kind = InitKind::GroundTruth;
      else if (r_init == "partition") rc.init.kind = InitKind::Partition;
      else if (r_init == "mix") rc.init.kind = InitKind::Mix;
      else require(false, "unknown init '" + r_init + "'");

      out_dir = ensure_dir(out_dir_flag.empty() ? timestamp_dir("reconstruct", rc.master_seed)
                                                : out_dir_flag);
      manifest = run_reconstruct(rc, out_dir);
    } else if (sweep_app->parsed()) {
      s_data.merge(*sweep_app, cfg_file);
      sc.data = s_data.cfg;
      merge_absent(*sweep_app, "--method", cfg_file, "method", sc.method);
      merge_absent(*sweep_app, "--lambdas", cfg_file, "lambdas", sc.lambdas);
      merge_absent(*sweep_app, "--seed", cfg_file, "seed", sc.master_seed);
      out_dir =
          ensure_dir(out_dir_flag.empty() ? timestamp_dir("sweep", sc.master_seed) : out_dir_flag);
      manifest = run_sweep(sc, out_dir);
    } else if (lin_app->parsed()) {
      l_data.merge(*lin_app, cfg_file);
      lc.data = l_data.cfg;
      merge_absent(*lin_app, "--construct", cfg_file, "construct", lc.construct);
      merge_absent(*lin_app, "--seed", cfg_file, "seed", lc.master_seed);
      out_dir = ensure_dir(out_dir_flag.empty() ? timestamp_dir("linear-analysis", lc.master_seed)
                                                : out_dir_flag);
      manifest = run_linear_analysis(lc, out_dir);
    } else if (replay_app->parsed()) {
      const json m = read_manifest(replay_path);
      const std::uint64_t seed = m.value("master_seed", std::uint64_t{0});
      out_dir = ensure_dir(out_dir_flag.empty() ? timestamp_dir("replay", seed) : out_dir_flag);
      manifest = replay_manifest(m, out_dir);
    }

    write_manifest(out_dir + "/manifest.json", manifest);
    std::cout << "wrote " << out_dir << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
