// Command-line front end: colour transfer, point-set registration, cost
// inspection and loss-curve emission on top of the l2ot library.
//
// Exit codes: 0 success, 2 usage error, 3 input/parse error, 4 numerical
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "l2ot/errors.hpp"
#include "l2ot/io.hpp"
#include "l2ot/kernel.hpp"
#include "l2ot/pipeline.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

struct SharedOpts {
  double h = 0.1;
  double h_tilde = -1.0;  // < 0: follow --h
  double hc = 0.05;
  double lambda = 0.5;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double lambda3 = 1e-3;
  std::string mode = "legacy";
  long max_samples = 3000;
  std::uint64_t seed = 0;
  int stages = 4;
  double anneal = 0.5;
  double initial_h = 0.5;
  int inner_iters = 200;
  double grad_tol = 1e-6;
  bool anneal_hc = false;
  std::string controls = "grid";
  int grid_size = 0;
  bool include_t0 = false;
  bool include_t1 = true;
  double report_h = 0.05;
  std::string trace_path;
  std::string out_path;
  std::string config_path;
};

void add_shared_flags(CLI::App* cmd, SharedOpts& o) {
  cmd->set_help_flag("--help", "Print help and exit");  // frees --h
  cmd->add_option("--h", o.h, "Kernel bandwidth h for the target-side density");
  cmd->add_option("--h-tilde", o.h_tilde, "Source-side bandwidth h~ (default: same as --h)");
  cmd->add_option("--hc", o.hc, "Robust-cost bandwidth hc");
  cmd->add_option("--lambda", o.lambda, "Supervised/unsupervised mixing weight (combined mode)")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--lambda1", o.lambda1, "Correspondence-term weight (legacy mode)");
  cmd->add_option("--lambda2", o.lambda2, "Range-penalty weight");
  cmd->add_option("--lambda3", o.lambda3, "Smoothness-penalty weight");
  cmd->add_option("--mode", o.mode, "Data-term mode: legacy or combined")
      ->check(CLI::IsMember({"legacy", "combined"}));
  cmd->add_option("--max-samples", o.max_samples, "Point-cloud subsampling cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed for all sampling");
  cmd->add_option("--stages", o.stages, "Annealing stages")->check(CLI::PositiveNumber);
  cmd->add_option("--anneal", o.anneal, "Bandwidth decay factor per stage");
  cmd->add_option("--initial-h", o.initial_h, "Starting bandwidth of the annealing schedule");
  cmd->add_option("--inner-iters", o.inner_iters, "Max accepted steps per stage")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grad-tol", o.grad_tol, "Projected-gradient stopping tolerance");
  cmd->add_flag("--anneal-hc", o.anneal_hc, "Also anneal hc (ends at --hc)");
  cmd->add_option("--controls", o.controls, "Control placement: grid or kmeans")
      ->check(CLI::IsMember({"grid", "kmeans"}));
  cmd->add_option("--grid-size", o.grid_size, "Control lattice points per axis (0 = default)");
  cmd->add_flag("--include-t0,!--no-include-t0", o.include_t0, "Include the T0 self-term");
  cmd->add_flag("--include-t1,!--no-include-t1", o.include_t1, "Include the T1 self-term");
  cmd->add_option("--report-h", o.report_h, "Bandwidth of the reported L2 divergence");
  cmd->add_option("--trace", o.trace_path, "Write the per-iterate CSV trace here");
  cmd->add_option("--out", o.out_path, "Output path");
  cmd->add_option("--config", o.config_path, "Key-value config file (command line wins)");
}

// Apply `key = value` lines from the config file to every option the command
// line left untouched. Keys mirror the long flag names (dashes or
// underscores both accepted).
void apply_config_file(const CLI::App* cmd, SharedOpts& o) {
  if (o.config_path.empty()) return;
  std::ifstream is(o.config_path);
  if (!is) throw l2ot::ParseError("cannot open config file '" + o.config_path + "'");

  const auto untouched = [&](const std::string& flag) { return cmd->count(flag) == 0; };
  const auto to_bool = [](const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw l2ot::ParseError("config: expected a boolean, got '" + v + "'", line);
  };

  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string key, value;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      key = line.substr(0, eq);
      value = line.substr(eq + 1);
    } else {
      std::istringstream ls(line);
      ls >> key >> value;
    }
    const auto trim = [](std::string& s) {
      const auto from = s.find_first_not_of(" \t\r");
      const auto to = s.find_last_not_of(" \t\r");
      s = from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    trim(key);
    trim(value);
    if (key.empty()) continue;
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    if (value.empty()) throw l2ot::ParseError("config: missing value for '" + key + "'", line_no);

    const auto num = [&]() {
      try {
        return std::stod(value);
      } catch (const std::exception&) {
        throw l2ot::ParseError("config: expected a number for '" + key + "'", line_no);
      }
    };
    if (key == "h") { if (untouched("--h")) o.h = num(); }
    else if (key == "h-tilde") { if (untouched("--h-tilde")) o.h_tilde = num(); }
    else if (key == "hc") { if (untouched("--hc")) o.hc = num(); }
    else if (key == "lambda") { if (untouched("--lambda")) o.lambda = num(); }
    else if (key == "lambda1") { if (untouched("--lambda1")) o.lambda1 = num(); }
    else if (key == "lambda2") { if (untouched("--lambda2")) o.lambda2 = num(); }
    else if (key == "lambda3") { if (untouched("--lambda3")) o.lambda3 = num(); }
    else if (key == "mode") { if (untouched("--mode")) o.mode = value; }
    else if (key == "max-samples") { if (untouched("--max-samples")) o.max_samples = static_cast<long>(num()); }
    else if (key == "seed") { if (untouched("--seed")) o.seed = static_cast<std::uint64_t>(num()); }
    else if (key == "stages") { if (untouched("--stages")) o.stages = static_cast<int>(num()); }
    else if (key == "anneal") { if (untouched("--anneal")) o.anneal = num(); }
    else if (key == "initial-h") { if (untouched("--initial-h")) o.initial_h = num(); }
    else if (key == "inner-iters") { if (untouched("--inner-iters")) o.inner_iters = static_cast<int>(num()); }
    else if (key == "grad-tol") { if (untouched("--grad-tol")) o.grad_tol = num(); }
    else if (key == "anneal-hc") { if (untouched("--anneal-hc")) o.anneal_hc = to_bool(value, line_no); }
    else if (key == "controls") { if (untouched("--controls")) o.controls = value; }
    else if (key == "grid-size") { if (untouched("--grid-size")) o.grid_size = static_cast<int>(num()); }
    else if (key == "include-t0") { if (untouched("--include-t0")) o.include_t0 = to_bool(value, line_no); }
    else if (key == "include-t1") { if (untouched("--include-t1")) o.include_t1 = to_bool(value, line_no); }
    else if (key == "report-h") { if (untouched("--report-h")) o.report_h = num(); }
    else {
      throw l2ot::ParseError("config: unknown key '" + key + "'", line_no);
    }
  }
  if (o.mode != "legacy" && o.mode != "combined") {
    throw l2ot::ParseError("config: mode must be 'legacy' or 'combined'");
  }
  if (o.controls != "grid" && o.controls != "kmeans") {
    throw l2ot::ParseError("config: controls must be 'grid' or 'kmeans'");
  }
}

l2ot::PipelineOptions to_pipeline_options(const SharedOpts& o) {
  l2ot::PipelineOptions opts;
  const double ht = o.h_tilde < 0.0 ? o.h : o.h_tilde;
  opts.cost.h_sq = o.h * o.h;
  opts.cost.ht_sq = ht * ht;
  opts.cost.hc_sq = o.hc * o.hc;
  opts.cost.mode =
      o.mode == "legacy" ? l2ot::CostMode::LegacyWeights : l2ot::CostMode::CombinedMixture;
  opts.cost.lambda = o.lambda;
  opts.cost.lambda1 = o.lambda1;
  opts.cost.include_t0 = o.include_t0;
  opts.cost.include_t1 = o.include_t1;
  opts.penalties.lambda2 = o.lambda2;
  opts.penalties.lambda3 = o.lambda3;
  opts.solver.max_outer = o.stages;
  opts.solver.anneal_factor = o.anneal;
  opts.solver.initial_h = o.initial_h;
  opts.solver.inner_iters = o.inner_iters;
  opts.solver.grad_tol = o.grad_tol;
  opts.solver.anneal_hc = o.anneal_hc;
  opts.solver.seed = o.seed;
  opts.solver.placement = o.controls == "kmeans" ? l2ot::ControlPlacement::KMeans
                                                 : l2ot::ControlPlacement::Grid;
  opts.solver.grid_size = o.grid_size;
  opts.max_samples = o.max_samples;
  opts.seed = o.seed;
  opts.report_bandwidth = o.report_h;
  return opts;
}

json config_json(const SharedOpts& o, const l2ot::CostConfig& resolved) {
  json cfg;
  cfg["h"] = o.h;
  cfg["h_tilde"] = o.h_tilde < 0.0 ? o.h : o.h_tilde;
  cfg["hc"] = o.hc;
  cfg["mode"] = o.mode;
  cfg["lambda"] = resolved.lambda;
  cfg["lambda1"] = o.lambda1;
  cfg["lambda2"] = o.lambda2;
  cfg["lambda3"] = o.lambda3;
  cfg["include_t0"] = resolved.include_t0;
  cfg["include_t1"] = resolved.include_t1;
  cfg["stages"] = o.stages;
  cfg["anneal"] = o.anneal;
  cfg["initial_h"] = o.initial_h;
  cfg["inner_iters"] = o.inner_iters;
  cfg["grad_tol"] = o.grad_tol;
  cfg["anneal_hc"] = o.anneal_hc;
  cfg["controls"] = o.controls;
  cfg["grid_size"] = o.grid_size;
  cfg["max_samples"] = o.max_samples;
  cfg["seed"] = o.seed;
  cfg["report_h"] = o.report_h;
  return cfg;
}

void write_manifest(const std::string& command, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const json& cfg) {
  if (outputs.empty()) return;
  json m;
  m["tool"] = "l2ot";
  m["version"] = kToolVersion;
  m["command"] = command;
  json in = json::array();
  for (const std::string& path : inputs) {
    in.push_back({{"path", path}, {"fnv1a64", l2ot::fnv1a_file_hex(path)}});
  }
  m["inputs"] = in;
  m["config"] = cfg;
  m["outputs"] = outputs;

  const std::string manifest_path = outputs.front() + ".manifest.json";
  std::ofstream os(manifest_path);
  if (!os) throw l2ot::ParseError("cannot write manifest '" + manifest_path + "'");
  os << m.dump(2) << '\n';
}

void write_trace_file(const std::string& path, const l2ot::SolveReport& report) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw l2ot::ParseError("cannot write trace '" + path + "'");
  l2ot::write_trace_csv(os, report);
}

std::optional<l2ot::CorrespondenceSet> load_correspondences(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return l2ot::read_correspondences_csv(path);
}

int run_transfer(const SharedOpts& o, const std::string& target_path,
                 const std::string& palette_path, const std::string& corr_path) {
  const l2ot::ImageBuffer target_img = l2ot::read_png(target_path);
  const l2ot::ImageBuffer palette_img = l2ot::read_png(palette_path);
  const auto corr = load_correspondences(corr_path);

  const l2ot::PipelineOptions opts = to_pipeline_options(o);
  const std::string out = o.out_path.empty() ? "recoloured.png" : o.out_path;

  const l2ot::TransferResult result =
      l2ot::transfer(target_img, palette_img, corr ? &*corr : nullptr, opts);

  l2ot::write_png(out, result.output);
  write_trace_file(o.trace_path, result.report);

  std::vector<std::string> inputs = {target_path, palette_path};
  if (!corr_path.empty()) inputs.push_back(corr_path);
  std::vector<std::string> outputs = {out};
  if (!o.trace_path.empty()) outputs.push_back(o.trace_path);
  write_manifest("transfer", inputs, outputs, config_json(o, result.resolved_cost));

  std::printf("L2 divergence (h = %g): before %.9g, after %.9g\n", o.report_h, result.l2_before,
              result.l2_after);
  std::printf("wrote %s (solve %.2f s, %zu iterates)\n", out.c_str(),
              result.report.wall_seconds, result.report.trace.size());
  return 0;
}

int run_register(const SharedOpts& o, const std::string& target_path,
                 const std::string& source_path, const std::string& corr_path) {
  const l2ot::PointCloud target = l2ot::read_cloud_csv(target_path);
  const l2ot::PointCloud source = l2ot::read_cloud_csv(source_path);
  const auto corr = load_correspondences(corr_path);

  const l2ot::PipelineOptions opts = to_pipeline_options(o);
  const std::string out = o.out_path.empty() ? "transform.txt" : o.out_path;

  const l2ot::RegisterResult result =
      l2ot::register_clouds(target, source, corr ? &*corr : nullptr, opts);

  l2ot::save_transform(out, result.transform);
  write_trace_file(o.trace_path, result.report);

  std::vector<std::string> inputs = {target_path, source_path};
  if (!corr_path.empty()) inputs.push_back(corr_path);
  std::vector<std::string> outputs = {out};
  if (!o.trace_path.empty()) outputs.push_back(o.trace_path);
  write_manifest("register", inputs, outputs, config_json(o, result.resolved_cost));

  if (result.rmse) std::printf("final RMSE over correspondences: %.9g\n", *result.rmse);
  std::printf("wrote %s (solve %.2f s, %zu iterates)\n", out.c_str(),
              result.report.wall_seconds, result.report.trace.size());
  return 0;
}

int run_eval_cost(const SharedOpts& o, const std::string& target_path,
                  const std::string& source_path, const std::string& corr_path,
                  const std::string& transform_path) {
  const l2ot::PointCloud target = l2ot::read_cloud_csv(target_path);
  const l2ot::PointCloud source = l2ot::read_cloud_csv(source_path);
  const auto corr = load_correspondences(corr_path);

  const l2ot::PipelineOptions opts = to_pipeline_options(o);
  const l2ot::TpsTransform transform = transform_path.empty()
                                           ? l2ot::TpsTransform::identity(source.dim())
                                           : l2ot::load_transform(transform_path);

  const l2ot::CostBreakdown breakdown = l2ot::full_cost(
      target, source, corr ? &*corr : nullptr, transform, opts.cost, opts.penalties, false);
  std::fputs(breakdown.to_record().c_str(), stdout);
  return 0;
}

int run_losses(const SharedOpts& o, double sigma, double eps_max, int points,
               const std::string& kinds_csv) {
  if (sigma <= 0.0 || points < 1) throw CLI::ValidationError("losses", "bad sigma or points");
  std::vector<l2ot::LossSpec> kinds;
  std::stringstream ss(kinds_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "least_squares") kinds.push_back(l2ot::LossSpec::least_squares());
    else if (name == "absolute") kinds.push_back(l2ot::LossSpec::absolute());
    else if (name == "welsch_leclerc") kinds.push_back(l2ot::LossSpec::welsch_leclerc(sigma));
    else if (name == "geman_mcclure") kinds.push_back(l2ot::LossSpec::geman_mcclure(sigma));
    else throw CLI::ValidationError("losses", "unknown loss kind '" + name + "'");
  }
  if (eps_max <= 0.0) eps_max = 5.0 * sigma;

  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = eps_max * i / static_cast<double>(points - 1 > 0 ? points - 1 : 1);
  }
  const l2ot::LossCurveTable table = l2ot::emit_loss_curves(kinds, grid);

  if (o.out_path.empty()) {
    table.write_csv(std::cout);
  } else {
    std::ofstream os(o.out_path);
    if (!os) throw l2ot::ParseError("cannot write '" + o.out_path + "'");
    table.write_csv(os);
    json cfg;
    cfg["sigma"] = sigma;
    cfg["eps_max"] = eps_max;
    cfg["points"] = points;
    cfg["kinds"] = kinds_csv;
    write_manifest("losses", {}, {o.out_path}, cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust transport / L2 point-cloud alignment and colour transfer"};
  app.set_help_flag("--help", "Print help and exit");
  app.require_subcommand(1);

  SharedOpts transfer_opts, register_opts, eval_opts, losses_opts;
  std::string t_target, t_palette, t_corr;
  std::string r_target, r_source, r_corr;
  std::string e_target, e_source, e_corr, e_transform;
  double sigma = 1.0, eps_max = -1.0;
  int points = 256;
  std::string kinds = "least_squares,absolute,welsch_leclerc,geman_mcclure";

  CLI::App* cmd_transfer =
      app.add_subcommand("transfer", "Recolour an image with another image's palette");
  cmd_transfer->add_option("target", t_target, "Image to recolour (PNG)")->required();
  cmd_transfer->add_option("palette", t_palette, "Palette image (PNG)")->required();
  cmd_transfer->add_option("--correspondences", t_corr,
                           "CSV of colour pairs: target R,G,B, source R,G,B");
  add_shared_flags(cmd_transfer, transfer_opts);

  CLI::App* cmd_register = app.add_subcommand("register", "Register two point-cloud CSVs");
  cmd_register->add_option("target", r_target, "Target cloud CSV")->required();
  cmd_register->add_option("source", r_source, "Source cloud CSV")->required();
  cmd_register->add_option("--correspondences", r_corr, "CSV of paired points (target, source)");
  add_shared_flags(cmd_register, register_opts);

  CLI::App* cmd_eval = app.add_subcommand("eval-cost", "Print the cost breakdown");
  cmd_eval->add_option("target", e_target, "Target cloud CSV")->required();
  cmd_eval->add_option("source", e_source, "Source cloud CSV")->required();
  cmd_eval->add_option("--correspondences", e_corr, "CSV of paired points");
  cmd_eval->add_option("--transform", e_transform, "Transform record (default: identity)");
  add_shared_flags(cmd_eval, eval_opts);
  eval_opts.include_t0 = true;  // reporting mode defaults
  eval_opts.include_t1 = true;

  CLI::App* cmd_losses = app.add_subcommand("losses", "Emit the loss-curve CSV");
  cmd_losses->add_option("--sigma", sigma, "Scale of the bounded losses");
  cmd_losses->add_option("--eps-max", eps_max, "Grid upper end (default 5 sigma)");
  cmd_losses->add_option("--points", points, "Grid size")->check(CLI::PositiveNumber);
  cmd_losses->add_option("--kinds", kinds, "Comma-separated loss kinds");
  add_shared_flags(cmd_losses, losses_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_transfer->parsed()) {
      apply_config_file(cmd_transfer, transfer_opts);
      return run_transfer(transfer_opts, t_target, t_palette, t_corr);
    }
    if (cmd_register->parsed()) {
      apply_config_file(cmd_register, register_opts);
      return run_register(register_opts, r_target, r_source, r_corr);
    }
    if (cmd_eval->parsed()) {
      apply_config_file(cmd_eval, eval_opts);
      return run_eval_cost(eval_opts, e_target, e_source, e_corr, e_transform);
    }
    if (cmd_losses->parsed()) {
      apply_config_file(cmd_losses, losses_opts);
      return run_losses(losses_opts, sigma, eps_max, points, kinds);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const l2ot::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 3;
  } catch (const l2ot::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const l2ot::SolveError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
