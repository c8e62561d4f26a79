// ccreid: command-line front end.
//
//   ccreid gen-world [--config world.cfg] --out data.bin [--csv data.csv]
//   ccreid train     [--config train.cfg] --dataset data.bin --checkpoint model.ckpt [--reports epochs.csv]
//   ccreid eval      --checkpoint model.ckpt --dataset data.bin [--protocol eval.cfg]
//                    --metrics metrics.txt [--per-query ap.csv]
//   ccreid cluster   --checkpoint model.ckpt --dataset data.bin [--config train.cfg] --out labels.csv
//
// Exit status: 0 success, 1 configuration or input error, 2 runtime numeric error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ccreid/clustering.hpp"
#include "ccreid/dataset_io.hpp"
#include "ccreid/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ccreid;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

PipelineConfig pipeline_config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

void gen_world(const std::string& config_path, const fs::path& out, const std::string& csv) {
  WorldConfig config = config_path.empty() ? WorldConfig{} : load_world_config(config_path);
  if (const std::string warning = config.validate(); !warning.empty()) std::cerr << "warning: " << warning << '\n';
  const SyntheticWorld world = SyntheticWorld::generate(config);
  write_dataset(out, dataset_from_world(world));
  if (!csv.empty()) write_dataset_csv(csv, world.samples());
  std::cerr << "wrote " << world.samples().size() << " samples to " << out.string() << '\n';
}

void train(const std::string& config_path, const fs::path& dataset_path, const fs::path& checkpoint_path,
           const std::string& reports_path) {
  const PipelineConfig config = pipeline_config_or_default(config_path);
  const Dataset dataset = read_dataset(dataset_path);
  // The augmentation generator is the world itself, rebuilt from its config.
  const SyntheticWorld world = SyntheticWorld::generate(dataset.config);
  Trainer trainer(config, dataset.samples, world, world.templates());
  std::vector<EpochReport> reports;
  for (int e = 0; e < config.max_epochs; ++e) {
    const EpochReport r = trainer.run_epoch();
    reports.push_back(r);
    if (r.aborted.empty()) {
      std::fprintf(stderr, "epoch %d: %d clusters, %zu noise, loss %.5f, lr %.3g\n", r.epoch, r.num_clusters,
                   r.num_noise, r.mean_total, r.lr);
    } else {
      std::fprintf(stderr, "epoch %d skipped: %s\n", r.epoch, r.aborted.c_str());
    }
    if (config.checkpoint_every > 0 && r.epoch % config.checkpoint_every == 0 && r.epoch < config.max_epochs) {
      fs::path periodic = checkpoint_path;
      periodic += ".epoch" + std::to_string(r.epoch);
      write_checkpoint(periodic, trainer.checkpoint());
    }
  }
  write_checkpoint(checkpoint_path, trainer.checkpoint());
  if (!reports_path.empty()) write_epoch_reports_csv(reports_path, reports);
}

void eval(const fs::path& checkpoint_path, const fs::path& dataset_path, const std::string& protocol_path,
          const fs::path& metrics_path, const std::string& per_query_path) {
  const EvalProtocol protocol = protocol_path.empty() ? EvalProtocol{} : load_eval_protocol(protocol_path);
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  const Dataset dataset = read_dataset(dataset_path);
  const Metrics metrics = evaluate_encoder(ckpt.params, dataset.samples, protocol);
  write_metrics_report(metrics_path, metrics);
  if (!per_query_path.empty()) write_per_query_ap_csv(per_query_path, metrics);
  for (std::size_t i = 0; i < metrics.ranks.size(); ++i) {
    std::printf("rank%d=%.6f\n", metrics.ranks[i], metrics.cmc[i]);
  }
  std::printf("mAP=%.6f\n", metrics.mean_ap);
}

void cluster(const fs::path& checkpoint_path, const fs::path& dataset_path, const std::string& config_path,
             const fs::path& out) {
  const PipelineConfig config = pipeline_config_or_default(config_path);
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  const Dataset dataset = read_dataset(dataset_path);
  std::vector<std::size_t> index;
  std::vector<Vector> raw;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    if (s.is_synthetic || s.split != Split::Train) continue;
    index.push_back(i);
    raw.push_back(s.raw);
  }
  if (raw.empty()) throw Error(ErrorCode::InvalidConfig, "dataset has no training samples to cluster");
  const Matrix features = encode_batch(ckpt.params, stack_rows(raw));
  std::vector<Vector> rows;
  for (Eigen::Index r = 0; r < features.rows(); ++r) rows.push_back(features.row(r).transpose());
  const PseudoLabeling labeling = dbscan(rows, config.eps, config.min_samples);

  std::ofstream csv(out);
  if (!csv) throw Error(ErrorCode::IoError, "cannot open " + out.string());
  csv << "sample_index,label\n";
  for (std::size_t i = 0; i < index.size(); ++i) csv << index[i] << ',' << labeling.labels[i] << '\n';
  if (!csv) throw Error(ErrorCode::IoError, "write failed for " + out.string());
  std::cerr << labeling.num_clusters << " clusters, " << labeling.num_noise() << " noise samples\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised clothing-change re-identification on synthetic embeddings"};
  app.require_subcommand(1);

  std::string config, out, csv, dataset, checkpoint, reports, protocol, metrics, per_query;

  auto* gen_cmd = app.add_subcommand("gen-world", "Generate a synthetic dataset");
  gen_cmd->add_option("-c,--config", config, "World config (key=value)")->check(CLI::ExistingFile);
  gen_cmd->add_option("-o,--out", out, "Dataset file to write")->required();
  gen_cmd->add_option("--csv", csv, "Also write the samples as CSV");

  auto* train_cmd = app.add_subcommand("train", "Train an encoder");
  train_cmd->add_option("-c,--config", config, "Training config (key=value)")->check(CLI::ExistingFile);
  train_cmd->add_option("-d,--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--checkpoint", checkpoint, "Checkpoint to write")->required();
  train_cmd->add_option("-r,--reports", reports, "Per-epoch report CSV");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-d,--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-p,--protocol", protocol, "Evaluation protocol (key=value)")->check(CLI::ExistingFile);
  eval_cmd->add_option("-m,--metrics", metrics, "Metrics report to write")->required();
  eval_cmd->add_option("-q,--per-query", per_query, "Per-query AP CSV");

  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster training samples with a checkpoint");
  cluster_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("-d,--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("-c,--config", config, "Training config supplying eps and min_samples")
      ->check(CLI::ExistingFile);
  cluster_cmd->add_option("-o,--out", out, "Label CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) gen_world(config, out, csv);
    if (*train_cmd) train(config, dataset, checkpoint, reports);
    if (*eval_cmd) eval(checkpoint, dataset, protocol, metrics, per_query);
    if (*cluster_cmd) cluster(checkpoint, dataset, config, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
