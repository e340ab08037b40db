// Command line front end: run / sweep / replay / record / report.
#include <omp.h>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfcl/config.hpp"
#include "tfcl/metrics.hpp"
#include "tfcl/trainer.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string profile;
  std::string variant;
  std::uint64_t seed = 1;
  std::vector<int> hidden;
  int embed_dim = 8;
  double lr = 0.01;
  double lambda = 0.5;
  double margin = 0.2;
  int buffer_capacity = 30;
  bool buffer_normalize = false;
  int window = 5;
  double delta_mu = 0.5;
  double delta_sigma = 0.1;
  int inner_steps = 3;
  std::string omega_mode;
  int eval_every = 50;
  int eval_per_segment = 400;
  int epochs = 5;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config,-c", f.config_path, "key-value config file")
      ->required();
  cmd->add_option("--profile", f.profile,
                  "hyperparameter bundle: classification|sphere|embedding");
  cmd->add_option("--variant", f.variant,
                  "online-no-buffer|online-baseline|online-continual|"
                  "online-joint|offline-joint");
  cmd->add_option("--seed", f.seed, "stream and init seed");
  cmd->add_option("--hidden", f.hidden, "hidden layer widths");
  cmd->add_option("--embed-dim", f.embed_dim, "embedding width (triplet head)");
  cmd->add_option("--lr", f.lr, "SGD learning rate");
  cmd->add_option("--lambda", f.lambda, "penalty strength");
  cmd->add_option("--margin", f.margin, "triplet margin");
  cmd->add_option("--buffer-capacity", f.buffer_capacity, "hard buffer size");
  cmd->add_flag("--buffer-normalize,!--no-buffer-normalize", f.buffer_normalize,
                "split buffer slots evenly over classes");
  cmd->add_option("--window", f.window, "loss window length");
  cmd->add_option("--delta-mu", f.delta_mu, "plateau mean threshold");
  cmd->add_option("--delta-sigma", f.delta_sigma, "plateau std threshold");
  cmd->add_option("--inner-steps", f.inner_steps, "gradient steps per batch");
  cmd->add_option("--omega-mode", f.omega_mode, "cumulative|decaying");
  cmd->add_option("--eval-every", f.eval_every, "eval cadence in batches");
  cmd->add_option("--eval-per-segment", f.eval_per_segment,
                  "held-out samples per segment");
  cmd->add_option("--epochs", f.epochs, "offline-joint epochs");
}

tfcl::RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  const tfcl::KeyValueConfig kv = tfcl::KeyValueConfig::parse_file(f.config_path);
  tfcl::RunConfig cfg;
  std::string profile = kv.get_str("profile", "");
  if (cmd->count("--profile") != 0) profile = f.profile;
  if (!profile.empty()) tfcl::apply_profile(cfg, profile);
  tfcl::overlay_run_config(cfg, kv);
  kv.require_all_consumed();

  if (cmd->count("--variant") != 0) cfg.variant = tfcl::parse_variant(f.variant);
  if (cmd->count("--seed") != 0) cfg.seed = f.seed;
  if (cmd->count("--hidden") != 0) cfg.hidden = f.hidden;
  if (cmd->count("--embed-dim") != 0) cfg.embed_dim = f.embed_dim;
  if (cmd->count("--lr") != 0) cfg.lr = f.lr;
  if (cmd->count("--lambda") != 0) cfg.lambda = f.lambda;
  if (cmd->count("--margin") != 0) cfg.margin = f.margin;
  if (cmd->count("--buffer-capacity") != 0) cfg.buffer_capacity = f.buffer_capacity;
  if (cmd->count("--buffer-normalize") != 0 ||
      cmd->count("--no-buffer-normalize") != 0)
    cfg.buffer_normalize = f.buffer_normalize;
  if (cmd->count("--window") != 0) cfg.window = f.window;
  if (cmd->count("--delta-mu") != 0) cfg.delta_mu = f.delta_mu;
  if (cmd->count("--delta-sigma") != 0) cfg.delta_sigma = f.delta_sigma;
  if (cmd->count("--inner-steps") != 0) cfg.inner_steps = f.inner_steps;
  if (cmd->count("--omega-mode") != 0)
    cfg.omega_mode = tfcl::parse_omega_mode(f.omega_mode);
  if (cmd->count("--eval-every") != 0) cfg.eval_every = f.eval_every;
  if (cmd->count("--eval-per-segment") != 0) cfg.eval_per_segment = f.eval_per_segment;
  if (cmd->count("--epochs") != 0) cfg.epochs = f.epochs;
  return cfg;
}

void print_run_summary(const tfcl::MetricsLog& log) {
  if (log.records.empty()) {
    std::cout << log.variant << " seed " << log.seed << ": no eval records\n";
    return;
  }
  const tfcl::EvalRecord& last = log.records.back();
  std::cout << log.variant << " seed " << log.seed << ": step " << last.step
            << " acc_total " << tfcl::format_g17(last.total_acc)
            << " acc_weighted " << tfcl::format_g17(last.weighted_acc)
            << " consolidations " << log.events.size() << "\n";
}

int finish_run(const tfcl::MetricsLog& log, const std::string& out_path) {
  tfcl::export_csv(log, out_path);
  print_run_summary(log);
  if (log.aborted_step >= 0) {
    std::cerr << "run aborted: " << log.fault << "\n";
    return 2;
  }
  return 0;
}

int do_sweep(const CLI::App* cmd, const Flags& f,
             const std::vector<std::string>& variants,
             const std::vector<std::uint64_t>& seeds,
             const std::string& out_path) {
  const tfcl::RunConfig base = build_config(cmd, f);
  struct Cell {
    tfcl::RunConfig cfg;
    tfcl::MetricsLog log;
    std::string error;
  };
  std::vector<Cell> cells;
  for (const std::string& v : variants) {
    for (std::uint64_t s : seeds) {
      Cell c;
      c.cfg = base;
      c.cfg.variant = tfcl::parse_variant(v);
      c.cfg.seed = s;
      cells.push_back(std::move(c));
    }
  }

  // Independent configs; each worker runs one single-threaded loop.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cells.size(); ++i) {
    try {
      cells[i].log = tfcl::train_online(cells[i].cfg);
    } catch (const std::exception& e) {
      cells[i].error = e.what();
    }
  }

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    std::cerr << "cannot open for writing: " << out_path << "\n";
    return 1;
  }
  int rc = 0;
  bool wrote_header = false;
  for (const Cell& c : cells) {
    if (!c.error.empty()) {
      std::cerr << tfcl::to_string(c.cfg.variant) << " seed " << c.cfg.seed
                << " failed: " << c.error << "\n";
      rc = 2;
      continue;
    }
    if (!wrote_header) {
      out << tfcl::csv_header(c.log.segment_count) << "\n";
      wrote_header = true;
    }
    tfcl::append_csv(c.log, out);
    print_run_summary(c.log);
    if (c.log.aborted_step >= 0) {
      std::cerr << "run aborted: " << c.log.fault << "\n";
      rc = 2;
    }
  }
  return rc;
}

int do_report(const std::string& in_path) {
  const tfcl::CsvTable t = tfcl::parse_csv_file(in_path);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < t.header.size(); ++i) col[t.header[i]] = i;
  for (const char* need : {"step", "variant", "seed", "acc_total",
                           "acc_weighted", "consolidation"}) {
    if (col.count(need) == 0) {
      std::cerr << "csv is missing column " << need << "\n";
      return 1;
    }
  }
  std::vector<std::size_t> forget_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i].rfind("forget_seg", 0) == 0) forget_cols.push_back(i);

  struct Agg {
    long last_step = -1;
    double acc_total = 0, acc_weighted = 0, mean_forget = 0;
    long consolidations = 0;
  };
  std::map<std::string, Agg> by_run;  // key "variant seed"
  for (const auto& row : t.rows) {
    const std::string key = row[col["variant"]] + " seed " + row[col["seed"]];
    Agg& a = by_run[key];
    const long step = std::stol(row[col["step"]]);
    a.consolidations += std::stol(row[col["consolidation"]]);
    if (step < a.last_step) continue;
    a.last_step = step;
    a.acc_total = std::stod(row[col["acc_total"]]);
    a.acc_weighted = std::stod(row[col["acc_weighted"]]);
    double fsum = 0;
    for (std::size_t c : forget_cols) fsum += std::stod(row[c]);
    a.mean_forget = forget_cols.empty() ? 0 : fsum / forget_cols.size();
  }

  std::printf("%-34s %8s %10s %12s %12s %8s\n", "run", "step", "acc_total",
              "acc_weighted", "mean_forget", "consol");
  for (const auto& [key, a] : by_run)
    std::printf("%-34s %8ld %10.4f %12.4f %12.4f %8ld\n", key.c_str(),
                a.last_step, a.acc_total, a.acc_weighted, a.mean_forget,
                a.consolidations);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-free online continual learning harness"};
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, replay_flags;
  std::string run_out = "run.csv", run_record, run_replay;
  CLI::App* run = app.add_subcommand("run", "train a single config");
  add_run_flags(run, run_flags);
  run->add_option("--out,-o", run_out, "metrics CSV path");
  run->add_option("--record", run_record, "dump the stream here and train from the dump");
  run->add_option("--replay", run_replay, "train from this recorded stream");

  std::vector<std::string> sweep_variants = {
      "online-no-buffer", "online-baseline", "online-continual",
      "online-joint", "offline-joint"};
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};
  std::string sweep_out = "sweep.csv";
  CLI::App* sweep = app.add_subcommand("sweep", "grid over variants x seeds");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--variants", sweep_variants, "variants to run");
  sweep->add_option("--seeds", sweep_seeds, "seeds to run");
  sweep->add_option("--out,-o", sweep_out, "combined metrics CSV path");

  std::string replay_in, replay_out = "replay.csv";
  CLI::App* replay = app.add_subcommand("replay", "train from a recorded stream");
  add_run_flags(replay, replay_flags);
  replay->add_option("--stream", replay_in, "recorded stream file")->required();
  replay->add_option("--out,-o", replay_out, "metrics CSV path");

  Flags record_flags;
  std::string record_out = "stream.bin";
  CLI::App* record = app.add_subcommand("record", "dump a stream to a file");
  add_run_flags(record, record_flags);
  record->add_option("--out,-o", record_out, "recording path");

  std::string report_in;
  CLI::App* report = app.add_subcommand("report", "summarize a metrics CSV");
  report->add_option("--in,-i", report_in, "metrics CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      tfcl::RunConfig cfg = build_config(run, run_flags);
      if (run->count("--record") != 0) cfg.record_path = run_record;
      if (run->count("--replay") != 0) cfg.replay_path = run_replay;
      return finish_run(tfcl::train_online(cfg), run_out);
    }
    if (sweep->parsed())
      return do_sweep(sweep, sweep_flags, sweep_variants, sweep_seeds, sweep_out);
    if (replay->parsed()) {
      tfcl::RunConfig cfg = build_config(replay, replay_flags);
      cfg.replay_path = replay_in;
      return finish_run(tfcl::train_online(cfg), replay_out);
    }
    if (record->parsed()) {
      const tfcl::RunConfig cfg = build_config(record, record_flags);
      auto stream = tfcl::make_stream(cfg.stream, cfg.seed);
      const long n = stream->total_batches();
      tfcl::record_stream(*stream, record_out);
      std::cout << "recorded " << n << " batches to " << record_out << "\n";
      return 0;
    }
    if (report->parsed()) return do_report(report_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
