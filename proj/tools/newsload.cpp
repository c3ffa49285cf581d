// Command-line driver: newsload <subcommand> --config PATH [--seed N] [--jobs N] [--out DIR]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "newsload/parallel.hpp"
#include "newsload/pipeline.hpp"

namespace {

// Sends stage progress to stderr while keeping a copy for the log file.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int ch) override {
    if (ch == EOF) return !EOF;
    const int r1 = a_->sputc(static_cast<char>(ch));
    const int r2 = b_->sputc(static_cast<char>(ch));
    return r1 == EOF || r2 == EOF ? EOF : ch;
  }
  int sync() override { return a_->pubsync() | b_->pubsync(); }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead electricity demand forecasting with news-derived features"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--jobs", jobs, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Override the output directory");
  for (newsload::Stage s : newsload::kStages) {
    std::string name(newsload::stage_name(s));
    app.add_subcommand(name, "Run the " + name + " stage")->fallthrough();
  }
  CLI11_PARSE(app, argc, argv);

  try {
    newsload::set_worker_count(jobs);
    newsload::ConfigOverrides ov;
    ov.seed = seed;
    if (!out_dir.empty()) ov.output_dir = out_dir;
    const auto config = newsload::load_config(config_path, ov);
    const auto stage = newsload::parse_stage(app.get_subcommands().front()->get_name());

    const auto log_dir = config.output_dir / "logs";
    std::filesystem::create_directories(log_dir);
    std::ofstream log_file(log_dir / (std::string(newsload::stage_name(stage)) + ".log"));
    TeeBuf tee(std::cerr.rdbuf(), log_file.rdbuf());
    std::ostream log(&tee);
    log << "config_hash=" << config.hash << " seed=" << config.seed << " jobs=" << jobs << '\n';
    newsload::run_stage(stage, config, log);
    log.flush();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
