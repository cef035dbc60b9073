#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "blab/config.hpp"
#include "blab/errors.hpp"
#include "blab/report_json.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << content;
  f.flush();
  if (!f) throw blab::Error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted composition operators on Bergman spaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;

  CLI::App* winfo = app.add_subcommand("weight-info", "weight class membership and regularity");
  CLI::App* classify =
      app.add_subcommand("classify", "boundedness, compactness, and Schatten reports");
  CLI::App* verify = app.add_subcommand("verify", "kernel and geometry invariant suite");
  for (CLI::App* sub : {winfo, classify, verify}) {
    sub->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("-o,--output", out_override, "output path override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const blab::RunConfig cfg = blab::load_run_config(config_path);
    blab::CommandOutput out;

    if (winfo->parsed()) {
      out = blab::run_weight_info(cfg);
      const fs::path target = out_override.empty() ? fs::path(cfg.output) / "weight_info.json"
                                                   : fs::path(out_override);
      write_file(target, out.files.front().second);
    } else if (classify->parsed()) {
      out = blab::run_classify(cfg);
      const fs::path dir = out_override.empty() ? fs::path(cfg.output) : fs::path(out_override);
      for (const auto& [name, content] : out.files) write_file(dir / name, content);
    } else {
      out = blab::run_verify(cfg);
      fs::path json_path, csv_path;
      if (out_override.empty()) {
        json_path = fs::path(cfg.output) / "verify.json";
        csv_path = fs::path(cfg.output) / "verify_plot.csv";
      } else {
        std::string base = out_override;
        if (base.ends_with(".json")) base.resize(base.size() - 5);
        json_path = base + ".json";
        csv_path = base + "_plot.csv";
      }
      write_file(json_path, out.files.at(0).second);
      write_file(csv_path, out.files.at(1).second);
    }

    for (const std::string& m : out.messages) std::cerr << m << '\n';
    return out.exit_code;
  } catch (const blab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const blab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
