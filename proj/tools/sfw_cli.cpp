#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sfw/config.hpp"
#include "sfw/driver.hpp"
#include "sfw/report.hpp"
#include "sfw/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir,
            const std::optional<std::uint64_t>& seed) {
  sfw::RunConfig c = sfw::load_config(config_path);
  if (seed) c.seed = *seed;
  std::string out = c.output.empty() ? std::string(sfw::method_name(c.method)) + ".csv" : c.output;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    out = (std::filesystem::path(*out_dir) / std::filesystem::path(out).filename()).string();
  }
  const sfw::Trace t = sfw::run(c);
  sfw::emit_csv(t, out);
  const auto& last = t.records.back();
  std::cerr << t.label << ": K=" << last.k << " f=" << sfw::format_real(last.f_value)
            << " gap=" << sfw::format_real(last.fw_gap) << " grad_calls=" << last.grad_calls
            << " bits_sent=" << last.bits_sent << " -> " << out << "\n";
  return 0;
}

int cmd_plot(const std::vector<std::string>& csvs, const std::string& x, const std::string& y,
             const std::string& out) {
  std::vector<sfw::Trace> traces;
  for (const auto& path : csvs) traces.push_back(sfw::read_csv_file(path));
  sfw::emit_plot(traces, sfw::parse_plot_axis(x), out, sfw::parse_plot_metric(y));
  std::cerr << "wrote " << out << "\n";
  return 0;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& check : sfw::verify::all_checks()) {
    const auto r = sfw::verify::timed(check);
    std::cout << sfw::verify::format_line(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Frank-Wolfe experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one configuration and write its CSV trace");
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "key=value configuration file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the configured seed");

  auto* plot = app.add_subcommand("plot", "draw CSV traces as an SVG");
  std::vector<std::string> csvs;
  std::string x_axis = "iter", y_metric = "f_value", plot_out;
  plot->add_option("csv", csvs, "trace files")->required();
  plot->add_option("--x", x_axis, "x axis")->check(CLI::IsMember({"iter", "grad_calls", "bits_sent"}));
  plot->add_option("--y", y_metric, "y metric")->check(CLI::IsMember({"f_value", "fw_gap"}));
  plot->add_option("--out", plot_out, "output SVG")->required();

  auto* verify = app.add_subcommand("verify", "run the acceptance checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed);
    if (plot->parsed()) return cmd_plot(csvs, x_axis, y_metric, plot_out);
    if (verify->parsed()) return cmd_verify();
  } catch (const sfw::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
