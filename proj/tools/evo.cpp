// evo: certify, solve, ivp and verify linear evolutionary problems from a
// JSON configuration.

#include "cli_commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain solver and stability certifier for evolutionary equations"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    unsigned threads = 1;
  };
  Args args;
  const auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "JSON configuration file")->required();
    sub->add_option("--out", args.out, "output directory")->required();
    sub->add_option("--threads", args.threads, "worker threads for frequency solves")->check(CLI::PositiveNumber);
    return sub;
  };
  CLI::App* certify = add("certify", "check stability hypotheses and report rates");
  CLI::App* solve = add("solve", "solve the configured problem");
  CLI::App* ivp = add("ivp", "solve the initial value problem with u0");
  CLI::App* verify = add("verify", "certify, solve and fit the decay rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return evo::cli::kConfigError;
  }

  using namespace evo::cli;
  if (certify->parsed()) return run_command(cmd_certify, args.config, args.out, args.threads);
  if (solve->parsed()) return run_command(cmd_solve, args.config, args.out, args.threads);
  if (ivp->parsed()) return run_command(cmd_ivp, args.config, args.out, args.threads);
  if (verify->parsed()) return run_command(cmd_verify, args.config, args.out, args.threads);
  return kConfigError;
}
