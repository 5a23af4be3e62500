// resilisim command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "resilisim/commands.hpp"

int main(int argc, char** argv) {
  using namespace resilisim;
  CLI::App app{"Power distribution resilience simulator"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::int64_t episodes = 0;
  unsigned threads = 0;
  std::vector<std::string> areas;

  const std::pair<const char*, const char*> commands[] = {
      {"testbed", "Generate procedural ingest files"},
      {"synth", "Build the distribution network from ingest files"},
      {"estimate", "Run Monte Carlo storm episodes and estimate resilience"},
      {"enhance", "Search DER placements with the genetic algorithm"},
      {"report", "Summarise the artifacts in the output directory"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts, episode_opts, thread_opts, area_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run file (TOML)")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "Master seed"));
    episode_opts.push_back(sub->add_option("--episodes", episodes, "Monte Carlo episodes"));
    thread_opts.push_back(sub->add_option("--threads", threads, "Worker threads (0 = all cores)"));
    area_opts.push_back(sub->add_option("--areas", areas, "Service areas for the DER search")->delimiter(','));
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    Overrides o;
    if (seed_opts[i]->count()) o.seed = seed;
    if (episode_opts[i]->count()) o.episodes = episodes;
    if (thread_opts[i]->count()) o.threads = threads;
    if (area_opts[i]->count()) o.areas = areas;
    const auto cmd = command_from_string(subs[i]->get_name());
    return run_command(*cmd, config, o, std::cout, std::cerr);
  }
  return kExitConfig;
}
