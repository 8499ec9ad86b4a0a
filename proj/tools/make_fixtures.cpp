// Writes a synthetic fixture set (disease series, health records, weather)
// plus a config that runs the whole pipeline on it.
#include <CLI11.hpp>
#include <iostream>

#include "outbreak/error.hpp"
#include "outbreak/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic outbreak fixtures", "outbreak-synth"};
  std::string dir;
  outbreak::synthetic::Options opts;
  bool no_observations = false;
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--seed", opts.seed, "Weather jitter seed")->capture_default_str();
  app.add_option("--first-year", opts.first_year)->capture_default_str();
  app.add_option("--years", opts.years)->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--no-observations", no_observations, "Skip the hourly provider tree");
  CLI11_PARSE(app, argc, argv);

  try {
    outbreak::synthetic::write_fixtures(dir, opts, {.observations = !no_observations, .daily_summary = true});
  } catch (const std::exception& e) {
    std::cerr << "outbreak-synth: " << e.what() << '\n';
    return 2;
  }
  std::cerr << "outbreak-synth: wrote fixtures to " << dir << '\n';
  return 0;
}
