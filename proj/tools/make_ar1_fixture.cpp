// Writes a synthetic AR(1) series y_t = beta y_{t-1} + e_t, e_t ~ N(0,1), as
// a (t,value) CSV on standard output.
#include "acps/io.hpp"
#include "acps/random.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Synthetic AR(1) series", "make_ar1_fixture"};
  int n = 600;
  double beta = 0.8;
  std::uint64_t seed = 20240601;
  int burn = 200;
  app.add_option("--n", n, "Series length")->capture_default_str();
  app.add_option("--beta", beta, "Autoregressive coefficient")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--burn", burn, "Discarded start-up draws")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  acps::Rng rng = acps::make_rng(seed);
  double y = 0.0;
  for (int i = 0; i < burn; ++i)
    y = beta * y + acps::draw_normal(rng);
  std::cout << "t,value\n";
  for (int t = 0; t < n; ++t) {
    y = beta * y + acps::draw_normal(rng);
    std::cout << t << ',' << acps::format_number(y) << '\n';
  }
  return 0;
}
