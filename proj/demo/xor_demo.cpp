// Greedy CART versus DPDT on the XOR problem at depth 2.
//
//   ./xor_demo [samples] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include <dpdt/dpdt.hpp>

int main(int argc, char** argv) {
  std::size_t n = argc > 1 ? std::stoul(argv[1]) : 10000;
  std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 15;
  dpdt::Dataset data = dpdt::generate_xor(n, seed);

  dpdt::GreedyConfig greedy;
  greedy.max_depth = 2;
  dpdt::Tree cart = dpdt::fit_greedy(data, greedy);

  dpdt::DpdtConfig config;
  config.max_depth = 2;
  config.generator = dpdt::GeneratorSpec::cart_call({2, 2});
  dpdt::DpdtResult fit = dpdt::fit_dpdt(data, config);

  std::cout << "greedy, accuracy " << dpdt::accuracy(cart, data) << "\n"
            << dpdt::describe(cart, data.feature_names()) << "\n"
            << "dpdt, accuracy " << dpdt::accuracy(fit.tree, data) << ", " << fit.ops.candidate_splits_generated()
            << " candidate splits\n"
            << dpdt::describe(fit.tree, data.feature_names());
  return EXIT_SUCCESS;
}
