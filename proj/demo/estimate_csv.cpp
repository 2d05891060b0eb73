// Estimate both tail dependence coefficients of a two-column CSV file with
// every method.
//
//   demo_estimate_csv returns.csv

#include <cstdio>
#include <exception>

#include "tdc/csv.hpp"
#include "tdc/empirical.hpp"
#include "tdc/selection.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s file.csv\n", argv[0]);
    return 2;
  }
  try {
    const auto data = tdc::read_pairs_file(argv[1]);
    const auto sample = tdc::pseudo_sample(data.points);
    std::printf("%zu pairs (%s, %s), pearson %.3f\n", data.size(), data.x_name.c_str(), data.y_name.c_str(),
                tdc::pearson(data.points));
    for (tdc::Tail tail : {tdc::Tail::lower, tdc::Tail::upper}) {
      for (tdc::Method m : tdc::all_methods) {
        try {
          const auto r = tdc::estimate_method(sample, tail, m);
          std::printf("%-6s %-11s %.4f", std::string(tdc::to_string(tail)).c_str(),
                      std::string(tdc::to_string(m)).c_str(), r.estimate);
          if (r.threshold) std::printf("  rank %zu", *r.threshold);
          if (r.theta_hat) std::printf("  theta %.3f", *r.theta_hat);
          std::printf("\n");
        } catch (const std::exception& e) {
          std::printf("%-6s %-11s failed: %s\n", std::string(tdc::to_string(tail)).c_str(),
                      std::string(tdc::to_string(m)).c_str(), e.what());
        }
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
