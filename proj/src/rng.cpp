#include "qtomo/rng.hpp"

namespace qtomo {

std::vector<long> multinomial_counts(const std::vector<double>& probabilities,
                                     long shots, std::mt19937_64& gen) {
    std::vector<long> counts(probabilities.size(), 0);
    if (probabilities.empty()) return counts;
    double total = 0.0;
    for (double p : probabilities) total += p;
    for (long s = 0; s < shots; ++s) {
        double u = uniform01(gen) * total;
        double acc = 0.0;
        std::size_t bin = probabilities.size() - 1;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            acc += probabilities[i];
            if (u < acc) {
                bin = i;
                break;
            }
        }
        ++counts[bin];
    }
    return counts;
}

}  // namespace qtomo
