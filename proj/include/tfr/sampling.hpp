#ifndef TFR_SAMPLING_HPP
#define TFR_SAMPLING_HPP

#include <random>
#include <vector>

#include "tfr/rational.hpp"

namespace tfr {

// Positive rational sample coordinates p/q with p,q <= 100, value in (0,10].
inline Rational random_positive_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> qd(1, 100);
    int q = qd(rng);
    std::uniform_int_distribution<int> pd(1, std::min(10 * q, 100));
    return rat(pd(rng), q);
}

inline std::vector<Rational> random_positive_point(std::mt19937_64& rng, std::size_t dim) {
    std::vector<Rational> v;
    v.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) v.push_back(random_positive_rational(rng));
    return v;
}

}  // namespace tfr

#endif
