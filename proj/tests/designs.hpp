#pragma once

#include <algorithm>
#include <vector>

#include "ndscreen/matrix.hpp"
#include "ndscreen/rng.hpp"

namespace designs {

// N rows, `informative` columns shifted by +-shift/2 according to the label,
// the remaining `noise` columns standard normal. Informative columns sit at
// seeded random positions.
struct Planted {
    ndscreen::Matrix x;
    std::vector<int> y;
    std::vector<std::size_t> informative;
};

inline Planted planted(std::uint64_t seed, std::size_t n, std::size_t informative, std::size_t noise,
                       double shift) {
    ndscreen::Rng rng(seed);
    const std::size_t d = informative + noise;
    std::vector<std::size_t> cols(d);
    for (std::size_t i = 0; i < d; ++i) cols[i] = i;
    for (std::size_t i = d; i > 1; --i) std::swap(cols[i - 1], cols[rng.index(i)]);
    Planted p{ndscreen::Matrix(n, d), {}, {cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(informative)}};
    std::sort(p.informative.begin(), p.informative.end());
    for (std::size_t r = 0; r < n; ++r) {
        const int label = r % 2 == 0 ? 1 : -1;
        p.y.push_back(label);
        for (std::size_t c = 0; c < d; ++c) p.x(r, c) = rng.normal();
        for (std::size_t c : p.informative) p.x(r, c) += 0.5 * shift * label;
    }
    return p;
}

inline std::size_t informative_hits(const std::vector<std::size_t>& selected,
                                    const std::vector<std::size_t>& informative, std::size_t first) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(first, selected.size()); ++i)
        hits += std::count(informative.begin(), informative.end(), selected[i]) > 0 ? 1 : 0;
    return hits;
}

}  // namespace designs
