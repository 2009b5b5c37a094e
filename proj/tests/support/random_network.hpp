#ifndef RXNET_TESTS_RANDOM_NETWORK_HPP
#define RXNET_TESTS_RANDOM_NETWORK_HPP

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "rxnet/network.hpp"

namespace rxnet::testing {

struct NetworkParams {
    int max_species = 8;
    int max_reactions = 16;
    int max_order = 3;
    double k_max = 10.0;
    bool mass_conserving = false;  // equal molecule counts on both sides
};

// Deterministic random NetworkSpec for property tests.
inline NetworkSpec random_network(std::mt19937& rng,
                                  const NetworkParams& p = {}) {
    std::uniform_int_distribution<int> n_dist(1, p.max_species);
    std::uniform_int_distribution<int> m_dist(1, p.max_reactions);
    const int n = n_dist(rng);
    const int m = m_dist(rng);

    NetworkSpec spec;
    for (int i = 0; i < n; ++i) spec.species.push_back("X" + std::to_string(i + 1));
    spec.initial.assign(n, 0.0);
    std::uniform_real_distribution<double> init_dist(0.0, 2.0);
    for (double& v : spec.initial) v = init_dist(rng);

    std::uniform_int_distribution<int> count_dist(0, std::min(3, n));
    std::uniform_int_distribution<int> order_dist(1, p.max_order);
    std::uniform_real_distribution<double> k_dist(1e-3, p.k_max);

    auto pick_side = [&](int target_total) {
        std::vector<Term> side;
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        if (target_total < 0) {
            const int cnt = count_dist(rng);
            for (int i = 0; i < cnt; ++i)
                side.push_back({idx[i], static_cast<double>(order_dist(rng))});
        } else {
            int remaining = target_total;
            for (int i = 0; i < n && remaining > 0; ++i) {
                const int take = std::uniform_int_distribution<int>(
                    i + 1 == n ? remaining : 1, remaining)(rng);
                side.push_back({idx[i], static_cast<double>(take)});
                remaining -= take;
            }
        }
        return side;
    };

    for (int r = 0; r < m; ++r) {
        ReactionSpec rs;
        if (p.mass_conserving) {
            const int total = std::uniform_int_distribution<int>(1, 3)(rng);
            rs.reactants = pick_side(total);
            rs.products = pick_side(total);
        } else {
            rs.reactants = pick_side(-1);
            rs.products = pick_side(-1);
        }
        rs.rate = k_dist(rng);
        spec.reactions.push_back(std::move(rs));
    }
    return spec;
}

inline std::vector<double> random_state(std::mt19937& rng, int n,
                                        double lo = 0.0, double hi = 5.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    return x;
}

}  // namespace rxnet::testing

#endif
