#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "diffusim/common.hpp"

namespace diffusim {

/// Undirected network with mandatory self-loops: every node belongs to its
/// own neighborhood, so diffusion combinations always include the node itself.
class NetworkGraph {
public:
    explicit NetworkGraph(int n) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0) {
        require(n >= 1, "node count must be >= 1");
        for (int i = 0; i < n; ++i) set_link(i, i);
    }

    static NetworkGraph erdos_renyi(int n, double p, std::mt19937_64& rng) {
        require(n >= 1, "node count must be >= 1");
        require(p >= 0.0 && p <= 1.0, "link probability must be in [0,1]");
        NetworkGraph g(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (u(rng) < p) g.set_link(i, j);
        return g;
    }

    int size() const { return n_; }

    bool linked(int i, int j) const {
        check_index(i);
        check_index(j);
        return adj_[idx(i, j)] != 0;
    }

    void set_link(int i, int j) {
        check_index(i);
        check_index(j);
        adj_[idx(i, j)] = 1;
        adj_[idx(j, i)] = 1;
    }

    /// Neighborhood of i, ascending, always containing i.
    std::vector<int> neighbors(int i) const {
        check_index(i);
        std::vector<int> out;
        for (int j = 0; j < n_; ++j)
            if (adj_[idx(i, j)]) out.push_back(j);
        return out;
    }

    /// Connectivity of the simple graph (self-loops ignored).
    bool is_connected() const {
        std::vector<char> seen(static_cast<std::size_t>(n_), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int visited = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int j = 0; j < n_; ++j) {
                if (j == v || !adj_[idx(v, j)] || seen[static_cast<std::size_t>(j)]) continue;
                seen[static_cast<std::size_t>(j)] = 1;
                ++visited;
                stack.push_back(j);
            }
        }
        return visited == n_;
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    void check_index(int i) const { require(i >= 0 && i < n_, "node index out of range"); }

    int n_;
    std::vector<std::uint8_t> adj_;
};

}  // namespace diffusim
