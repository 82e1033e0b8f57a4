#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bundlescope/corpus.hpp"

namespace bundlescope::bundling {

// Weighted word graph: rho is the observed Pearson correlation of daily
// frequency first differences, z its shuffle-null score, and the edge
// weight max(z, 0) (standard modularity assumes nonnegative weights; rho
// and raw z are kept for diagnostics). Matrices are symmetric with a
// zero diagonal.
struct CorrelationNetwork {
    std::vector<std::string> nodes;
    std::vector<std::vector<double>> rho;
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> weight;
    std::vector<std::string> dropped;  // zero-variance words, with warning

    size_t size() const { return nodes.size(); }
    double strength(size_t i) const;
    double total_weight() const;  // m: sum over unordered pairs

    void check_invariants() const;
};

// Pairwise z-scored correlation network over the given (extracted-word)
// matrix. Differences are taken over days with N(t) > 0; the null
// permutes each word's difference vector independently, n_shuffles
// replicates per pair with seeds derived from (seed, word_i, word_j).
CorrelationNetwork pairwise_network(const corpus::DailyFrequencyMatrix& matrix,
                                    size_t n_shuffles, uint64_t seed, int threads = 1);

struct BundlePartition {
    std::vector<int> assignment;  // node -> bundle id, contiguous from 0
    double q = 0.0;
    std::string method;

    int n_bundles() const;
};

// Weighted Newman modularity:
//   Q = (1/2m) sum_ij (w_ij - s_i s_j / 2m) [c_i == c_j].
// Throws DataError when the network has no weight (m == 0).
double modularity(const CorrelationNetwork& net, const std::vector<int>& assignment);

// Recursive bisection driven by tau-EO rank selection (tau = 1+1/ln n);
// per-node fitness is its modularity contribution divided by strength.
// Best of `restarts` independent runs; bundle count is not fixed in
// advance. n < 2 yields a single-bundle partition.
BundlePartition detect_bundles_eo(const CorrelationNetwork& net, size_t restarts,
                                  uint64_t seed, int threads = 1);

// Kernighan-Lin style fine tuning: repeatedly apply the single-node move
// with the best positive delta-Q until a full pass finds none. Q never
// decreases.
BundlePartition refine_kl(const CorrelationNetwork& net, const BundlePartition& partition);

struct SaSchedule {
    double t_start = 2.5e-2;
    double cooling = 0.995;
    double t_min = 1e-6;
    int sweeps_per_temp = 1;
};

// Simulated annealing over single-node moves plus merge/split proposals,
// geometric cooling; returns the best-seen partition.
BundlePartition detect_bundles_sa(const CorrelationNetwork& net, const SaSchedule& schedule,
                                  uint64_t seed);

// Normalized mutual information 2*I/(H1+H2) between two assignments of
// the same node set; 1.0 when both are the trivial single cluster.
double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b);

struct StabilityOptions {
    size_t n_shuffles = 200;
    size_t restarts = 10;
    int threads = 1;
};

// Bundles are detected independently on the first and second halves of
// the date range; returns the NMI of the two partitions restricted to
// the words retained in both.
double stability_check(const corpus::DailyFrequencyMatrix& matrix, uint64_t seed,
                       const StabilityOptions& opts = {});

struct BundleDiagnostics {
    double within_significant = 0.0;   // fraction of within-bundle pairs with z > 2
    double between_significant = 0.0;  // same among between-bundle pairs
    size_t within_pairs = 0;
    size_t between_pairs = 0;
};

// Requires >= 2 bundles; isolated nodes (zero strength) are excluded.
BundleDiagnostics bundle_diagnostics(const CorrelationNetwork& net,
                                     const BundlePartition& partition);

// ------------------------------------------------------------------- i/o

std::string network_to_csv(const CorrelationNetwork& net);
std::string bundles_to_csv(const CorrelationNetwork& net, const BundlePartition& p);
std::string bundle_summary_to_csv(const CorrelationNetwork& net, const BundlePartition& p);

}  // namespace bundlescope::bundling
