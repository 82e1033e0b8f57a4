#include "bundlescope/bundling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bundlescope/errors.hpp"
#include "bundlescope/stats.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::bundling {

double CorrelationNetwork::strength(size_t i) const {
    double s = 0.0;
    for (size_t j = 0; j < size(); ++j) s += weight[i][j];
    return s;
}

double CorrelationNetwork::total_weight() const {
    double m = 0.0;
    for (size_t i = 0; i < size(); ++i)
        for (size_t j = i + 1; j < size(); ++j) m += weight[i][j];
    return m;
}

void CorrelationNetwork::check_invariants() const {
    const size_t n = size();
    if (rho.size() != n || z.size() != n || weight.size() != n)
        throw InternalError("network: matrix size mismatch");
    for (size_t i = 0; i < n; ++i) {
        if (rho[i].size() != n || z[i].size() != n || weight[i].size() != n)
            throw InternalError("network: ragged matrix");
        if (rho[i][i] != 0.0 || weight[i][i] != 0.0)
            throw InternalError("network: nonzero diagonal");
        for (size_t j = 0; j < n; ++j) {
            if (rho[i][j] != rho[j][i] || weight[i][j] != weight[j][i])
                throw InternalError("network: asymmetric matrix");
            if (rho[i][j] < -1.0 - 1e-12 || rho[i][j] > 1.0 + 1e-12)
                throw InternalError("network: rho out of [-1,1]");
            if (weight[i][j] < 0.0) throw InternalError("network: negative weight");
        }
    }
}

CorrelationNetwork pairwise_network(const corpus::DailyFrequencyMatrix& matrix,
                                    size_t n_shuffles, uint64_t seed, int threads) {
    if (matrix.n_words() < 2)
        throw DataError("pairwise_network: need at least 2 extracted words");
    const auto active = matrix.active_days();
    if (active.size() < 3) throw DataError("pairwise_network: need at least 3 days");
    if (n_shuffles < 100) throw DataError("pairwise_network: n_shuffles must be >= 100");

    // First differences of raw daily counts over active days.
    const size_t len = active.size() - 1;
    std::vector<std::vector<double>> diffs;
    std::vector<std::string> kept_words;
    std::vector<std::string> dropped;
    for (size_t w = 0; w < matrix.n_words(); ++w) {
        std::vector<double> d(len);
        for (size_t i = 0; i + 1 < active.size(); ++i)
            d[i] = static_cast<double>(matrix.counts[active[i + 1]][w]) -
                   static_cast<double>(matrix.counts[active[i]][w]);
        if (stats::pop_std(d) == 0.0) {
            dropped.push_back(matrix.vocabulary[w]);
            continue;
        }
        diffs.push_back(std::move(d));
        kept_words.push_back(matrix.vocabulary[w]);
    }
    const size_t n = kept_words.size();
    if (n < 2)
        throw DataError("pairwise_network: fewer than 2 words with varying differences");

    // Permutations leave each vector's mean/std unchanged; only the cross
    // moment moves, so standardize once.
    std::vector<std::vector<double>> std_diffs(n);
    for (size_t i = 0; i < n; ++i) std_diffs[i] = stats::zscore(diffs[i]);

    CorrelationNetwork net;
    net.nodes = kept_words;
    net.dropped = std::move(dropped);
    net.rho.assign(n, std::vector<double>(n, 0.0));
    net.z.assign(n, std::vector<double>(n, 0.0));
    net.weight.assign(n, std::vector<double>(n, 0.0));

    std::vector<std::pair<size_t, size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    const double dlen = static_cast<double>(len);
    parallel_for(pairs.size(), threads, [&](size_t p) {
        const auto [i, j] = pairs[p];
        const auto& x = std_diffs[i];
        const auto& y = std_diffs[j];
        double dot = 0.0;
        for (size_t t = 0; t < len; ++t) dot += x[t] * y[t];
        const double rho = std::clamp(dot / dlen, -1.0, 1.0);

        const uint64_t pair_seed = hash_seed(hash_seed(seed, net.nodes[i]), net.nodes[j]);
        const PermutationPlan plan{pair_seed, n_shuffles};
        std::vector<double> xs(len), ys(len);
        double sum = 0.0, sum_sq = 0.0;
        for (size_t s = 0; s < n_shuffles; ++s) {
            std::copy(x.begin(), x.end(), xs.begin());
            std::copy(y.begin(), y.end(), ys.begin());
            Rng rng(plan.replicate_seed(s));
            rng.shuffle_doubles(xs);
            rng.shuffle_doubles(ys);
            double d = 0.0;
            for (size_t t = 0; t < len; ++t) d += xs[t] * ys[t];
            const double r = d / dlen;
            sum += r;
            sum_sq += r * r;
        }
        const double mu = sum / static_cast<double>(n_shuffles);
        const double var = std::max(sum_sq / static_cast<double>(n_shuffles) - mu * mu, 0.0);
        const double sigma = std::sqrt(var);
        const double z = sigma > 0.0 ? (rho - mu) / sigma : 0.0;

        net.rho[i][j] = net.rho[j][i] = rho;
        net.z[i][j] = net.z[j][i] = z;
        const double w = std::max(z, 0.0);
        net.weight[i][j] = net.weight[j][i] = w;
    });
    return net;
}

int BundlePartition::n_bundles() const {
    int mx = -1;
    for (int c : assignment) mx = std::max(mx, c);
    return mx + 1;
}

double modularity(const CorrelationNetwork& net, const std::vector<int>& assignment) {
    const size_t n = net.size();
    if (assignment.size() != n) throw DataError("modularity: assignment size mismatch");
    const double m = net.total_weight();
    if (m <= 0.0) throw DataError("modularity: network has no weight");
    const double two_m = 2.0 * m;

    int n_comm = 0;
    for (int c : assignment) {
        if (c < 0) throw DataError("modularity: unassigned node");
        n_comm = std::max(n_comm, c + 1);
    }
    std::vector<double> w_in(n_comm, 0.0), s_tot(n_comm, 0.0);
    for (size_t i = 0; i < n; ++i) {
        s_tot[assignment[i]] += net.strength(i);
        for (size_t j = i + 1; j < n; ++j)
            if (assignment[i] == assignment[j]) w_in[assignment[i]] += net.weight[i][j];
    }
    double q = 0.0;
    for (int c = 0; c < n_comm; ++c)
        q += w_in[c] / m - (s_tot[c] / two_m) * (s_tot[c] / two_m);
    return q;
}

namespace {

// Mutable partition with incremental move evaluation; shared by the EO
// bisection, the KL refinement and the annealer.
class PartitionState {
public:
    PartitionState(const CorrelationNetwork& net, std::vector<int> assignment)
        : net_(&net), comm_(std::move(assignment)) {
        const size_t n = net_->size();
        strength_.resize(n);
        for (size_t i = 0; i < n; ++i) strength_[i] = net_->strength(i);
        m_ = net_->total_weight();
        int n_comm = 0;
        for (int c : comm_) n_comm = std::max(n_comm, c + 1);
        s_tot_.assign(n_comm, 0.0);
        for (size_t i = 0; i < n; ++i) s_tot_[comm_[i]] += strength_[i];
    }

    const std::vector<int>& assignment() const { return comm_; }
    int community_of(size_t i) const { return comm_[i]; }
    size_t n_nodes() const { return net_->size(); }
    int n_communities() const { return static_cast<int>(s_tot_.size()); }
    double total_weight() const { return m_; }
    double node_strength(size_t i) const { return strength_[i]; }
    double community_strength(int c) const { return s_tot_[c]; }

    double weight_to_community(size_t i, int c) const {
        double w = 0.0;
        for (size_t j = 0; j < net_->size(); ++j)
            if (j != i && comm_[j] == c) w += net_->weight[i][j];
        return w;
    }

    // delta Q of moving node i to community d (possibly a fresh one equal
    // to n_communities()).
    double move_gain(size_t i, int d) const {
        const int c = comm_[i];
        if (d == c) return 0.0;
        const double w_d = d < n_communities() ? weight_to_community(i, d) : 0.0;
        const double w_c = weight_to_community(i, c);
        const double s_d = d < n_communities() ? s_tot_[d] : 0.0;
        const double s_i = strength_[i];
        return (w_d - w_c) / m_ + s_i * (s_tot_[c] - s_d - s_i) / (2.0 * m_ * m_);
    }

    void move(size_t i, int d) {
        const int c = comm_[i];
        if (d == n_communities()) s_tot_.push_back(0.0);
        if (d >= n_communities()) throw InternalError("move: bad community id");
        s_tot_[c] -= strength_[i];
        s_tot_[d] += strength_[i];
        comm_[i] = d;
    }

    double q() const { return modularity(*net_, compact(comm_)); }

    static std::vector<int> compact(const std::vector<int>& raw) {
        std::vector<int> out(raw.size());
        std::map<int, int> remap;
        for (size_t i = 0; i < raw.size(); ++i) {
            auto [it, fresh] = remap.emplace(raw[i], static_cast<int>(remap.size()));
            out[i] = it->second;
        }
        return out;
    }

private:
    const CorrelationNetwork* net_;
    std::vector<int> comm_;
    std::vector<double> strength_;
    std::vector<double> s_tot_;
    double m_ = 0.0;
};

std::vector<std::vector<size_t>> connected_components(const CorrelationNetwork& net) {
    const size_t n = net.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<size_t>> out;
    for (size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<size_t> stack{start}, members;
        comp[start] = static_cast<int>(out.size());
        while (!stack.empty()) {
            const size_t i = stack.back();
            stack.pop_back();
            members.push_back(i);
            for (size_t j = 0; j < n; ++j) {
                if (net.weight[i][j] > 0.0 && comp[j] < 0) {
                    comp[j] = comp[i];
                    stack.push_back(j);
                }
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

// One tau-EO bisection attempt of the node set `nodes` (a community of
// the current partition). Everything is measured against global Q:
// strengths and 2m are whole-network quantities. Returns the gain of the
// best bisection found and, via `side`, its labeling.
double eo_bisect(const CorrelationNetwork& net, const std::vector<size_t>& nodes,
                 const std::vector<double>& strength, double m, Rng& rng,
                 std::vector<int>& side) {
    const size_t nc = nodes.size();
    const double two_m = 2.0 * m;
    side.assign(nc, 0);
    for (size_t a = 0; a < nc; ++a) side[a] = static_cast<int>(rng.below(2));

    // Per-node weight towards each side, restricted to the bisected set.
    std::vector<double> w_side[2];
    w_side[0].assign(nc, 0.0);
    w_side[1].assign(nc, 0.0);
    double w_in[2] = {0.0, 0.0};
    double s_side[2] = {0.0, 0.0};
    double w_total = 0.0;  // weight inside the whole set
    double s_set = 0.0;
    for (size_t a = 0; a < nc; ++a) {
        s_side[side[a]] += strength[nodes[a]];
        s_set += strength[nodes[a]];
        for (size_t b = a + 1; b < nc; ++b) {
            const double w = net.weight[nodes[a]][nodes[b]];
            if (w == 0.0) continue;
            w_total += w;
            w_side[side[b]][a] += w;
            w_side[side[a]][b] += w;
            if (side[a] == side[b]) w_in[side[a]] += w;
        }
    }

    // Community contribution q(X) = 2 W_in(X) - S_X^2 / 2m; the unsplit
    // contribution is the baseline.
    auto split_contrib = [&]() {
        return 2.0 * (w_in[0] + w_in[1]) -
               (s_side[0] * s_side[0] + s_side[1] * s_side[1]) / two_m;
    };
    const double base_contrib = 2.0 * w_total - s_set * s_set / two_m;

    double best_gain = split_contrib() - base_contrib;
    std::vector<int> best_side = side;

    const double tau = 1.0 + 1.0 / std::log(static_cast<double>(std::max<size_t>(nc, 3)));
    std::vector<double> rank_cdf(nc);
    {
        double acc = 0.0;
        for (size_t r = 0; r < nc; ++r) {
            acc += std::pow(static_cast<double>(r + 1), -tau);
            rank_cdf[r] = acc;
        }
        for (auto& v : rank_cdf) v /= acc;
    }

    std::vector<std::pair<double, size_t>> fitness(nc);
    const size_t patience = nc + 8;
    const size_t max_moves = 6 * nc + 40;
    size_t since_best = 0;
    for (size_t mv = 0; mv < max_moves && since_best < patience; ++mv) {
        // lambda_a = w_a(own side)/s_a - S_side/2m, worst first.
        for (size_t a = 0; a < nc; ++a) {
            const double s_a = strength[nodes[a]];
            const double lam = s_a > 0.0
                                   ? w_side[side[a]][a] / s_a - s_side[side[a]] / two_m
                                   : 0.0;
            fitness[a] = {lam, a};
        }
        std::sort(fitness.begin(), fitness.end());
        const double u = rng.next_double();
        const size_t rank = static_cast<size_t>(
            std::lower_bound(rank_cdf.begin(), rank_cdf.end(), u) - rank_cdf.begin());
        const size_t a = fitness[std::min(rank, nc - 1)].second;

        // Flip node a.
        const int from = side[a];
        const int to = 1 - from;
        w_in[from] -= w_side[from][a];
        w_in[to] += w_side[to][a];
        s_side[from] -= strength[nodes[a]];
        s_side[to] += strength[nodes[a]];
        side[a] = to;
        for (size_t b = 0; b < nc; ++b) {
            if (b == a) continue;
            const double w = net.weight[nodes[a]][nodes[b]];
            if (w == 0.0) continue;
            w_side[from][b] -= w;
            w_side[to][b] += w;
        }

        const double gain = split_contrib() - base_contrib;
        if (gain > best_gain + 1e-15) {
            best_gain = gain;
            best_side = side;
            since_best = 0;
        } else {
            ++since_best;
        }
    }
    side = best_side;
    return best_gain / two_m;  // contributions are 2m-scaled
}

std::vector<int> eo_run(const CorrelationNetwork& net, uint64_t run_seed) {
    const size_t n = net.size();
    std::vector<double> strength(n);
    for (size_t i = 0; i < n; ++i) strength[i] = net.strength(i);
    const double m = net.total_weight();

    std::vector<int> assignment(n, -1);
    int next_id = 0;
    std::vector<std::vector<size_t>> queue;
    for (auto& comp : connected_components(net)) {
        if (comp.size() == 1) {
            assignment[comp[0]] = next_id++;  // isolated or lone component
        } else {
            for (size_t i : comp) assignment[i] = next_id;
            ++next_id;
            queue.push_back(std::move(comp));
        }
    }

    Rng rng(run_seed);
    std::vector<int> side;
    while (!queue.empty()) {
        std::vector<size_t> nodes = std::move(queue.back());
        queue.pop_back();
        if (nodes.size() < 2) continue;
        const double gain = eo_bisect(net, nodes, strength, m, rng, side);
        if (gain <= 1e-12) continue;  // no split improves Q: bundle is final
        std::vector<size_t> left, right;
        for (size_t a = 0; a < nodes.size(); ++a)
            (side[a] == 0 ? left : right).push_back(nodes[a]);
        if (left.empty() || right.empty()) continue;
        const int right_id = next_id++;
        for (size_t i : right) assignment[i] = right_id;
        queue.push_back(std::move(left));
        queue.push_back(std::move(right));
    }
    return PartitionState::compact(assignment);
}

// Canonical bundle ids: decreasing size, ties by first member index.
std::vector<int> canonicalize(const std::vector<int>& assignment) {
    const std::vector<int> compacted = PartitionState::compact(assignment);
    int n_comm = 0;
    for (int c : compacted) n_comm = std::max(n_comm, c + 1);
    std::vector<size_t> size(n_comm, 0), first(n_comm, compacted.size());
    for (size_t i = 0; i < compacted.size(); ++i) {
        ++size[compacted[i]];
        first[compacted[i]] = std::min(first[compacted[i]], i);
    }
    std::vector<int> order(n_comm);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (size[a] != size[b]) return size[a] > size[b];
        return first[a] < first[b];
    });
    std::vector<int> remap(n_comm);
    for (int rank = 0; rank < n_comm; ++rank) remap[order[rank]] = rank;
    std::vector<int> out(compacted.size());
    for (size_t i = 0; i < compacted.size(); ++i) out[i] = remap[compacted[i]];
    return out;
}

}  // namespace

BundlePartition detect_bundles_eo(const CorrelationNetwork& net, size_t restarts,
                                  uint64_t seed, int threads) {
    BundlePartition out;
    out.method = "eo";
    if (net.size() < 2) {
        out.assignment.assign(net.size(), 0);
        out.q = 0.0;
        return out;
    }
    if (net.total_weight() <= 0.0) {
        // All weights clipped to zero: every node is its own singleton.
        out.assignment.resize(net.size());
        std::iota(out.assignment.begin(), out.assignment.end(), 0);
        out.q = 0.0;
        return out;
    }
    if (restarts == 0) restarts = 1;

    std::vector<std::vector<int>> results(restarts);
    std::vector<double> qs(restarts);
    parallel_for(restarts, threads, [&](size_t r) {
        results[r] = eo_run(net, derive_seed(seed, r));
        qs[r] = modularity(net, results[r]);
    });
    size_t best = 0;
    for (size_t r = 1; r < restarts; ++r)
        if (qs[r] > qs[best]) best = r;
    out.assignment = canonicalize(results[best]);
    out.q = modularity(net, out.assignment);
    return out;
}

BundlePartition refine_kl(const CorrelationNetwork& net, const BundlePartition& partition) {
    BundlePartition out;
    out.method = partition.method == "eo" ? "eo+kl" : partition.method + "+kl";
    if (net.size() < 2 || net.total_weight() <= 0.0) {
        out.assignment = partition.assignment;
        out.q = partition.q;
        return out;
    }
    PartitionState state(net, PartitionState::compact(partition.assignment));
    const size_t n = state.n_nodes();
    while (true) {
        double best_gain = 1e-12;
        size_t best_node = n;
        int best_comm = -1;
        for (size_t i = 0; i < n; ++i) {
            const int n_comm = state.n_communities();
            for (int d = 0; d <= n_comm; ++d) {  // n_comm = fresh singleton
                if (d == state.community_of(i)) continue;
                const double g = state.move_gain(i, d);
                if (g > best_gain) {
                    best_gain = g;
                    best_node = i;
                    best_comm = d;
                }
            }
        }
        if (best_node == n) break;
        state.move(best_node, best_comm);
    }
    out.assignment = canonicalize(state.assignment());
    out.q = modularity(net, out.assignment);
    return out;
}

BundlePartition detect_bundles_sa(const CorrelationNetwork& net, const SaSchedule& schedule,
                                  uint64_t seed) {
    BundlePartition out;
    out.method = "sa";
    const size_t n = net.size();
    if (n < 2) {
        out.assignment.assign(n, 0);
        out.q = 0.0;
        return out;
    }
    if (net.total_weight() <= 0.0) {
        out.assignment.resize(n);
        std::iota(out.assignment.begin(), out.assignment.end(), 0);
        out.q = 0.0;
        return out;
    }

    Rng rng(seed);
    // Start from singletons.
    std::vector<int> init(n);
    std::iota(init.begin(), init.end(), 0);
    PartitionState state(net, init);
    double q = state.q();
    std::vector<int> best_assignment = state.assignment();
    double best_q = q;

    auto metropolis = [&](double gain, double t) {
        if (gain >= 0.0) return true;
        return rng.next_double() < std::exp(gain / t);
    };

    for (double t = schedule.t_start; t > schedule.t_min; t *= schedule.cooling) {
        // Squeeze out empty community slots accumulated by node moves.
        state = PartitionState(net, PartitionState::compact(state.assignment()));
        q = state.q();
        for (int sweep = 0; sweep < schedule.sweeps_per_temp; ++sweep) {
            // Single-node moves.
            for (size_t k = 0; k < n; ++k) {
                const size_t i = static_cast<size_t>(rng.below(n));
                const int n_comm = state.n_communities();
                int d = static_cast<int>(rng.below(static_cast<uint64_t>(n_comm) + 1));
                if (d == state.community_of(i)) continue;
                const double gain = state.move_gain(i, d);
                if (metropolis(gain, t)) {
                    state.move(i, d);
                    q += gain;
                }
            }
            // Merge proposal.
            {
                const std::vector<int> compacted = PartitionState::compact(state.assignment());
                int n_comm = 0;
                for (int c : compacted) n_comm = std::max(n_comm, c + 1);
                if (n_comm >= 2) {
                    const int c1 = static_cast<int>(rng.below(n_comm));
                    int c2 = static_cast<int>(rng.below(n_comm));
                    if (c1 != c2) {
                        std::vector<int> merged = compacted;
                        for (auto& c : merged)
                            if (c == c2) c = c1;
                        const double q_new = modularity(net, PartitionState::compact(merged));
                        if (metropolis(q_new - q, t)) {
                            state = PartitionState(net, PartitionState::compact(merged));
                            q = q_new;
                        }
                    }
                }
            }
            // Split proposal: random bisection of one community, locally
            // sharpened by a few greedy passes before the Metropolis test.
            {
                const std::vector<int> compacted = PartitionState::compact(state.assignment());
                int n_comm = 0;
                for (int c : compacted) n_comm = std::max(n_comm, c + 1);
                const int c = static_cast<int>(rng.below(n_comm));
                std::vector<size_t> members;
                for (size_t i = 0; i < n; ++i)
                    if (compacted[i] == c) members.push_back(i);
                if (members.size() >= 2) {
                    std::vector<int> split = compacted;
                    for (size_t i : members)
                        if (rng.below(2) == 1) split[i] = n_comm;
                    PartitionState trial(net, PartitionState::compact(split));
                    for (int pass = 0; pass < 2; ++pass) {
                        for (size_t i : members) {
                            const int cur = trial.community_of(i);
                            int other = -1;
                            for (size_t j : members)
                                if (trial.community_of(j) != cur) {
                                    other = trial.community_of(j);
                                    break;
                                }
                            if (other < 0) break;
                            if (trial.move_gain(i, other) > 0.0) trial.move(i, other);
                        }
                    }
                    const double q_new = trial.q();
                    if (metropolis(q_new - q, t)) {
                        state = PartitionState(net, PartitionState::compact(trial.assignment()));
                        q = q_new;
                    }
                }
            }
            if (q > best_q + 1e-15) {
                best_q = q;
                best_assignment = state.assignment();
            }
        }
    }
    out.assignment = canonicalize(best_assignment);
    out.q = modularity(net, out.assignment);
    return out;
}

double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw DataError("nmi: assignments must be nonempty and equal-sized");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pa, pb;
    for (size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (auto& [c, cnt] : pa) h_a -= cnt / n * std::log(cnt / n);
    for (auto& [c, cnt] : pb) h_b -= cnt / n * std::log(cnt / n);
    for (auto& [cc, cnt] : joint) {
        const double pxy = cnt / n;
        mi += pxy * std::log(pxy / (pa[cc.first] / n * pb[cc.second] / n));
    }
    if (h_a + h_b == 0.0) return 1.0;  // both trivial partitions
    return std::clamp(2.0 * mi / (h_a + h_b), 0.0, 1.0);
}

double stability_check(const corpus::DailyFrequencyMatrix& matrix, uint64_t seed,
                       const StabilityOptions& opts) {
    if (matrix.n_dates() < 60) throw DataError("stability_check: need at least 60 days");
    const size_t half = matrix.n_dates() / 2;
    const corpus::DailyFrequencyMatrix first = matrix.date_slice(0, half);
    const corpus::DailyFrequencyMatrix second = matrix.date_slice(half, matrix.n_dates());
    if (first.active_days().size() < 3 || second.active_days().size() < 3)
        throw DataError("stability_check: halves have fewer than 3 active days");

    auto run = [&](const corpus::DailyFrequencyMatrix& m, uint64_t s) {
        CorrelationNetwork net = pairwise_network(m, opts.n_shuffles, s, opts.threads);
        BundlePartition p = detect_bundles_eo(net, opts.restarts, s, opts.threads);
        p = refine_kl(net, p);
        return std::make_pair(std::move(net), std::move(p));
    };
    auto [net1, p1] = run(first, derive_seed(seed, 1));
    auto [net2, p2] = run(second, derive_seed(seed, 2));

    // Restrict to words retained in both halves.
    std::vector<int> a, b;
    std::map<std::string, int> idx2;
    for (size_t i = 0; i < net2.nodes.size(); ++i) idx2[net2.nodes[i]] = static_cast<int>(i);
    for (size_t i = 0; i < net1.nodes.size(); ++i) {
        auto it = idx2.find(net1.nodes[i]);
        if (it == idx2.end()) continue;
        a.push_back(p1.assignment[i]);
        b.push_back(p2.assignment[static_cast<size_t>(it->second)]);
    }
    if (a.empty()) throw DataError("stability_check: halves share no retained words");
    return normalized_mutual_information(a, b);
}

BundleDiagnostics bundle_diagnostics(const CorrelationNetwork& net,
                                     const BundlePartition& partition) {
    if (partition.n_bundles() < 2)
        throw DataError("bundle_diagnostics: need at least 2 bundles");
    BundleDiagnostics d;
    size_t within_hit = 0, between_hit = 0;
    for (size_t i = 0; i < net.size(); ++i) {
        if (net.strength(i) == 0.0) continue;  // isolated: excluded
        for (size_t j = i + 1; j < net.size(); ++j) {
            if (net.strength(j) == 0.0) continue;
            const bool same = partition.assignment[i] == partition.assignment[j];
            const bool significant = net.z[i][j] > 2.0;
            if (same) {
                ++d.within_pairs;
                within_hit += significant;
            } else {
                ++d.between_pairs;
                between_hit += significant;
            }
        }
    }
    if (d.within_pairs == 0 || d.between_pairs == 0)
        throw DataError("bundle_diagnostics: degenerate pair sets");
    d.within_significant = static_cast<double>(within_hit) / static_cast<double>(d.within_pairs);
    d.between_significant =
        static_cast<double>(between_hit) / static_cast<double>(d.between_pairs);
    return d;
}

std::string network_to_csv(const CorrelationNetwork& net) {
    std::string out = "word_i,word_j,rho,z,weight\n";
    for (size_t i = 0; i < net.size(); ++i) {
        for (size_t j = i + 1; j < net.size(); ++j) {
            out += net.nodes[i];
            out += ',';
            out += net.nodes[j];
            out += ',';
            out += format_double(net.rho[i][j]);
            out += ',';
            out += format_double(net.z[i][j]);
            out += ',';
            out += format_double(net.weight[i][j]);
            out += '\n';
        }
    }
    return out;
}

std::string bundles_to_csv(const CorrelationNetwork& net, const BundlePartition& p) {
    std::string out = "word,bundle_id\n";
    for (size_t i = 0; i < net.size(); ++i) {
        out += net.nodes[i];
        out += ',';
        out += std::to_string(p.assignment[i] + 1);  // 1-based ids in files
        out += '\n';
    }
    return out;
}

std::string bundle_summary_to_csv(const CorrelationNetwork& net, const BundlePartition& p) {
    const int nb = p.n_bundles();
    std::vector<size_t> size(nb, 0);
    for (int c : p.assignment) ++size[c];

    // Per-bundle contribution to Q.
    const double m = net.total_weight();
    const double two_m = 2.0 * m;
    std::vector<double> w_in(nb, 0.0), s_tot(nb, 0.0);
    for (size_t i = 0; i < net.size(); ++i) {
        s_tot[p.assignment[i]] += net.strength(i);
        for (size_t j = i + 1; j < net.size(); ++j)
            if (p.assignment[i] == p.assignment[j]) w_in[p.assignment[i]] += net.weight[i][j];
    }
    std::string out = "bundle_id,size,share,q_contribution\n";
    for (int c = 0; c < nb; ++c) {
        const double share = static_cast<double>(size[c]) / static_cast<double>(net.size());
        const double qc =
            m > 0.0 ? w_in[c] / m - (s_tot[c] / two_m) * (s_tot[c] / two_m) : 0.0;
        out += std::to_string(c + 1);
        out += ',';
        out += std::to_string(size[c]);
        out += ',';
        out += format_double(share);
        out += ',';
        out += format_double(qc);
        out += '\n';
    }
    return out;
}

}  // namespace bundlescope::bundling
