#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace riskpanel {

// splitmix64: stateless mixer used to derive independent child seeds
// (per-tree, per-window) from one master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// FNV-1a over bytes; stable across platforms, used for manifests and fingerprints.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t fnv1a_file(const std::string& path);

// Quantile with linear interpolation between order statistics (type-7).
// q in [0,1]; data need not be sorted.
double quantile(std::vector<double> data, double q);

double mean(std::span<const double> xs);
// Sample standard deviation (n-1 denominator).
double stdev(std::span<const double> xs);

// Average-rank assignment for tied values, 1-based ranks.
std::vector<double> average_ranks(std::span<const double> xs);

// Spearman rank correlation with average-rank tie handling.
double spearman(std::span<const double> a, std::span<const double> b);

// Runs fn(i) for i in [0, n) across up to `jobs` threads. fn must only write
// to disjoint slots; results are therefore schedule-independent.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace riskpanel
