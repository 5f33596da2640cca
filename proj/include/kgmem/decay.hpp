#pragma once

#include "kgmem/time.hpp"
#include "kgmem/types.hpp"

#include <span>
#include <vector>

namespace kgmem::decay {

// Min-max scales ages into [0, 1]. When every age is equal (including a single
// age) all normalized ages are 0.
std::vector<double> normalize_ages(std::span<const double> ages);

// w = exp(-a * x) for each normalized age x. Requires a > 0.
std::vector<double> raw_weights(std::span<const double> normalized_ages, double decay_rate);

// Divides by the sum so the result sums to 1.
std::vector<double> normalize_weights(std::span<const double> raw);

struct Weighting {
    std::vector<double> normalized_ages;
    std::vector<double> raw_weights;
    std::vector<double> weights;
};

// Full pipeline over ages in minutes.
Weighting weigh_ages(std::span<const double> ages_minutes, double decay_rate);

// Recency ablation: every item gets 1/N regardless of age.
Weighting uniform(std::span<const double> ages_minutes);

struct Candidate {
    StoredTriplet triplet;
    double similarity = 0.0;
};

// Ages every candidate against `now` (in exact minutes) and attaches weights,
// keeping the input order. decay_rate == 0 selects uniform weights.
std::vector<WeightedTriplet> weigh(std::span<const Candidate> batch, Timestamp now, double decay_rate);

}  // namespace kgmem::decay
