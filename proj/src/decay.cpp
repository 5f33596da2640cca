#include "kgmem/decay.hpp"

#include "kgmem/error.hpp"

#include <algorithm>
#include <cmath>

namespace kgmem::decay {

std::vector<double> normalize_ages(std::span<const double> ages) {
    if (ages.empty()) throw ValidationError("normalize_ages: empty batch");
    for (double x : ages) {
        if (!std::isfinite(x)) throw ValidationError("normalize_ages: non-finite age");
        if (x < 0.0) throw ValidationError("normalize_ages: negative age");
    }
    const auto [lo, hi] = std::minmax_element(ages.begin(), ages.end());
    const double min = *lo;
    const double range = *hi - min;
    std::vector<double> out(ages.size(), 0.0);
    if (range == 0.0) return out;
    for (std::size_t i = 0; i < ages.size(); ++i) out[i] = (ages[i] - min) / range;
    return out;
}

std::vector<double> raw_weights(std::span<const double> normalized_ages, double decay_rate) {
    if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) {
        throw ValidationError("raw_weights: decay rate must be a positive finite number");
    }
    std::vector<double> out;
    out.reserve(normalized_ages.size());
    for (double x : normalized_ages) {
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("raw_weights: normalized age outside [0, 1]");
        out.push_back(std::exp(-decay_rate * x));
    }
    return out;
}

std::vector<double> normalize_weights(std::span<const double> raw) {
    if (raw.empty()) throw ValidationError("normalize_weights: empty batch");
    double sum = 0.0;
    for (double w : raw) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("normalize_weights: weights must be positive");
        sum += w;
    }
    std::vector<double> out;
    out.reserve(raw.size());
    for (double w : raw) out.push_back(w / sum);
    return out;
}

Weighting weigh_ages(std::span<const double> ages_minutes, double decay_rate) {
    Weighting w;
    w.normalized_ages = normalize_ages(ages_minutes);
    w.raw_weights = raw_weights(w.normalized_ages, decay_rate);
    w.weights = normalize_weights(w.raw_weights);
    return w;
}

Weighting uniform(std::span<const double> ages_minutes) {
    Weighting w;
    w.normalized_ages = normalize_ages(ages_minutes);
    w.raw_weights.assign(ages_minutes.size(), 1.0);
    w.weights = normalize_weights(w.raw_weights);
    return w;
}

std::vector<WeightedTriplet> weigh(std::span<const Candidate> batch, Timestamp now, double decay_rate) {
    if (batch.empty()) throw ValidationError("weigh: empty batch");
    if (!(decay_rate >= 0.0)) throw ValidationError("weigh: decay rate must be >= 0");
    std::vector<double> ages;
    ages.reserve(batch.size());
    for (const auto& c : batch) {
        if (c.triplet.created_at > now) throw ValidationError("weigh: triplet created after the reference time");
        ages.push_back(minutes_between(c.triplet.created_at, now));
    }
    const Weighting w = decay_rate == 0.0 ? uniform(ages) : weigh_ages(ages, decay_rate);
    std::vector<WeightedTriplet> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.push_back(WeightedTriplet{batch[i].triplet, batch[i].similarity, w.normalized_ages[i], w.raw_weights[i],
                                      w.weights[i]});
    }
    return out;
}

}  // namespace kgmem::decay
