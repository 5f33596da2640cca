#pragma once

// Independent reference implementations used only by tests. They share no code
// with the library paths they check.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

using Decimal = boost::multiprecision::cpp_dec_float_50;

// Min-max ages, exp(-a x), divide by the sum, all in 50-digit decimal.
inline std::vector<double> recency_weights(const std::vector<double>& ages, double decay_rate) {
    Decimal lo = ages.front();
    Decimal hi = ages.front();
    for (double a : ages) {
        lo = std::min<Decimal>(lo, a);
        hi = std::max<Decimal>(hi, a);
    }
    const Decimal rate = decay_rate;
    std::vector<Decimal> raw;
    Decimal sum = 0;
    for (double a : ages) {
        const Decimal x = hi == lo ? Decimal(0) : (Decimal(a) - lo) / (hi - lo);
        raw.push_back(boost::multiprecision::exp(-rate * x));
        sum += raw.back();
    }
    std::vector<double> out;
    for (const auto& r : raw) out.push_back(static_cast<double>(r / sum));
    return out;
}

struct Vec {
    std::uint64_t id;
    std::string user;
    std::int64_t created_ms;
    std::vector<float> values;
};

struct Hit {
    std::uint64_t id;
    long double similarity;
};

// Full scan, long-double cosine, full sort with the documented tie-break.
inline std::vector<Hit> top_k(const std::vector<double>& query, const std::vector<Vec>& all, const std::string& user,
                              std::size_t k) {
    struct Row {
        std::uint64_t id;
        std::int64_t created;
        long double sim;
    };
    std::vector<Row> rows;
    for (const auto& v : all) {
        if (v.user != user) continue;
        long double dot = 0, nq = 0, nv = 0;
        for (std::size_t i = 0; i < query.size(); ++i) {
            dot += static_cast<long double>(query[i]) * v.values[i];
            nq += static_cast<long double>(query[i]) * query[i];
            nv += static_cast<long double>(v.values[i]) * v.values[i];
        }
        const long double sim = (nq == 0 || nv == 0) ? 0.0L : dot / (std::sqrt(nq) * std::sqrt(nv));
        rows.push_back({v.id, v.created_ms, sim});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        if (a.created != b.created) return a.created > b.created;
        return a.id < b.id;
    });
    std::vector<Hit> out;
    for (std::size_t i = 0; i < rows.size() && i < k; ++i) out.push_back({rows[i].id, rows[i].sim});
    return out;
}

}  // namespace oracle
