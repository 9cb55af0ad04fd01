#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"

namespace frbm {

/// Enumeration is refused beyond 2^25 states.
inline constexpr int kEnumGuardBits = 25;
/// Materialized distributions are refused beyond 2^20 states.
inline constexpr int kDistributionGuardBits = 20;

/// Visits all 2^dim bit vectors in binary-reflected Gray order starting from
/// all zeros, keeping act[k] == cols[k]·v and bias_dot == bias·v current via
/// single-coordinate updates. visit(v, act, bias_dot) runs once per state.
/// Column pointers must stay valid for the duration of the walk.
template <class Visit>
void for_each_state_gray(int dim, const std::vector<const Vec*>& cols, const Vec* bias,
                         Visit&& visit) {
    Bits v(static_cast<std::size_t>(dim), 0);
    std::vector<double> act(cols.size(), 0.0);
    double bias_dot = 0.0;
    visit(static_cast<const Bits&>(v), static_cast<const std::vector<double>&>(act), bias_dot);
    const std::uint64_t total = std::uint64_t{1} << dim;
    for (std::uint64_t s = 1; s < total; ++s) {
        int j = std::countr_zero(s);
        double sign = v[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
        v[static_cast<std::size_t>(j)] ^= 1;
        for (std::size_t k = 0; k < cols.size(); ++k) act[k] += sign * (*cols[k])[j];
        if (bias) bias_dot += sign * (*bias)[j];
        visit(static_cast<const Bits&>(v), static_cast<const std::vector<double>&>(act), bias_dot);
    }
}

/// log Z by summing the visible marginal over all 2^|v| states.
double exact_log_partition_visible(const WeightAtomMix& mix);

/// log Z by summing over hidden states; requires a standard mix.
double exact_log_partition_hidden(const WeightAtomMix& mix);

/// Chooses whichever admissible side enumerates fewer states.
double exact_log_partition(const WeightAtomMix& mix);
double exact_log_partition(const RbmModel& model);

/// Normalized visible distribution indexed by the state integer whose bit j
/// is v_j. Length 2^|v|; entries sum to 1 within rounding.
Vec exact_visible_distribution(const WeightAtomMix& mix);
Vec exact_visible_distribution(const RbmModel& model);

struct LoglikGradient {
    Mat d_weights;
    Vec d_bias;
};

/// Gradient of the average log-likelihood of `data` for a dense machine:
/// data term minus exactly-enumerated model term.
LoglikGradient exact_loglik_gradient(const RbmModel& model, const BinaryDataset& data);

/// E[v] under the exact model distribution.
Vec exact_visible_mean(const WeightAtomMix& mix);

/// (1/N) sum_n log p(v_n): mean unnormalized log-probability minus log Z.
double exact_avg_loglik(const WeightAtomMix& mix, const BinaryDataset& data);
double exact_avg_loglik(const RbmModel& model, const BinaryDataset& data);

}  // namespace frbm
