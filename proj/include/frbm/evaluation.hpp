#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"

namespace frbm {

/// One annealing segment [lo, hi] materialized with n points.
struct SchedulePiece {
    double lo;
    double hi;
    int n;
};

/// Concatenates segments into one inverse-temperature ladder: every segment
/// except the last contributes [lo, hi) as lo + j*(hi-lo)/n for j = 0..n-1,
/// and the last contributes (lo, hi] with the endpoint emitted exactly.
std::vector<double> piecewise_schedule(const std::vector<SchedulePiece>& pieces);

/// n evenly spaced points from 0 to 1 inclusive; n >= 2.
std::vector<double> uniform_schedule(int n);

/// Three-segment ladder with 500, 4000, and 10000 points over [0, 0.5),
/// [0.5, 0.9), and (0.9, 1.0]: dense near the target where the integrand
/// moves fastest. 14500 points, starting at 0 and ending at 1 exactly.
std::vector<double> default_schedule();

struct AisConfig {
    std::vector<double> schedule;  // nondecreasing, schedule[0] == 0, back == 1
    int runs = 100;                // >= 2 so the spread is estimable
    Vec base_bias;                 // empty means all zeros
    std::uint64_t seed = 0;
};

void validate(const AisConfig& cfg, int visible_dim);

struct LikelihoodEstimate {
    double log_z_mean = 0.0;
    double log_z_std = 0.0;
    double base_log_z = 0.0;
    std::vector<double> run_log_weights;
    double avg_test_loglik = 0.0;
    std::int64_t n_test = 0;
};

/// Annealed importance sampling from the independent base machine (weights
/// zero, bias base_bias) to the target. Intermediate distributions scale the
/// weights by beta and blend the biases, each one an ordinary machine whose
/// Gibbs sweep is the transition kernel; run r draws from rng stream r, so
/// runs are independent and thread-schedule invariant. log_z_mean is the
/// log-mean of the run weights plus the closed-form base log Z, and log_z_std
/// is the delta-method standard error of that estimate.
LikelihoodEstimate ais_log_partition(const RbmModel& model, const AisConfig& cfg);

/// ais_log_partition plus the average test log-likelihood under the
/// estimated normalizer.
LikelihoodEstimate evaluate_ais(const RbmModel& model, const BinaryDataset& test,
                                const AisConfig& cfg);

/// (1/N) sum_n [unnormalized_log_prob(v_n) - log_z].
double avg_test_loglik(const RbmModel& model, const BinaryDataset& test, double log_z);

/// N x |h| matrix of hidden activation probabilities, one row per vector.
Mat extract_features(const RbmModel& model, const BinaryDataset& data);

struct ClassifyResult {
    double error_rate = 0.0;
    std::vector<int> predictions;
};

/// Multinomial logistic regression by full-batch gradient descent from zero
/// weights with an unregularized intercept; deterministic for fixed inputs.
/// Inputs are row-feature matrices with labels in [0, classes).
ClassifyResult softmax_classify(const Mat& train_x, const std::vector<std::uint16_t>& train_y,
                                const Mat& test_x, const std::vector<std::uint16_t>& test_y,
                                double l2 = 1e-4, int iters = 500);

}  // namespace frbm
