#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"
#include "frbm/sampling.hpp"

namespace frbm {

enum class AlphaMode { Count, Gradient };

struct FwConfig {
    double lambda = 0.01;        // inner l2 strength
    double eta = 0.05;           // bias step size
    int max_units = 50;          // final atom budget
    double inner_tol = 1e-5;     // inner gradient-norm stop
    int inner_max_iters = 500;
    int samples_per_iter = 500;  // negative-phase draws per outer iteration
    int minibatch = 100;         // bias-update negative minibatch
    int bias_epochs = 5;
    AlphaMode alpha_mode = AlphaMode::Count;
    int alpha_grad_steps = 10;
    double alpha_grad_rate = 0.01;
    int eval_every = 20;         // iterations between gap evaluations
    bool early_stop = true;
    int early_stop_patience = 3;
    double atom_stop_tol = 0.0;  // stop growing once the inner optimum is this close to 0
    std::uint64_t seed = 0;
    int n_chains = 20;
    std::int64_t burn_in = 200;
    std::int64_t thinning = 2;
    bool exact_negative = false;  // enumerate the model instead of sampling
};

void validate(const FwConfig& cfg);

struct InnerEval {
    double value;
    Vec gradient;
};

struct InnerSolution {
    Vec w;
    double value;
    double grad_norm;
    int iterations;
    bool converged;
};

/// Enumerated states with probability weights, for exact negative phases.
struct WeightedStates {
    PackedBitMatrix states;
    Vec weights;
};
WeightedStates enumerate_states(const WeightAtomMix& mix);

/// (lambda/2)|w|^2 + mean_s softplus(w·v_s) - mean_n softplus(w·v_n) and its
/// gradient; the sample term is the model side, the data term the target.
InnerEval inner_objective(const Vec& w, const BinaryDataset& data, const SampleBuffer& samples,
                          double lambda);
InnerEval inner_objective(const Vec& w, const BinaryDataset& data, const WeightedStates& states,
                          double lambda);

/// Minimizes the inner objective from several deterministic seeded starts
/// (-grad(0) plus small noise, then unit-scale random directions that can
/// escape the stationary point at the origin) and keeps the best minimizer.
/// The returned value never exceeds the value at w = 0, so it is always <= 0
/// up to rounding.
InnerSolution solve_inner(const BinaryDataset& data, const SampleBuffer& samples, double lambda,
                          const FwConfig& cfg, std::uint32_t noise_stream = kStreamFwBase);
InnerSolution solve_inner(const BinaryDataset& data, const WeightedStates& states, double lambda,
                          const FwConfig& cfg, std::uint32_t noise_stream = kStreamFwBase);

/// Stochastic bias ascent: bias_epochs passes of eta * (data mean - model
/// minibatch mean), with the sampler tracking every nudge without re-burning.
/// eta = 0 returns the mix bit-identically unchanged.
WeightAtomMix update_bias(const WeightAtomMix& mix, const BinaryDataset& data, const FwConfig& cfg,
                          PersistentSampler& sampler);

/// Same ascent with the model mean enumerated exactly each step.
WeightAtomMix update_bias_exact(const WeightAtomMix& mix, const BinaryDataset& data,
                                const FwConfig& cfg);

/// d/d(alpha) of the average log-likelihood: expected mix softplus under the
/// data minus under the model, the latter enumerated exactly.
double grad_alpha(const WeightAtomMix& mix, const BinaryDataset& data);

/// Sampled variant: the model expectation comes from a drawn buffer.
double grad_alpha_sampled(const WeightAtomMix& mix, const BinaryDataset& data,
                          const SampleBuffer& samples);

struct TrainRecord {
    int t = 0;
    double inner_value = 0.0;
    double inner_grad_norm = 0.0;
    double w_norm = 0.0;
    double train_avg_ull = 0.0;
    double valid_avg_ull = 0.0;
    double gap = 0.0;
    double seconds = 0.0;
    bool inner_converged = true;
    bool evaluated = false;
};

struct TrainReport {
    std::vector<TrainRecord> records;
    int selected_t = 0;
    bool stopped_early = false;
};

struct FwResult {
    WeightAtomMix model;
    TrainReport report;
};

/// Conditional-gradient training: per iteration t, draw the negative phase
/// from the current model, fit one new weight vector by the inner solve, fold
/// it in with atom masses alpha/t (Count mode keeps every mass at exactly 1),
/// then take bias steps. Watches the train-validation gap of the average
/// unnormalized log-likelihood at eval_every cadence and returns the snapshot
/// with the smallest gap once `early_stop_patience` consecutive evaluations
/// fail to improve it. With atom_stop_tol > 0, growth also stops before
/// adding an atom whose inner optimum clears -atom_stop_tol: the linearized
/// objective can no longer be improved by that much, which is the
/// conditional-gradient convergence test. Iteration 1 replaces the random
/// starter atom. A warm start must be standard; its atoms stay untouched and
/// new units are added from t = atoms + 1 up to max_units.
FwResult fw_train(const BinaryDataset& train, const BinaryDataset& valid, const FwConfig& cfg);
FwResult fw_train(const BinaryDataset& train, const BinaryDataset& valid, const FwConfig& cfg,
                  const WeightAtomMix& warm_start);

/// Report rows as CSV. The seconds column is written as 0 unless FRBM_TIMING
/// is set, so identical runs produce identical bytes.
void write_report_csv(const std::string& path, const TrainReport& report);

}  // namespace frbm
