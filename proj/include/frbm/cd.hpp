#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"
#include "frbm/sampling.hpp"

namespace frbm {

enum class RestartSelect { Gap, Exact };

struct CdConfig {
    int k = 1;                   // Gibbs steps per gradient
    double learning_rate = 0.05;
    int minibatch = 100;
    int epochs = 10;
    bool persistent = false;     // keep chains running across batches
    int hidden_units = 16;
    double init_scale = 0.01;    // random weight scale
    int restarts = 1;
    int eval_every = 1;          // epochs between gap evaluations
    int early_stop_patience = 0; // 0 disables early stopping
    RestartSelect restart_select = RestartSelect::Gap;
    std::uint64_t seed = 0;
};

void validate(const CdConfig& cfg);

struct CdGradient {
    Mat d_weights;
    Vec d_bias;
};

/// Contrastive-divergence gradient of the average log-likelihood: the data
/// term uses batch rows with mean-field hidden probabilities, the model term
/// averages chain endpoints after k more Gibbs sweeps per chain. Chains carry
/// sampled bits; probabilities appear only inside the gradient. The data term
/// is an exact average, reproducible bit-for-bit for a given batch order.
CdGradient cd_gradient(const RbmModel& model, const BinaryDataset& data,
                       const std::vector<std::int64_t>& batch, std::vector<ChainState>& chains,
                       int k);

struct CdRecord {
    int restart = 0;
    int epoch = 0;
    double train_avg_ull = 0.0;
    double valid_avg_ull = 0.0;
    double gap = 0.0;
    double seconds = 0.0;
};

struct CdReport {
    std::vector<CdRecord> records;
    int selected_restart = 0;
    int selected_epoch = 0;
    bool stopped_early = false;
};

struct CdResult {
    RbmModel model;
    CdReport report;
};

/// Minibatch CD/PCD ascent. Each restart draws fresh random weights (scale
/// init_scale) and biases at the clamped logit of the data means, shuffles
/// rows anew every epoch, and keeps one chain per minibatch slot: plain CD
/// resets chains to the batch rows before each gradient, persistent CD lets
/// them run. Restarts are compared by their best train-validation gap, or by
/// exact validation log-likelihood when selection is Exact (small models).
CdResult cd_train(const BinaryDataset& train, const BinaryDataset& valid, const CdConfig& cfg);

/// Same loop from a caller-supplied starting model (warm start); restarts
/// differ only in chain and shuffle randomness.
CdResult cd_train(const BinaryDataset& train, const BinaryDataset& valid, const CdConfig& cfg,
                  const RbmModel& init_model);

void write_report_csv(const std::string& path, const CdReport& report);

}  // namespace frbm
