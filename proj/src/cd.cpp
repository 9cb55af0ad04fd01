#include "frbm/cd.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "frbm/exact.hpp"
#include "frbm/io.hpp"
#include "frbm/math.hpp"
#include "frbm/threads.hpp"

namespace frbm {
namespace {

constexpr std::uint32_t kCdChainsOffset = 0;          // + restart * 2^16 + chain
constexpr std::uint32_t kCdInitOffset = 1u << 28;     // + restart
constexpr std::uint32_t kCdShuffleOffset = (1u << 28) + (1u << 20);  // + restart, step = epoch

double avg_ull(const RbmModel& model, const BinaryDataset& data) {
    double s = 0.0;
    for (std::int64_t n = 0; n < data.size(); ++n) {
        s += unnormalized_log_prob(model, data.vectors().row_bits(n));
    }
    return s / static_cast<double>(data.size());
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RbmModel random_init(const BinaryDataset& train, const CdConfig& cfg, int restart) {
    RngStream rng(cfg.seed, kStreamCdBase + kCdInitOffset + static_cast<std::uint32_t>(restart), 0);
    Mat w(train.dim(), cfg.hidden_units);
    for (int i = 0; i < cfg.hidden_units; ++i) {
        for (int j = 0; j < train.dim(); ++j) w(j, i) = cfg.init_scale * rng.gaussian();
    }
    // Bias at the clamped logit of the empirical unit means, the standard
    // starting point that already matches first moments.
    const Vec mean = train.mean();
    Vec b(train.dim());
    for (int j = 0; j < train.dim(); ++j) {
        const double p = std::min(std::max(mean[j], sigmoid(-4.0)), sigmoid(4.0));
        b[j] = logit(p);
    }
    return RbmModel(std::move(w), std::move(b));
}

std::vector<std::int64_t> epoch_order(std::int64_t n, const CdConfig& cfg, int restart, int epoch) {
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(cfg.seed, kStreamCdBase + kCdShuffleOffset + static_cast<std::uint32_t>(restart),
                  static_cast<std::uint64_t>(epoch));
    for (std::int64_t i = n - 1; i > 0; --i) {
        auto j = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

struct RestartOutcome {
    RbmModel model;
    double gap;
    int epoch;
    bool stopped_early;
};

RestartOutcome run_restart(const BinaryDataset& train, const BinaryDataset& valid,
                           const CdConfig& cfg, const RbmModel& init, int restart,
                           CdReport& report) {
    RbmModel model = init;
    std::vector<ChainState> chains;
    chains.reserve(static_cast<std::size_t>(cfg.minibatch));
    for (int c = 0; c < cfg.minibatch; ++c) {
        chains.push_back(make_chain(
            train.dim(), cfg.seed,
            kStreamCdBase + kCdChainsOffset +
                static_cast<std::uint32_t>(restart) * (1u << 16) + static_cast<std::uint32_t>(c)));
    }
    if (cfg.persistent) {
        // Persistent chains start at the first rows of the training set.
        for (int c = 0; c < cfg.minibatch; ++c) {
            chains[static_cast<std::size_t>(c)].v =
                train.vectors().row_bits(c % train.size());
        }
    }

    RbmModel best = model;
    double best_gap = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    bool have_best = false;
    int worse_evals = 0;
    bool stopped = false;

    for (int epoch = 1; epoch <= cfg.epochs && !stopped; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const std::vector<std::int64_t> order = epoch_order(train.size(), cfg, restart, epoch);
        for (std::int64_t at = 0; at < train.size(); at += cfg.minibatch) {
            const std::int64_t batch_size = std::min<std::int64_t>(cfg.minibatch, train.size() - at);
            std::vector<std::int64_t> batch(order.begin() + at, order.begin() + at + batch_size);
            CdGradient grad{Mat(), Vec()};
            if (cfg.persistent) {
                grad = cd_gradient(model, train, batch, chains, cfg.k);
            } else {
                for (std::int64_t c = 0; c < batch_size; ++c) {
                    chains[static_cast<std::size_t>(c)].v =
                        train.vectors().row_bits(batch[static_cast<std::size_t>(c)]);
                }
                if (batch_size == static_cast<std::int64_t>(chains.size())) {
                    grad = cd_gradient(model, train, batch, chains, cfg.k);
                } else {
                    std::vector<ChainState> active(chains.begin(), chains.begin() + batch_size);
                    grad = cd_gradient(model, train, batch, active, cfg.k);
                    for (std::int64_t c = 0; c < batch_size; ++c) {
                        chains[static_cast<std::size_t>(c)] = active[static_cast<std::size_t>(c)];
                    }
                }
            }
            model.weights += cfg.learning_rate * grad.d_weights;
            model.bias += cfg.learning_rate * grad.d_bias;
        }
        const bool eval_now = epoch % cfg.eval_every == 0 || epoch == cfg.epochs;
        if (eval_now) {
            CdRecord rec;
            rec.restart = restart;
            rec.epoch = epoch;
            rec.train_avg_ull = avg_ull(model, train);
            rec.valid_avg_ull = avg_ull(model, valid);
            rec.gap = rec.train_avg_ull - rec.valid_avg_ull;
            rec.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            report.records.push_back(rec);
            if (rec.gap < best_gap) {
                best_gap = rec.gap;
                best = model;
                best_epoch = epoch;
                have_best = true;
                worse_evals = 0;
            } else {
                ++worse_evals;
            }
            if (cfg.early_stop_patience > 0 && worse_evals >= cfg.early_stop_patience) {
                stopped = true;
            }
        }
    }
    const bool use_best = cfg.early_stop_patience > 0 && have_best;
    return {use_best ? best : model, have_best ? best_gap : 0.0,
            use_best ? best_epoch : cfg.epochs, stopped};
}

}  // namespace

void validate(const CdConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("CdConfig: " + msg); };
    if (cfg.k < 1) fail("k must be >= 1");
    if (!(std::isfinite(cfg.learning_rate) && cfg.learning_rate > 0.0)) {
        fail("learning_rate must be > 0");
    }
    if (cfg.minibatch < 1) fail("minibatch must be >= 1");
    if (cfg.epochs < 0) fail("epochs must be >= 0");
    if (cfg.hidden_units < 1) fail("hidden_units must be >= 1");
    if (!(std::isfinite(cfg.init_scale) && cfg.init_scale >= 0.0)) fail("init_scale must be >= 0");
    if (cfg.restarts < 1) fail("restarts must be >= 1");
    if (cfg.eval_every < 1) fail("eval_every must be >= 1");
    if (cfg.early_stop_patience < 0) fail("early_stop_patience must be >= 0");
}

CdGradient cd_gradient(const RbmModel& model, const BinaryDataset& data,
                       const std::vector<std::int64_t>& batch, std::vector<ChainState>& chains,
                       int k) {
    if (data.dim() != model.visible_dim()) throw DimensionError("cd_gradient: dimension mismatch");
    if (batch.empty()) throw std::invalid_argument("cd_gradient: empty batch");
    if (chains.empty()) throw std::invalid_argument("cd_gradient: no chains");
    if (k < 1) throw std::invalid_argument("cd_gradient: k must be >= 1");

    const int n_visible = model.visible_dim();
    const int n_hidden = model.hidden_dim();
    Mat pos_w = Mat::Zero(n_visible, n_hidden);
    Vec pos_b = Vec::Zero(n_visible);
    for (std::int64_t r : batch) {
        const Bits v = data.vectors().row_bits(r);
        const Vec mu = hidden_conditional(model, v);
        for (int j = 0; j < n_visible; ++j) {
            if (v[static_cast<std::size_t>(j)]) {
                pos_w.row(j) += mu.transpose();
                pos_b[j] += 1.0;
            }
        }
    }
    pos_w /= static_cast<double>(batch.size());
    pos_b /= static_cast<double>(batch.size());

    parallel_blocks(static_cast<std::int64_t>(chains.size()), [&](std::int64_t c) {
        ChainState& chain = chains[static_cast<std::size_t>(c)];
        for (int step = 0; step < k; ++step) gibbs_step(model, chain);
    });
    Mat neg_w = Mat::Zero(n_visible, n_hidden);
    Vec neg_b = Vec::Zero(n_visible);
    for (const ChainState& chain : chains) {
        const Vec mu = hidden_conditional(model, chain.v);
        for (int j = 0; j < n_visible; ++j) {
            if (chain.v[static_cast<std::size_t>(j)]) {
                neg_w.row(j) += mu.transpose();
                neg_b[j] += 1.0;
            }
        }
    }
    neg_w /= static_cast<double>(chains.size());
    neg_b /= static_cast<double>(chains.size());
    return {pos_w - neg_w, pos_b - neg_b};
}

CdResult cd_train(const BinaryDataset& train, const BinaryDataset& valid, const CdConfig& cfg) {
    validate(cfg);
    if (train.size() < 1 || valid.size() < 1) {
        throw std::invalid_argument("cd_train: empty training or validation set");
    }
    if (train.dim() != valid.dim()) throw DimensionError("cd_train: dimension mismatch");

    CdReport report;
    std::optional<CdResult> chosen;
    double chosen_score = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        const RbmModel init = random_init(train, cfg, r);
        RestartOutcome outcome = run_restart(train, valid, cfg, init, r, report);
        // Smaller is better on either scale: the gap directly, or the
        // negated exact validation log-likelihood.
        const double score = cfg.restart_select == RestartSelect::Gap
                                 ? outcome.gap
                                 : -exact_avg_loglik(outcome.model, valid);
        if (!chosen || score < chosen_score) {
            chosen_score = score;
            CdReport picked;
            picked.selected_restart = r;
            picked.selected_epoch = outcome.epoch;
            picked.stopped_early = outcome.stopped_early;
            chosen = CdResult{std::move(outcome.model), std::move(picked)};
        }
    }
    chosen->report.records = std::move(report.records);
    return std::move(*chosen);
}

CdResult cd_train(const BinaryDataset& train, const BinaryDataset& valid, const CdConfig& cfg,
                  const RbmModel& init_model) {
    validate(cfg);
    if (train.size() < 1 || valid.size() < 1) {
        throw std::invalid_argument("cd_train: empty training or validation set");
    }
    if (train.dim() != valid.dim() || train.dim() != init_model.visible_dim()) {
        throw DimensionError("cd_train: dimension mismatch");
    }
    CdReport report;
    std::optional<CdResult> chosen;
    double chosen_score = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        RestartOutcome outcome = run_restart(train, valid, cfg, init_model, r, report);
        const double score = cfg.restart_select == RestartSelect::Gap
                                 ? outcome.gap
                                 : -exact_avg_loglik(outcome.model, valid);
        if (!chosen || score < chosen_score) {
            chosen_score = score;
            CdReport picked;
            picked.selected_restart = r;
            picked.selected_epoch = outcome.epoch;
            picked.stopped_early = outcome.stopped_early;
            chosen = CdResult{std::move(outcome.model), std::move(picked)};
        }
    }
    chosen->report.records = std::move(report.records);
    return std::move(*chosen);
}

void write_report_csv(const std::string& path, const CdReport& report) {
    const bool timing = std::getenv("FRBM_TIMING") != nullptr;
    std::ostringstream out;
    out << "restart,epoch,train_ull,valid_ull,gap,seconds\n";
    for (const auto& r : report.records) {
        out << r.restart << ',' << r.epoch << ',' << fmt17(r.train_avg_ull) << ','
            << fmt17(r.valid_avg_ull) << ',' << fmt17(r.gap) << ','
            << (timing ? fmt17(r.seconds) : "0") << "\n";
    }
    atomic_write_text(path, out.str());
}

}  // namespace frbm
