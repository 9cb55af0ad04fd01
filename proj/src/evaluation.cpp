#include "frbm/evaluation.hpp"

#include <cmath>

#include "frbm/math.hpp"
#include "frbm/rng.hpp"
#include "frbm/threads.hpp"

namespace frbm {

std::vector<double> piecewise_schedule(const std::vector<SchedulePiece>& pieces) {
    if (pieces.empty()) throw std::invalid_argument("piecewise_schedule: no segments");
    std::vector<double> out;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const auto& piece = pieces[p];
        if (piece.n < 1) throw std::invalid_argument("piecewise_schedule: segment needs n >= 1");
        if (!(piece.hi >= piece.lo)) throw std::invalid_argument("piecewise_schedule: hi < lo");
        const double width = (piece.hi - piece.lo) / piece.n;
        if (p + 1 < pieces.size()) {
            for (int j = 0; j < piece.n; ++j) out.push_back(piece.lo + j * width);
        } else {
            for (int j = 1; j < piece.n; ++j) out.push_back(piece.lo + j * width);
            out.push_back(piece.hi);
        }
    }
    return out;
}

std::vector<double> uniform_schedule(int n) {
    if (n < 2) throw std::invalid_argument("uniform_schedule: need at least 2 points");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n - 1; ++j) out[static_cast<std::size_t>(j)] = static_cast<double>(j) / (n - 1);
    out.back() = 1.0;
    return out;
}

std::vector<double> default_schedule() {
    return piecewise_schedule({{0.0, 0.5, 500}, {0.5, 0.9, 4000}, {0.9, 1.0, 10000}});
}

void validate(const AisConfig& cfg, int visible_dim) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("AisConfig: " + msg); };
    if (cfg.schedule.size() < 2) fail("schedule needs at least 2 points");
    if (cfg.schedule.front() != 0.0) fail("schedule must start at 0");
    if (cfg.schedule.back() != 1.0) fail("schedule must end at 1");
    for (std::size_t k = 1; k < cfg.schedule.size(); ++k) {
        if (cfg.schedule[k] < cfg.schedule[k - 1]) fail("schedule must be nondecreasing");
    }
    if (cfg.runs < 2) fail("runs must be >= 2");
    if (cfg.base_bias.size() != 0 && cfg.base_bias.size() != visible_dim) {
        fail("base_bias length must match the model");
    }
    if (cfg.base_bias.size() != 0 && !cfg.base_bias.allFinite()) fail("base_bias must be finite");
}

namespace {

// One annealing run: importance weight accumulated along the ladder, with a
// Gibbs sweep of the intermediate machine between consecutive temperatures.
double single_run(const RbmModel& model, const std::vector<double>& schedule, const Vec& base_bias,
                  std::uint64_t seed, std::uint32_t stream) {
    const int n_visible = model.visible_dim();
    const int n_hidden = model.hidden_dim();
    const Vec bias_diff = model.bias - base_bias;

    RngStream rng(seed, stream, 0);
    Bits v(static_cast<std::size_t>(n_visible));
    for (int j = 0; j < n_visible; ++j) {
        v[static_cast<std::size_t>(j)] = rng.uniform() < sigmoid(base_bias[j]) ? 1 : 0;
    }

    // act[i] = col_i · v and the bias-difference dot, refreshed per sweep.
    Vec act(n_hidden);
    for (int i = 0; i < n_hidden; ++i) act[i] = bits_dot(v, model.weights.col(i));
    double bias_dot = bits_dot(v, bias_diff);
    double log_weight = 0.0;
    const std::size_t n_temps = schedule.size();
    for (std::size_t k = 1; k < n_temps; ++k) {
        const double beta_prev = schedule[k - 1];
        const double beta = schedule[k];
        double delta = 0.0;
        for (int i = 0; i < n_hidden; ++i) {
            delta += softplus(beta * act[i]) - softplus(beta_prev * act[i]);
        }
        delta += (beta - beta_prev) * bias_dot;
        log_weight += delta;
        if (k + 1 == n_temps) break;

        // One sweep of the machine at beta: weights scaled by beta, bias
        // blended toward the target.
        rng.set_step(k);
        Bits h(static_cast<std::size_t>(n_hidden));
        for (int i = 0; i < n_hidden; ++i) {
            h[static_cast<std::size_t>(i)] = rng.uniform() < sigmoid(beta * act[i]) ? 1 : 0;
        }
        for (int j = 0; j < n_visible; ++j) {
            double t = (1.0 - beta) * base_bias[j] + beta * model.bias[j];
            for (int i = 0; i < n_hidden; ++i) {
                if (h[static_cast<std::size_t>(i)]) t += beta * model.weights(j, i);
            }
            v[static_cast<std::size_t>(j)] = rng.uniform() < sigmoid(t) ? 1 : 0;
        }
        for (int i = 0; i < n_hidden; ++i) act[i] = bits_dot(v, model.weights.col(i));
        bias_dot = bits_dot(v, bias_diff);
    }
    return log_weight;
}

}  // namespace

LikelihoodEstimate ais_log_partition(const RbmModel& model, const AisConfig& cfg) {
    validate(cfg, model.visible_dim());
    const Vec base_bias =
        cfg.base_bias.size() == 0 ? Vec::Zero(model.visible_dim()) : cfg.base_bias;

    LikelihoodEstimate est;
    est.base_log_z = model.hidden_dim() * std::log(2.0);
    for (int j = 0; j < model.visible_dim(); ++j) est.base_log_z += softplus(base_bias[j]);

    est.run_log_weights.resize(static_cast<std::size_t>(cfg.runs));
    parallel_blocks(cfg.runs, [&](std::int64_t r) {
        est.run_log_weights[static_cast<std::size_t>(r)] =
            single_run(model, cfg.schedule, base_bias, cfg.seed,
                       kStreamAisBase + static_cast<std::uint32_t>(r));
    });

    est.log_z_mean = log_mean_exp(est.run_log_weights) + est.base_log_z;

    // Delta method on the mean of a_r = exp(w_r - max): the standard error of
    // log of the mean is std(a) / (sqrt(R) * mean(a)).
    double max_w = est.run_log_weights[0];
    for (double w : est.run_log_weights) max_w = std::max(max_w, w);
    double mean_a = 0.0;
    for (double w : est.run_log_weights) mean_a += std::exp(w - max_w);
    mean_a /= static_cast<double>(cfg.runs);
    double var_a = 0.0;
    for (double w : est.run_log_weights) {
        const double d = std::exp(w - max_w) - mean_a;
        var_a += d * d;
    }
    var_a /= static_cast<double>(cfg.runs - 1);
    est.log_z_std = std::sqrt(var_a / static_cast<double>(cfg.runs)) / mean_a;
    return est;
}

LikelihoodEstimate evaluate_ais(const RbmModel& model, const BinaryDataset& test,
                                const AisConfig& cfg) {
    LikelihoodEstimate est = ais_log_partition(model, cfg);
    est.avg_test_loglik = avg_test_loglik(model, test, est.log_z_mean);
    est.n_test = test.size();
    return est;
}

double avg_test_loglik(const RbmModel& model, const BinaryDataset& test, double log_z) {
    if (test.dim() != model.visible_dim()) throw DimensionError("avg_test_loglik: dimension mismatch");
    if (test.size() < 1) throw std::invalid_argument("avg_test_loglik: empty test set");
    double s = 0.0;
    for (std::int64_t n = 0; n < test.size(); ++n) {
        s += unnormalized_log_prob(model, test.vectors().row_bits(n));
    }
    return s / static_cast<double>(test.size()) - log_z;
}

Mat extract_features(const RbmModel& model, const BinaryDataset& data) {
    if (data.dim() != model.visible_dim()) throw DimensionError("extract_features: dimension mismatch");
    Mat features(data.size(), model.hidden_dim());
    for (std::int64_t n = 0; n < data.size(); ++n) {
        features.row(n) = hidden_conditional(model, data.vectors().row_bits(n)).transpose();
    }
    return features;
}

ClassifyResult softmax_classify(const Mat& train_x, const std::vector<std::uint16_t>& train_y,
                                const Mat& test_x, const std::vector<std::uint16_t>& test_y,
                                double l2, int iters) {
    if (train_x.rows() < 1 || test_x.rows() < 1) {
        throw std::invalid_argument("softmax_classify: empty train or test matrix");
    }
    if (train_x.cols() != test_x.cols()) {
        throw DimensionError("softmax_classify: feature width mismatch");
    }
    if (static_cast<std::int64_t>(train_y.size()) != train_x.rows() ||
        static_cast<std::int64_t>(test_y.size()) != test_x.rows()) {
        throw DimensionError("softmax_classify: one label per row required");
    }
    if (!(std::isfinite(l2) && l2 >= 0.0)) throw std::invalid_argument("softmax_classify: bad l2");
    if (iters < 1) throw std::invalid_argument("softmax_classify: iters must be >= 1");

    int classes = 0;
    for (std::uint16_t y : train_y) classes = std::max(classes, static_cast<int>(y) + 1);
    for (std::uint16_t y : test_y) classes = std::max(classes, static_cast<int>(y) + 1);
    if (classes < 2) throw std::invalid_argument("softmax_classify: need at least 2 classes");

    const auto n = train_x.rows();
    const auto d = train_x.cols();
    // Last column of theta is the intercept, exempt from the l2 penalty.
    Mat theta = Mat::Zero(classes, d + 1);
    Mat x_aug(n, d + 1);
    x_aug.leftCols(d) = train_x;
    x_aug.col(d).setOnes();

    // A fixed step below 1/L for the softmax loss keeps plain gradient
    // descent stable without a line search.
    const double mean_sq = x_aug.rowwise().squaredNorm().mean();
    const double step = 1.0 / (0.5 * mean_sq + l2 + 1e-12);

    Mat probs(n, classes);
    for (int it = 0; it < iters; ++it) {
        probs = x_aug * theta.transpose();
        for (Eigen::Index r = 0; r < n; ++r) {
            const double m = probs.row(r).maxCoeff();
            probs.row(r) = (probs.row(r).array() - m).exp();
            probs.row(r) /= probs.row(r).sum();
        }
        for (Eigen::Index r = 0; r < n; ++r) probs(r, train_y[static_cast<std::size_t>(r)]) -= 1.0;
        Mat grad = (probs.transpose() * x_aug) / static_cast<double>(n);
        grad.leftCols(d) += l2 * theta.leftCols(d);
        theta -= step * grad;
    }

    ClassifyResult out;
    out.predictions.reserve(static_cast<std::size_t>(test_x.rows()));
    std::int64_t wrong = 0;
    for (Eigen::Index r = 0; r < test_x.rows(); ++r) {
        Vec logits = theta.leftCols(d) * test_x.row(r).transpose() + theta.col(d);
        int arg = 0;
        for (int c = 1; c < classes; ++c) {
            if (logits[c] > logits[arg]) arg = c;
        }
        out.predictions.push_back(arg);
        if (arg != static_cast<int>(test_y[static_cast<std::size_t>(r)])) ++wrong;
    }
    out.error_rate = static_cast<double>(wrong) / static_cast<double>(test_x.rows());
    return out;
}

}  // namespace frbm
