#include "frbm/fw.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>

#include "frbm/exact.hpp"
#include "frbm/io.hpp"
#include "frbm/math.hpp"

namespace frbm {
namespace {

void add_row_scaled(const PackedBitMatrix& m, std::int64_t r, double scale, Vec& acc) {
    const std::uint8_t* row = m.bytes().data() + static_cast<std::size_t>(r * m.stride());
    const int dim = m.dim();
    for (int base = 0; base < dim; base += 8) {
        std::uint8_t byte = row[base / 8];
        if (byte == 0) continue;
        int top = dim - base < 8 ? dim - base : 8;
        for (int k = 0; k < top; ++k) {
            if (byte & (1u << k)) acc[base + k] += scale;
        }
    }
}

InnerEval inner_eval_impl(const Vec& w, const PackedBitMatrix& data, const PackedBitMatrix& model,
                          const double* model_weights, double lambda) {
    if (data.dim() != model.dim() || w.size() != data.dim()) {
        throw DimensionError("inner_objective: dimension mismatch");
    }
    if (data.rows() < 1 || model.rows() < 1) {
        throw std::invalid_argument("inner_objective: empty data or sample set");
    }
    if (!(std::isfinite(lambda) && lambda > 0.0)) {
        throw std::invalid_argument("inner_objective: lambda must be finite and positive");
    }
    const double inv_s = 1.0 / static_cast<double>(model.rows());
    double model_value = 0.0;
    Vec model_grad = Vec::Zero(w.size());
    for (std::int64_t s = 0; s < model.rows(); ++s) {
        const double t = model.dot(s, w);
        const double wt = model_weights ? model_weights[s] : inv_s;
        model_value += wt * softplus(t);
        add_row_scaled(model, s, wt * sigmoid(t), model_grad);
    }
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    double data_value = 0.0;
    Vec data_grad = Vec::Zero(w.size());
    for (std::int64_t n = 0; n < data.rows(); ++n) {
        const double t = data.dot(n, w);
        data_value += inv_n * softplus(t);
        add_row_scaled(data, n, inv_n * sigmoid(t), data_grad);
    }
    InnerEval out;
    out.value = 0.5 * lambda * w.squaredNorm() + model_value - data_value;
    out.gradient = lambda * w + model_grad - data_grad;
    return out;
}

struct LbfgsOut {
    Vec x;
    double value;
    double grad_norm;
    int iterations;
    bool converged;
};

// Limited-memory quasi-Newton descent with Armijo backtracking. Serial and
// order-fixed, so the trajectory is a pure function of the inputs.
template <class F>
LbfgsOut lbfgs_minimize(F&& f, Vec x, double tol, int max_iters) {
    constexpr int kMemory = 10;
    constexpr double kArmijo = 1e-4;
    std::deque<Vec> s_hist;
    std::deque<Vec> y_hist;
    std::deque<double> rho;

    Vec g(x.size());
    double fx = f(x, g);
    int iter = 0;
    bool converged = g.norm() <= tol;
    while (!converged && iter < max_iters) {
        Vec q = g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
            q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
        }
        if (!s_hist.empty()) {
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vec d = -q;
        double dg = d.dot(g);
        if (!(dg < 0.0)) {
            d = -g;
            dg = -g.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho.clear();
            if (!(dg < 0.0)) break;
        }
        double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1.0, g.norm())) : 1.0;
        Vec x_new;
        Vec g_new(x.size());
        double f_new = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            x_new = x + step * d;
            f_new = f(x_new, g_new);
            if (f_new <= fx + kArmijo * step * dg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++iter;
        if (!accepted) break;
        Vec s = x_new - x;
        Vec y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho.pop_front();
            }
        }
        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);
        converged = g.norm() <= tol;
    }
    return {std::move(x), fx, g.norm(), iter, converged};
}

template <class Eval>
InnerSolution solve_inner_impl(int dim, Eval&& eval, const FwConfig& cfg,
                               std::uint32_t noise_stream) {
    auto f = [&](const Vec& x, Vec& grad) {
        InnerEval e = eval(x);
        grad = std::move(e.gradient);
        return e.value;
    };
    Vec g0(dim);
    const double f0 = f(Vec::Zero(dim), g0);

    // The origin is a stationary point whenever the data and model first
    // moments agree, so descending from -g0 alone can stall there while
    // curvature directions still pay. A few unit-scale random starts probe
    // those; the best minimizer wins. Starts are deterministic in
    // (seed, noise_stream) and never depend on the thread count.
    RngStream rng(cfg.seed, noise_stream, 0);
    InnerSolution best{Vec::Zero(dim), f0, g0.norm(), 0, g0.norm() <= cfg.inner_tol};
    constexpr int kStarts = 4;
    for (int s = 0; s < kStarts; ++s) {
        rng.set_step(static_cast<std::uint64_t>(s));
        Vec x0 = s == 0 ? Vec(-g0) : Vec(Vec::Zero(dim));
        const double scale = s == 0 ? 0.01 : 1.0;
        for (int j = 0; j < dim; ++j) x0[j] += scale * rng.gaussian();
        LbfgsOut out = lbfgs_minimize(f, std::move(x0), cfg.inner_tol, cfg.inner_max_iters);
        // Anything worse than the origin is rejected; zero keeps the
        // guarantee that the optimal value never exceeds the value at 0.
        if (out.value <= f0 && out.value < best.value) {
            best = {std::move(out.x), out.value, out.grad_norm, out.iterations, out.converged};
        }
    }
    return best;
}

double mix_softplus_expectation(const WeightAtomMix& mix, const Vec& q, const PackedBitMatrix& rows,
                                std::int64_t r) {
    double s = 0.0;
    for (int i = 0; i < mix.atom_count(); ++i) {
        s += q[i] * softplus(rows.dot(r, mix.atom(i).w));
    }
    return s;
}

Vec normalized_masses(const WeightAtomMix& mix) {
    if (mix.atom_count() == 0) throw std::invalid_argument("grad_alpha: mix has no atoms");
    Vec q(mix.atom_count());
    double total = 0.0;
    for (int i = 0; i < mix.atom_count(); ++i) total += mix.atom(i).mass;
    for (int i = 0; i < mix.atom_count(); ++i) q[i] = mix.atom(i).mass / total;
    return q;
}

double data_softplus_term(const WeightAtomMix& mix, const Vec& q, const BinaryDataset& data) {
    double s = 0.0;
    for (std::int64_t n = 0; n < data.size(); ++n) {
        s += mix_softplus_expectation(mix, q, data.vectors(), n);
    }
    return s / static_cast<double>(data.size());
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void validate(const FwConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("FwConfig: " + msg); };
    if (!(std::isfinite(cfg.lambda) && cfg.lambda > 0.0)) fail("lambda must be > 0");
    if (!(std::isfinite(cfg.eta) && cfg.eta > 0.0)) fail("eta must be > 0");
    if (cfg.max_units < 1) fail("max_units must be >= 1");
    if (!(std::isfinite(cfg.inner_tol) && cfg.inner_tol > 0.0)) fail("inner_tol must be > 0");
    if (cfg.inner_max_iters < 1) fail("inner_max_iters must be >= 1");
    if (cfg.samples_per_iter < 1) fail("samples_per_iter must be >= 1");
    if (cfg.minibatch < 1) fail("minibatch must be >= 1");
    if (cfg.bias_epochs < 0) fail("bias_epochs must be >= 0");
    if (cfg.alpha_grad_steps < 0) fail("alpha_grad_steps must be >= 0");
    if (!(std::isfinite(cfg.alpha_grad_rate) && cfg.alpha_grad_rate >= 0.0)) {
        fail("alpha_grad_rate must be >= 0");
    }
    if (cfg.eval_every < 1) fail("eval_every must be >= 1");
    if (cfg.early_stop_patience < 1) fail("early_stop_patience must be >= 1");
    if (!(std::isfinite(cfg.atom_stop_tol) && cfg.atom_stop_tol >= 0.0)) {
        fail("atom_stop_tol must be >= 0");
    }
    if (cfg.n_chains < 1) fail("n_chains must be >= 1");
    if (cfg.burn_in < 0) fail("burn_in must be >= 0");
    if (cfg.thinning < 1) fail("thinning must be >= 1");
}

WeightedStates enumerate_states(const WeightAtomMix& mix) {
    const int dim = mix.visible_dim();
    if (dim > kDistributionGuardBits) {
        throw CapacityError("enumerate_states: dimension exceeds the enumeration guard");
    }
    WeightedStates out;
    out.weights = exact_visible_distribution(mix);
    out.states = PackedBitMatrix(dim);
    const std::uint64_t total = std::uint64_t{1} << dim;
    out.states.reserve_rows(static_cast<std::int64_t>(total));
    Bits v(static_cast<std::size_t>(dim));
    for (std::uint64_t s = 0; s < total; ++s) {
        for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(j)] = (s >> j) & 1u;
        out.states.append_bits(v);
    }
    return out;
}

InnerEval inner_objective(const Vec& w, const BinaryDataset& data, const SampleBuffer& samples,
                          double lambda) {
    return inner_eval_impl(w, data.vectors(), samples.samples, nullptr, lambda);
}

InnerEval inner_objective(const Vec& w, const BinaryDataset& data, const WeightedStates& states,
                          double lambda) {
    if (states.weights.size() != states.states.rows()) {
        throw DimensionError("inner_objective: one weight per state required");
    }
    return inner_eval_impl(w, data.vectors(), states.states, states.weights.data(), lambda);
}

InnerSolution solve_inner(const BinaryDataset& data, const SampleBuffer& samples, double lambda,
                          const FwConfig& cfg, std::uint32_t noise_stream) {
    return solve_inner_impl(
        data.dim(), [&](const Vec& x) { return inner_objective(x, data, samples, lambda); }, cfg,
        noise_stream);
}

InnerSolution solve_inner(const BinaryDataset& data, const WeightedStates& states, double lambda,
                          const FwConfig& cfg, std::uint32_t noise_stream) {
    return solve_inner_impl(
        data.dim(), [&](const Vec& x) { return inner_objective(x, data, states, lambda); }, cfg,
        noise_stream);
}

WeightAtomMix update_bias(const WeightAtomMix& mix, const BinaryDataset& data, const FwConfig& cfg,
                          PersistentSampler& sampler) {
    if (data.dim() != mix.visible_dim()) throw DimensionError("update_bias: dimension mismatch");
    if (data.size() < 1) throw std::invalid_argument("update_bias: empty dataset");
    if (cfg.eta == 0.0) return mix;
    WeightAtomMix m = mix;
    const Vec data_mean = data.mean();
    const std::int64_t steps =
        static_cast<std::int64_t>(cfg.bias_epochs) *
        std::max<std::int64_t>(1, (data.size() + cfg.minibatch - 1) / cfg.minibatch);
    for (std::int64_t k = 0; k < steps; ++k) {
        const Vec model_mean = sampler.draw_mean(cfg.minibatch);
        m.set_bias(m.bias() + cfg.eta * (data_mean - model_mean));
        sampler.set_model(m, false);
    }
    return m;
}

WeightAtomMix update_bias_exact(const WeightAtomMix& mix, const BinaryDataset& data,
                                const FwConfig& cfg) {
    if (data.dim() != mix.visible_dim()) throw DimensionError("update_bias_exact: dimension mismatch");
    if (data.size() < 1) throw std::invalid_argument("update_bias_exact: empty dataset");
    if (cfg.eta == 0.0) return mix;
    WeightAtomMix m = mix;
    const Vec data_mean = data.mean();
    const std::int64_t steps =
        static_cast<std::int64_t>(cfg.bias_epochs) *
        std::max<std::int64_t>(1, (data.size() + cfg.minibatch - 1) / cfg.minibatch);
    for (std::int64_t k = 0; k < steps; ++k) {
        m.set_bias(m.bias() + cfg.eta * (data_mean - exact_visible_mean(m)));
    }
    return m;
}

double grad_alpha(const WeightAtomMix& mix, const BinaryDataset& data) {
    if (data.dim() != mix.visible_dim()) throw DimensionError("grad_alpha: dimension mismatch");
    if (data.size() < 1) throw std::invalid_argument("grad_alpha: empty dataset");
    const Vec q = normalized_masses(mix);
    const double data_term = data_softplus_term(mix, q, data);

    const double log_z = exact_log_partition_visible(mix);
    const auto& atoms = mix.atoms();
    std::vector<const Vec*> cols;
    cols.reserve(atoms.size());
    for (const auto& a : atoms) cols.push_back(&a.w);
    double model_term = 0.0;
    for_each_state_gray(mix.visible_dim(), cols, &mix.bias(),
                        [&](const Bits&, const std::vector<double>& act, double bias_dot) {
                            double energy = 0.0;
                            double expect = 0.0;
                            for (std::size_t i = 0; i < atoms.size(); ++i) {
                                const double sp = softplus(act[i]);
                                energy += atoms[i].mass * sp;
                                expect += q[static_cast<Eigen::Index>(i)] * sp;
                            }
                            model_term += std::exp(energy + bias_dot - log_z) * expect;
                        });
    return data_term - model_term;
}

double grad_alpha_sampled(const WeightAtomMix& mix, const BinaryDataset& data,
                          const SampleBuffer& samples) {
    if (data.dim() != mix.visible_dim() || samples.samples.dim() != mix.visible_dim()) {
        throw DimensionError("grad_alpha_sampled: dimension mismatch");
    }
    if (data.size() < 1 || samples.samples.rows() < 1) {
        throw std::invalid_argument("grad_alpha_sampled: empty data or sample set");
    }
    const Vec q = normalized_masses(mix);
    const double data_term = data_softplus_term(mix, q, data);
    double model_term = 0.0;
    for (std::int64_t s = 0; s < samples.samples.rows(); ++s) {
        model_term += mix_softplus_expectation(mix, q, samples.samples, s);
    }
    model_term /= static_cast<double>(samples.samples.rows());
    return data_term - model_term;
}

namespace {

double avg_ull(const WeightAtomMix& mix, const BinaryDataset& data) {
    double s = 0.0;
    for (std::int64_t n = 0; n < data.size(); ++n) {
        s += unnormalized_log_prob(mix, data.vectors().row_bits(n));
    }
    return s / static_cast<double>(data.size());
}

void set_uniform_masses(WeightAtomMix& mix, double alpha) {
    mix.set_alpha(alpha);
    const int t = mix.atom_count();
    const double mass = alpha == static_cast<double>(t) ? 1.0 : alpha / static_cast<double>(t);
    for (int i = 0; i < t; ++i) mix.set_mass(i, mass);
}

}  // namespace

namespace {

FwResult fw_train_impl(const BinaryDataset& train, const BinaryDataset& valid, const FwConfig& cfg,
                       const WeightAtomMix& start, int t0) {
    if (train.size() < 1 || valid.size() < 1) {
        throw std::invalid_argument("fw_train: empty training or validation set");
    }
    if (train.dim() != valid.dim() || train.dim() != start.visible_dim()) {
        throw DimensionError("fw_train: dimension mismatch");
    }
    if (cfg.max_units < t0) {
        throw std::invalid_argument("fw_train: max_units is below the start size");
    }

    WeightAtomMix m = start;
    std::unique_ptr<PersistentSampler> sampler;
    if (!cfg.exact_negative) {
        sampler = std::make_unique<PersistentSampler>(m, cfg.n_chains, cfg.seed, cfg.burn_in,
                                                      cfg.thinning);
    }

    TrainReport report;
    WeightAtomMix best = m;
    double best_gap = std::numeric_limits<double>::infinity();
    int best_t = t0 - 1;
    bool have_best = false;
    int worse_evals = 0;

    int t = t0;
    for (; t <= cfg.max_units; ++t) {
        const auto started = std::chrono::steady_clock::now();
        InnerSolution sol;
        if (cfg.exact_negative) {
            const WeightedStates states = enumerate_states(m);
            sol = solve_inner(train, states, cfg.lambda, cfg,
                              kStreamFwBase + static_cast<std::uint32_t>(t));
        } else {
            const SampleBuffer buffer = sampler->draw(cfg.samples_per_iter);
            sol = solve_inner(train, buffer, cfg.lambda, cfg,
                              kStreamFwBase + static_cast<std::uint32_t>(t));
        }

        // Conditional-gradient convergence test: once no atom can improve the
        // linearized objective by atom_stop_tol, growing further is noise.
        // Iteration 1 is exempt so the random starter atom is always replaced.
        if (cfg.atom_stop_tol > 0.0 && t > 1 && sol.value >= -cfg.atom_stop_tol) {
            --t;
            report.stopped_early = true;
            break;
        }

        if (t == 1) {
            m.clear_atoms();
            m.add_atom(sol.w, 1.0);
        } else {
            m.add_atom(sol.w, 1.0);
        }
        if (cfg.alpha_mode == AlphaMode::Count) {
            set_uniform_masses(m, static_cast<double>(t));
            if (sampler) sampler->set_model(m, true);
        } else {
            set_uniform_masses(m, m.alpha());
            if (sampler) sampler->set_model(m, true);
            double a = m.alpha();
            for (int k = 0; k < cfg.alpha_grad_steps; ++k) {
                double g;
                if (cfg.exact_negative) {
                    g = grad_alpha(m, train);
                } else {
                    const SampleBuffer buffer = sampler->draw(cfg.minibatch);
                    g = grad_alpha_sampled(m, train, buffer);
                }
                a = std::max(a + cfg.alpha_grad_rate * g, 1e-3);
                set_uniform_masses(m, a);
                if (sampler) sampler->set_model(m, false);
            }
        }

        if (cfg.exact_negative) {
            m = update_bias_exact(m, train, cfg);
        } else {
            m = update_bias(m, train, cfg, *sampler);
        }

        TrainRecord rec;
        rec.t = t;
        rec.inner_value = sol.value;
        rec.inner_grad_norm = sol.grad_norm;
        rec.w_norm = sol.w.norm();
        rec.inner_converged = sol.converged;
        const bool eval_now = (t - t0 + 1) % cfg.eval_every == 0 || t == cfg.max_units;
        if (eval_now) {
            rec.train_avg_ull = avg_ull(m, train);
            rec.valid_avg_ull = avg_ull(m, valid);
            rec.gap = rec.train_avg_ull - rec.valid_avg_ull;
            rec.evaluated = true;
        } else {
            rec.train_avg_ull = std::numeric_limits<double>::quiet_NaN();
            rec.valid_avg_ull = std::numeric_limits<double>::quiet_NaN();
            rec.gap = std::numeric_limits<double>::quiet_NaN();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        report.records.push_back(rec);

        if (rec.evaluated) {
            if (rec.gap < best_gap) {
                best_gap = rec.gap;
                best = m;
                best_t = t;
                have_best = true;
                worse_evals = 0;
            } else {
                ++worse_evals;
            }
            if (cfg.early_stop && worse_evals >= cfg.early_stop_patience) {
                report.stopped_early = true;
                break;
            }
        }
    }

    FwResult out{cfg.early_stop && have_best ? best : m, std::move(report)};
    out.report.selected_t = cfg.early_stop && have_best ? best_t : std::min(t, cfg.max_units);
    return out;
}

}  // namespace

FwResult fw_train(const BinaryDataset& train, const BinaryDataset& valid, const FwConfig& cfg) {
    validate(cfg);
    if (train.size() < 1) throw std::invalid_argument("fw_train: empty training set");
    // The starter atom is a placeholder: iteration 1 has unit step weight, so
    // the first fitted weight vector replaces it outright.
    RngStream rng(cfg.seed, kStreamFwBase, 0);
    Vec w0(train.dim());
    for (int j = 0; j < train.dim(); ++j) w0[j] = 0.01 * rng.gaussian();
    WeightAtomMix start(train.dim(), Vec::Zero(train.dim()), 1.0);
    start.add_atom(w0, 1.0);
    return fw_train_impl(train, valid, cfg, start, 1);
}

FwResult fw_train(const BinaryDataset& train, const BinaryDataset& valid, const FwConfig& cfg,
                  const WeightAtomMix& warm_start) {
    validate(cfg);
    if (!warm_start.is_standard()) {
        throw NotStandardError("fw_train: warm start must be a standard mix");
    }
    return fw_train_impl(train, valid, cfg, warm_start, warm_start.atom_count() + 1);
}

void write_report_csv(const std::string& path, const TrainReport& report) {
    const bool timing = std::getenv("FRBM_TIMING") != nullptr;
    std::ostringstream out;
    out << "t,inner_obj,inner_grad_norm,w_norm,train_ull,valid_ull,gap,seconds\n";
    for (const auto& r : report.records) {
        out << r.t << ',' << fmt17(r.inner_value) << ',' << fmt17(r.inner_grad_norm) << ','
            << fmt17(r.w_norm) << ',' << fmt17(r.train_avg_ull) << ',' << fmt17(r.valid_avg_ull)
            << ',' << fmt17(r.gap) << ',' << (timing ? fmt17(r.seconds) : "0") << "\n";
    }
    atomic_write_text(path, out.str());
}

}  // namespace frbm
