#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "frbm/exact.hpp"
#include "frbm/fw.hpp"
#include "frbm/io.hpp"
#include "testutil.hpp"

using namespace frbm;

namespace {

// Literal recomputation of the inner objective from its definition.
double naive_inner(const Vec& w, const BinaryDataset& data, const PackedBitMatrix& samples,
                   double lambda) {
    auto sp = [](double x) { return std::log1p(std::exp(x)); };
    double model_term = 0.0;
    for (std::int64_t r = 0; r < samples.rows(); ++r) {
        double dot = 0.0;
        Bits row = samples.row_bits(r);
        for (int j = 0; j < samples.dim(); ++j) dot += row[static_cast<std::size_t>(j)] * w[j];
        model_term += sp(dot);
    }
    model_term /= static_cast<double>(samples.rows());
    double data_term = 0.0;
    for (std::int64_t r = 0; r < data.size(); ++r) {
        double dot = 0.0;
        Bits row = data.vectors().row_bits(r);
        for (int j = 0; j < data.dim(); ++j) dot += row[static_cast<std::size_t>(j)] * w[j];
        data_term += sp(dot);
    }
    data_term /= static_cast<double>(data.size());
    return 0.5 * lambda * w.squaredNorm() + model_term - data_term;
}

SampleBuffer buffer_of(const BinaryDataset& data) {
    SampleBuffer buf;
    buf.samples = data.vectors();
    return buf;
}

FwConfig tiny_config() {
    FwConfig cfg;
    cfg.lambda = 0.1;
    cfg.max_units = 4;
    cfg.eval_every = 1;
    cfg.early_stop = false;
    cfg.exact_negative = true;
    cfg.samples_per_iter = 64;
    cfg.minibatch = 16;
    return cfg;
}

}  // namespace

TEST_CASE("config validation rejects bad values") {
    FwConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = FwConfig{};
    cfg.eta = -0.1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = FwConfig{};
    cfg.max_units = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = FwConfig{};
    cfg.n_chains = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = FwConfig{};
    cfg.thinning = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = FwConfig{};
    cfg.atom_stop_tol = -0.1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("inner objective is zero at the origin and matches its definition") {
    BinaryDataset data = testutil::random_dataset(5, 18, 1, {0.8, 0.2, 0.5, 0.6, 0.4});
    BinaryDataset fake_model = testutil::random_dataset(5, 30, 2);
    SampleBuffer samples = buffer_of(fake_model);

    Vec zero = Vec::Zero(5);
    InnerEval at_zero = inner_objective(zero, data, samples, 0.5);
    // both means are softplus(0); only their rounding differs
    CHECK(std::abs(at_zero.value) < 1e-14);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Vec w(5);
        for (int j = 0; j < 5; ++j) w[j] = gauss(rng);
        InnerEval eval = inner_objective(w, data, samples, 0.5);
        CHECK(eval.value ==
              doctest::Approx(naive_inner(w, data, fake_model.vectors(), 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("inner gradient matches central finite differences") {
    BinaryDataset data = testutil::random_dataset(4, 15, 4, {0.7, 0.3, 0.6, 0.2});
    SampleBuffer samples = buffer_of(testutil::random_dataset(4, 25, 5));
    Vec w(4);
    w << 0.3, -1.2, 0.8, 0.1;
    InnerEval eval = inner_objective(w, data, samples, 0.25);
    const double h = 1e-6;
    for (int j = 0; j < 4; ++j) {
        Vec up = w, down = w;
        up[j] += h;
        down[j] -= h;
        double fd = (inner_objective(up, data, samples, 0.25).value -
                     inner_objective(down, data, samples, 0.25).value) /
                    (2 * h);
        CHECK(eval.gradient[j] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("solve_inner finds zero when samples equal the data") {
    BinaryDataset data = testutil::random_dataset(4, 20, 6);
    SampleBuffer samples = buffer_of(data);
    FwConfig cfg;
    cfg.inner_tol = 1e-10;
    InnerSolution sol = solve_inner(data, samples, 1.0, cfg);
    CHECK(sol.w.norm() < 1e-6);
    CHECK(sol.value <= 0.0);
}

TEST_CASE("solve_inner reaches a stationary point of negative value") {
    BinaryDataset data = testutil::random_dataset(5, 30, 7, {0.9, 0.1, 0.5, 0.7, 0.3});
    SampleBuffer samples = buffer_of(testutil::random_dataset(5, 40, 8));
    FwConfig cfg;
    InnerSolution sol = solve_inner(data, samples, 0.2, cfg);
    CHECK(sol.converged);
    CHECK(sol.value < 0.0);
    CHECK(sol.value <= 0.0);
    InnerEval at_sol = inner_objective(sol.w, data, samples, 0.2);
    CHECK(at_sol.gradient.norm() < 1e-4);
    // no nearby direction improves on it
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        Vec nudge(5);
        for (int j = 0; j < 5; ++j) nudge[j] = gauss(rng);
        CHECK(inner_objective(sol.w + nudge, data, samples, 0.2).value >= sol.value - 1e-9);
    }
}

TEST_CASE("solve_inner is deterministic for fixed seed and stream") {
    BinaryDataset data = testutil::random_dataset(4, 12, 10);
    SampleBuffer samples = buffer_of(testutil::random_dataset(4, 12, 11));
    FwConfig cfg;
    cfg.seed = 77;
    InnerSolution a = solve_inner(data, samples, 0.3, cfg, kStreamFwBase + 5);
    InnerSolution b = solve_inner(data, samples, 0.3, cfg, kStreamFwBase + 5);
    CHECK(a.w == b.w);
    InnerSolution c = solve_inner(data, samples, 0.3, cfg, kStreamFwBase + 6);
    CHECK(a.w != c.w);  // different noise, generically different solve path
}

TEST_CASE("enumerate_states lists states with exact probabilities") {
    WeightAtomMix mix = testutil::random_mix(4, 2, 0.8, 12);
    WeightedStates states = enumerate_states(mix);
    REQUIRE(states.states.rows() == 16);
    std::vector<double> reference = testutil::naive_distribution(mix);
    for (std::int64_t s = 0; s < 16; ++s) {
        CHECK(testutil::state_of(states.states.row_bits(s)) == static_cast<std::uint64_t>(s));
        CHECK(states.weights[s] == doctest::Approx(reference[static_cast<std::size_t>(s)])
                                       .epsilon(1e-11));
    }

    // weighted inner objective equals the sampled one in the infinite limit,
    // here checked against a literal weighted sum
    BinaryDataset data = testutil::random_dataset(4, 10, 13);
    Vec w(4);
    w << 0.5, -0.5, 1.0, -1.0;
    InnerEval eval = inner_objective(w, data, states, 0.4);
    auto sp = [](double x) { return std::log1p(std::exp(x)); };
    double model_term = 0.0;
    for (std::int64_t s = 0; s < 16; ++s) {
        double dot = 0.0;
        for (int j = 0; j < 4; ++j) dot += ((s >> j) & 1) * w[j];
        model_term += states.weights[s] * sp(dot);
    }
    double data_term = 0.0;
    for (std::int64_t r = 0; r < data.size(); ++r) {
        data_term += sp(data.vectors().dot(r, w));
    }
    data_term /= static_cast<double>(data.size());
    CHECK(eval.value ==
          doctest::Approx(0.2 * w.squaredNorm() + model_term - data_term).epsilon(1e-12));
}

TEST_CASE("update_bias with zero step returns the mix unchanged") {
    WeightAtomMix mix = testutil::random_mix(4, 2, 0.6, 14);
    BinaryDataset data = testutil::random_dataset(4, 20, 15);
    FwConfig cfg = tiny_config();
    cfg.eta = 0.0;
    WeightAtomMix after = update_bias_exact(mix, data, cfg);
    CHECK(model_digest(after) == model_digest(mix));
}

TEST_CASE("exact bias ascent drives the model mean toward the data mean") {
    Vec bias = Vec::Zero(3);
    WeightAtomMix mix(3, bias, 1.0);  // atomless: model mean is sigmoid(bias)
    Vec w = Vec::Zero(3);
    mix.add_atom(w, 1.0);  // zero atom keeps it standard without affecting p
    BinaryDataset data = testutil::random_dataset(3, 400, 16, {0.9, 0.2, 0.6});
    FwConfig cfg = tiny_config();
    cfg.eta = 0.5;
    cfg.bias_epochs = 40;
    WeightAtomMix after = update_bias_exact(mix, data, cfg);
    Vec model_mean = exact_visible_mean(after);
    Vec data_mean = data.mean();
    for (int j = 0; j < 3; ++j) CHECK(model_mean[j] == doctest::Approx(data_mean[j]).epsilon(0.02));
}

TEST_CASE("grad_alpha matches finite differences of the average log-likelihood") {
    WeightAtomMix mix = testutil::random_mix(4, 3, 0.9, 17, /*unit_masses=*/false);
    BinaryDataset data = testutil::random_dataset(4, 30, 18, {0.6, 0.4, 0.7, 0.3});

    double total_mass = 0.0;
    for (const WeightAtom& atom : mix.atoms()) total_mass += atom.mass;

    auto loglik_at_scale = [&](double alpha) {
        WeightAtomMix scaled = mix;
        scaled.scale_masses(alpha / total_mass);
        double mean_ulp = 0.0;
        for (std::int64_t r = 0; r < data.size(); ++r) {
            mean_ulp += unnormalized_log_prob(scaled, data.vectors().row_bits(r));
        }
        return mean_ulp / static_cast<double>(data.size()) -
               testutil::naive_log_partition(scaled);
    };

    double grad = grad_alpha(mix, data);
    double fd = testutil::central_diff(loglik_at_scale, total_mass, 1e-5);
    CHECK(grad == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("count-mode training grows a standard mix one unit per iteration") {
    WeightAtomMix target = testutil::random_mix(4, 2, 1.2, 19);
    BinaryDataset train = testutil::sample_exact(target, 150, 20);
    BinaryDataset valid = testutil::sample_exact(target, 60, 21);

    FwConfig cfg = tiny_config();
    FwResult result = fw_train(train, valid, cfg);
    CHECK(result.model.atom_count() == 4);
    CHECK(result.model.is_standard());
    CHECK(result.model.alpha() == 4.0);
    for (int i = 0; i < result.model.atom_count(); ++i) CHECK(result.model.atom(i).mass == 1.0);
    CHECK(result.report.selected_t == 4);
    CHECK(result.report.records.size() == 4);
    for (std::size_t i = 0; i < result.report.records.size(); ++i) {
        CHECK(result.report.records[i].t == static_cast<int>(i) + 1);
        CHECK(result.report.records[i].evaluated);
        CHECK(result.report.records[i].inner_value <= 1e-12);
    }

    // the fit should beat the empty model on held-out data
    WeightAtomMix empty(4, Vec::Zero(4), 1.0);
    Vec zero_w = Vec::Zero(4);
    empty.add_atom(zero_w, 1.0);
    CHECK(exact_avg_loglik(result.model, valid) > exact_avg_loglik(empty, valid));
}

TEST_CASE("training twice produces bit-identical models") {
    BinaryDataset train = testutil::random_dataset(4, 60, 22, {0.8, 0.3, 0.5, 0.4});
    FwConfig cfg = tiny_config();
    cfg.exact_negative = false;  // exercise the sampled path
    cfg.n_chains = 4;
    cfg.burn_in = 30;
    FwResult a = fw_train(train, train, cfg);
    FwResult b = fw_train(train, train, cfg);
    CHECK(model_digest(a.model) == model_digest(b.model));
    REQUIRE(a.report.records.size() == b.report.records.size());
    for (std::size_t i = 0; i < a.report.records.size(); ++i) {
        CHECK(a.report.records[i].inner_value == b.report.records[i].inner_value);
        CHECK(a.report.records[i].train_avg_ull == b.report.records[i].train_avg_ull);
    }
}

TEST_CASE("early stopping returns the smallest-gap snapshot") {
    WeightAtomMix target = testutil::random_mix(4, 2, 1.0, 23);
    BinaryDataset train = testutil::sample_exact(target, 40, 24);
    BinaryDataset valid = testutil::sample_exact(target, 40, 25);

    FwConfig cfg = tiny_config();
    cfg.max_units = 12;
    cfg.early_stop = true;
    cfg.early_stop_patience = 2;
    FwResult result = fw_train(train, valid, cfg);
    CHECK(result.model.atom_count() == result.report.selected_t);
    if (result.report.stopped_early) {
        CHECK(result.model.atom_count() < 12);
        // the selected snapshot has the smallest recorded gap
        double best_gap = std::numeric_limits<double>::infinity();
        int best_t = 0;
        for (const TrainRecord& rec : result.report.records) {
            if (rec.evaluated && rec.gap < best_gap) {
                best_gap = rec.gap;
                best_t = rec.t;
            }
        }
        CHECK(result.report.selected_t == best_t);
    }
}

TEST_CASE("atom stop halts growth once the inner optimum clears the tolerance") {
    WeightAtomMix target = testutil::random_mix(4, 2, 1.0, 61);
    BinaryDataset train = testutil::sample_exact(target, 200, 62);

    // A tolerance larger than any attainable improvement stops right after the
    // mandatory first atom: the starter placeholder must never be returned.
    FwConfig cfg = tiny_config();
    cfg.max_units = 8;
    cfg.atom_stop_tol = 100.0;
    FwResult one = fw_train(train, train, cfg);
    CHECK(one.model.atom_count() == 1);
    CHECK(one.report.selected_t == 1);
    CHECK(one.report.stopped_early);
    REQUIRE(one.report.records.size() == 1);
    CHECK(one.report.records[0].w_norm > 0.0);

    // On a warm start the same tolerance returns the start untouched.
    WeightAtomMix warm = testutil::random_mix(4, 3, 0.7, 63);
    FwResult kept = fw_train(train, train, cfg, warm);
    CHECK(model_digest(kept.model) == model_digest(warm));
    CHECK(kept.report.selected_t == 3);
    CHECK(kept.report.records.empty());

    // A moderate tolerance lands between one unit and the budget.
    cfg.atom_stop_tol = 1e-3;
    cfg.max_units = 16;
    FwResult mid = fw_train(train, train, cfg);
    CHECK(mid.report.stopped_early);
    CHECK(mid.model.atom_count() == mid.report.selected_t);
    CHECK(mid.model.atom_count() < 16);
    // every kept atom still cleared the tolerance when it was added
    for (std::size_t i = 1; i < mid.report.records.size(); ++i) {
        CHECK(mid.report.records[i].inner_value < -cfg.atom_stop_tol);
    }
}

TEST_CASE("warm start keeps its atoms and grows from there") {
    WeightAtomMix warm = testutil::random_mix(4, 2, 0.7, 26);
    BinaryDataset train = testutil::random_dataset(4, 50, 27, {0.7, 0.4, 0.3, 0.6});
    FwConfig cfg = tiny_config();
    cfg.max_units = 5;
    FwResult result = fw_train(train, train, cfg, warm);
    CHECK(result.model.atom_count() == 5);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 4; ++j) CHECK(result.model.atom(i).w[j] == warm.atom(i).w[j]);
    }

    WeightAtomMix fractional(4);
    Vec w = Vec::Constant(4, 0.2);
    fractional.add_atom(w, 0.5);
    CHECK_THROWS_AS(fw_train(train, train, cfg, fractional), NotStandardError);

    cfg.max_units = 2;  // already at the budget
    CHECK_THROWS_AS(fw_train(train, train, cfg, warm), std::invalid_argument);
}

TEST_CASE("gradient alpha mode adapts the total mass") {
    WeightAtomMix target = testutil::random_mix(3, 2, 1.0, 28);
    BinaryDataset train = testutil::sample_exact(target, 120, 29);
    FwConfig cfg = tiny_config();
    cfg.max_units = 3;
    cfg.alpha_mode = AlphaMode::Gradient;
    cfg.alpha_grad_steps = 5;
    FwResult result = fw_train(train, train, cfg);
    CHECK(result.model.atom_count() == 3);
    // masses stay uniform at alpha / t
    const double expected_mass = result.model.alpha() / 3.0;
    for (int i = 0; i < 3; ++i) {
        CHECK(result.model.atom(i).mass == doctest::Approx(expected_mass).epsilon(1e-12));
    }
    CHECK(result.model.alpha() != 3.0);  // moved off the count
}

TEST_CASE("report csv is stable and carries one row per iteration") {
    TrainReport report;
    TrainRecord rec;
    rec.t = 1;
    rec.inner_value = -0.5;
    rec.inner_grad_norm = 1e-6;
    rec.w_norm = 2.25;
    rec.train_avg_ull = -3.0;
    rec.valid_avg_ull = -3.5;
    rec.gap = 0.5;
    rec.seconds = 123.0;  // must not leak into the file
    rec.evaluated = true;
    report.records.push_back(rec);
    testutil::TempDir dir;
    const std::string path = dir.file("report.csv");
    write_report_csv(path, report);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "t,inner_obj,inner_grad_norm,w_norm,train_ull,valid_ull,gap,seconds");
    CHECK(row == "1,-0.5,9.9999999999999995e-07,2.25,-3,-3.5,0.5,0");
}
