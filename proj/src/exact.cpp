#include "frbm/exact.hpp"

#include <cmath>
#include <string>

#include "frbm/math.hpp"
#include "frbm/threads.hpp"

namespace frbm {
namespace {

void require_guard(int bits, int guard, const char* what) {
    if (bits > guard) {
        throw CapacityError(std::string(what) + ": 2^" + std::to_string(bits) +
                            " states exceeds the 2^" + std::to_string(guard) + " guard");
    }
}

// Log of the unnormalized visible marginal from precomputed activations:
// atom terms in ascending index order, bias added last.
double mix_energy(const std::vector<WeightAtom>& atoms, const std::vector<double>& act,
                  double bias_dot) {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) s += atoms[i].mass * softplus(act[i]);
    return s + bias_dot;
}

// Gray-order log-sum-exp of energy(act, bias_dot) over all 2^dim states,
// split into fixed contiguous blocks of Gray positions. Each block is summed
// serially and blocks merge in index order, so the result does not depend on
// the thread cap. energy(act, bias_dot) must be pure.
template <class Energy>
double blocked_gray_lse(int dim, const std::vector<const Vec*>& cols, const Vec* bias,
                        Energy&& energy) {
    const std::uint64_t total = std::uint64_t{1} << dim;
    const std::int64_t n_blocks = dim >= 16 ? 64 : 1;
    const std::uint64_t per_block = total / static_cast<std::uint64_t>(n_blocks);
    std::vector<LogSumExp> parts(static_cast<std::size_t>(n_blocks));
    parallel_blocks(n_blocks, [&](std::int64_t block) {
        const std::uint64_t begin = static_cast<std::uint64_t>(block) * per_block;
        const std::uint64_t end = begin + per_block;
        // State at Gray position p is p ^ (p >> 1); build its activations.
        std::uint64_t g = begin ^ (begin >> 1);
        Bits v(static_cast<std::size_t>(dim), 0);
        std::vector<double> act(cols.size(), 0.0);
        double bias_dot = 0.0;
        for (int j = 0; j < dim; ++j) {
            if ((g >> j) & 1u) {
                v[static_cast<std::size_t>(j)] = 1;
                for (std::size_t k = 0; k < cols.size(); ++k) act[k] += (*cols[k])[j];
                if (bias) bias_dot += (*bias)[j];
            }
        }
        LogSumExp acc;
        acc.add(energy(act, bias_dot));
        for (std::uint64_t p = begin + 1; p < end; ++p) {
            int j = std::countr_zero(p);
            double sign = v[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
            v[static_cast<std::size_t>(j)] ^= 1;
            for (std::size_t k = 0; k < cols.size(); ++k) act[k] += sign * (*cols[k])[j];
            if (bias) bias_dot += sign * (*bias)[j];
            acc.add(energy(act, bias_dot));
        }
        parts[static_cast<std::size_t>(block)] = acc;
    });
    LogSumExp out;
    for (const auto& p : parts) out.merge(p);
    return out.value();
}

std::vector<const Vec*> atom_cols(const WeightAtomMix& mix) {
    std::vector<const Vec*> cols;
    cols.reserve(static_cast<std::size_t>(mix.atom_count()));
    for (const auto& a : mix.atoms()) cols.push_back(&a.w);
    return cols;
}

}  // namespace

double exact_log_partition_visible(const WeightAtomMix& mix) {
    require_guard(mix.visible_dim(), kEnumGuardBits, "exact_log_partition_visible");
    const auto& atoms = mix.atoms();
    const Vec& bias = mix.bias();
    return blocked_gray_lse(mix.visible_dim(), atom_cols(mix), &bias,
                            [&](const std::vector<double>& act, double bias_dot) {
                                return mix_energy(atoms, act, bias_dot);
                            });
}

double exact_log_partition_hidden(const WeightAtomMix& mix) {
    if (!mix.is_standard()) {
        throw NotStandardError("exact_log_partition_hidden: mix is not standard");
    }
    require_guard(mix.atom_count(), kEnumGuardBits, "exact_log_partition_hidden");
    const RbmModel model = to_standard_rbm(mix);
    const int n_visible = model.visible_dim();
    // Sum over h of prod_j (1 + exp(row_j·h + b_j)): track row_j·h per j.
    std::vector<Vec> rows(static_cast<std::size_t>(n_visible));
    std::vector<const Vec*> cols(static_cast<std::size_t>(n_visible));
    for (int j = 0; j < n_visible; ++j) {
        rows[static_cast<std::size_t>(j)] = model.weights.row(j).transpose();
        cols[static_cast<std::size_t>(j)] = &rows[static_cast<std::size_t>(j)];
    }
    const Vec& b = model.bias;
    return blocked_gray_lse(mix.atom_count(), cols, nullptr,
                            [&](const std::vector<double>& act, double) {
                                double s = 0.0;
                                for (int j = 0; j < n_visible; ++j) {
                                    s += softplus(act[static_cast<std::size_t>(j)] + b[j]);
                                }
                                return s;
                            });
}

double exact_log_partition(const WeightAtomMix& mix) {
    const bool visible_ok = mix.visible_dim() <= kEnumGuardBits;
    const bool hidden_ok = mix.is_standard() && mix.atom_count() <= kEnumGuardBits;
    if (hidden_ok && (!visible_ok || mix.atom_count() < mix.visible_dim())) {
        return exact_log_partition_hidden(mix);
    }
    require_guard(mix.visible_dim(), kEnumGuardBits, "exact_log_partition");
    return exact_log_partition_visible(mix);
}

double exact_log_partition(const RbmModel& model) {
    return exact_log_partition(from_standard_rbm(model));
}

Vec exact_visible_distribution(const WeightAtomMix& mix) {
    require_guard(mix.visible_dim(), kDistributionGuardBits, "exact_visible_distribution");
    const std::uint64_t total = std::uint64_t{1} << mix.visible_dim();
    Vec energy(static_cast<Eigen::Index>(total));
    const auto& atoms = mix.atoms();
    std::uint64_t state = 0;
    for_each_state_gray(mix.visible_dim(), atom_cols(mix), &mix.bias(),
                        [&](const Bits& v, const std::vector<double>& act, double bias_dot) {
                            state = 0;
                            for (std::size_t j = 0; j < v.size(); ++j) {
                                if (v[j]) state |= std::uint64_t{1} << j;
                            }
                            energy[static_cast<Eigen::Index>(state)] = mix_energy(atoms, act, bias_dot);
                        });
    LogSumExp lse;
    for (Eigen::Index s = 0; s < energy.size(); ++s) lse.add(energy[s]);
    const double log_z = lse.value();
    Vec p(energy.size());
    for (Eigen::Index s = 0; s < energy.size(); ++s) p[s] = std::exp(energy[s] - log_z);
    return p;
}

Vec exact_visible_distribution(const RbmModel& model) {
    return exact_visible_distribution(from_standard_rbm(model));
}

LoglikGradient exact_loglik_gradient(const RbmModel& model, const BinaryDataset& data) {
    if (data.dim() != model.visible_dim()) {
        throw DimensionError("exact_loglik_gradient: data dimension mismatch");
    }
    if (data.size() < 1) throw std::invalid_argument("exact_loglik_gradient: empty dataset");
    require_guard(model.visible_dim(), kEnumGuardBits, "exact_loglik_gradient");

    const int n_visible = model.visible_dim();
    const int n_hidden = model.hidden_dim();
    Mat pos_w = Mat::Zero(n_visible, n_hidden);
    Vec pos_b = Vec::Zero(n_visible);
    for (std::int64_t r = 0; r < data.size(); ++r) {
        const Bits v = data.vectors().row_bits(r);
        const Vec mu = hidden_conditional(model, v);
        for (int j = 0; j < n_visible; ++j) {
            if (v[static_cast<std::size_t>(j)]) {
                pos_w.row(j) += mu.transpose();
                pos_b[j] += 1.0;
            }
        }
    }
    pos_w /= static_cast<double>(data.size());
    pos_b /= static_cast<double>(data.size());

    const WeightAtomMix mix = from_standard_rbm(model);
    const double log_z = exact_log_partition_visible(mix);
    Mat neg_w = Mat::Zero(n_visible, n_hidden);
    Vec neg_b = Vec::Zero(n_visible);
    const auto& atoms = mix.atoms();
    for_each_state_gray(n_visible, atom_cols(mix), &mix.bias(),
                        [&](const Bits& v, const std::vector<double>& act, double bias_dot) {
                            const double p = std::exp(mix_energy(atoms, act, bias_dot) - log_z);
                            for (int j = 0; j < n_visible; ++j) {
                                if (!v[static_cast<std::size_t>(j)]) continue;
                                for (int i = 0; i < n_hidden; ++i) {
                                    neg_w(j, i) += p * sigmoid(act[static_cast<std::size_t>(i)]);
                                }
                                neg_b[j] += p;
                            }
                        });
    return {pos_w - neg_w, pos_b - neg_b};
}

Vec exact_visible_mean(const WeightAtomMix& mix) {
    require_guard(mix.visible_dim(), kEnumGuardBits, "exact_visible_mean");
    const double log_z = exact_log_partition_visible(mix);
    Vec mean = Vec::Zero(mix.visible_dim());
    const auto& atoms = mix.atoms();
    for_each_state_gray(mix.visible_dim(), atom_cols(mix), &mix.bias(),
                        [&](const Bits& v, const std::vector<double>& act, double bias_dot) {
                            const double p = std::exp(mix_energy(atoms, act, bias_dot) - log_z);
                            for (std::size_t j = 0; j < v.size(); ++j) {
                                if (v[j]) mean[static_cast<Eigen::Index>(j)] += p;
                            }
                        });
    return mean;
}

double exact_avg_loglik(const WeightAtomMix& mix, const BinaryDataset& data) {
    if (data.dim() != mix.visible_dim()) {
        throw DimensionError("exact_avg_loglik: data dimension mismatch");
    }
    if (data.size() < 1) throw std::invalid_argument("exact_avg_loglik: empty dataset");
    const double log_z = exact_log_partition(mix);
    double s = 0.0;
    for (std::int64_t r = 0; r < data.size(); ++r) {
        s += unnormalized_log_prob(mix, data.vectors().row_bits(r));
    }
    return s / static_cast<double>(data.size()) - log_z;
}

double exact_avg_loglik(const RbmModel& model, const BinaryDataset& data) {
    return exact_avg_loglik(from_standard_rbm(model), data);
}

}  // namespace frbm
