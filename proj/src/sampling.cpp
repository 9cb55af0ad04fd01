#include "frbm/sampling.hpp"

#include <cmath>

#include "frbm/io.hpp"
#include "frbm/math.hpp"
#include "frbm/threads.hpp"

namespace frbm {
namespace {

void require_chain_dim(const ChainState& state, int dim, const char* what) {
    if (static_cast<int>(state.v.size()) != dim) {
        throw DimensionError(std::string(what) + ": chain dimension mismatch");
    }
}

Bits draw_bits(RngStream& rng, const Vec& p) {
    Bits out(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        out[static_cast<std::size_t>(i)] = rng.uniform() < p[i] ? 1 : 0;
    }
    return out;
}

// Samples drawn round-robin: sample s comes from chain s % C. Each chain's
// workload is known up front, so chains can run on any number of threads and
// the interleaved result is unchanged.
template <class Advance>
PackedBitMatrix round_robin(std::vector<ChainState>& chains, int dim, std::int64_t n,
                            std::int64_t thinning, Advance&& advance) {
    const auto n_chains = static_cast<std::int64_t>(chains.size());
    std::vector<PackedBitMatrix> per_chain(chains.size(), PackedBitMatrix(dim));
    parallel_blocks(n_chains, [&](std::int64_t c) {
        ChainState& chain = chains[static_cast<std::size_t>(c)];
        const std::int64_t quota = c < n ? (n - 1 - c) / n_chains + 1 : 0;
        per_chain[static_cast<std::size_t>(c)].reserve_rows(quota);
        for (std::int64_t k = 0; k < quota; ++k) {
            advance(chain, thinning);
            per_chain[static_cast<std::size_t>(c)].append_bits(chain.v);
        }
    });
    PackedBitMatrix out(dim);
    out.reserve_rows(n);
    for (std::int64_t s = 0; s < n; ++s) {
        const auto c = static_cast<std::size_t>(s % n_chains);
        const std::int64_t k = s / n_chains;
        out.append_packed(per_chain[c].bytes().data() + k * per_chain[c].stride());
    }
    return out;
}

}  // namespace

ChainState make_chain(int dim, std::uint64_t seed, std::uint32_t stream) {
    if (dim < 1) throw DimensionError("make_chain: dim must be positive");
    ChainState state;
    state.seed = seed;
    state.stream = stream;
    RngStream rng(seed, stream, 0);
    state.v.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) state.v[static_cast<std::size_t>(j)] = rng.uniform() < 0.5 ? 1 : 0;
    state.steps_taken = 1;
    return state;
}

void gibbs_step(const RbmModel& model, ChainState& state) {
    require_chain_dim(state, model.visible_dim(), "gibbs_step");
    RngStream rng(state.seed, state.stream, static_cast<std::uint64_t>(state.steps_taken));
    const Bits h = draw_bits(rng, hidden_conditional(model, state.v));
    state.v = draw_bits(rng, visible_conditional(model, h));
    state.h = h;
    ++state.steps_taken;
}

double mh_log_acceptance(const WeightAtomMix& mix, const RbmModel& proposal, const Bits& from,
                         const Bits& to) {
    if (proposal.visible_dim() != mix.visible_dim()) {
        throw DimensionError("mh_log_acceptance: proposal dimension mismatch");
    }
    const double target_diff = unnormalized_log_prob(mix, to) - unnormalized_log_prob(mix, from);
    const double proposal_diff =
        unnormalized_log_prob(proposal, to) - unnormalized_log_prob(proposal, from);
    return target_diff - proposal_diff;
}

bool mh_fractional_step(const WeightAtomMix& mix, const RbmModel& proposal, ChainState& state) {
    require_chain_dim(state, mix.visible_dim(), "mh_fractional_step");
    RngStream rng(state.seed, state.stream, static_cast<std::uint64_t>(state.steps_taken));
    const Bits h = draw_bits(rng, hidden_conditional(proposal, state.v));
    const Bits v_new = draw_bits(rng, visible_conditional(proposal, h));
    const double u = rng.uniform();
    const double log_a = mh_log_acceptance(mix, proposal, state.v, v_new);
    const bool accept = log_a >= 0.0 || u < std::exp(log_a);
    if (accept) {
        state.v = v_new;
        state.h = h;
        ++state.accepted;
    }
    ++state.steps_taken;
    return accept;
}

SampleBuffer run_chain(const RbmModel& model, std::int64_t n, std::int64_t burn_in,
                       std::int64_t thinning, std::uint64_t seed, int n_chains) {
    if (n < 0) throw std::invalid_argument("run_chain: n must be non-negative");
    if (burn_in < 0) throw std::invalid_argument("run_chain: burn_in must be non-negative");
    if (thinning < 1) throw std::invalid_argument("run_chain: thinning must be positive");
    if (n_chains < 1) throw std::invalid_argument("run_chain: n_chains must be positive");

    std::vector<ChainState> chains;
    chains.reserve(static_cast<std::size_t>(n_chains));
    for (int c = 0; c < n_chains; ++c) {
        chains.push_back(make_chain(model.visible_dim(), seed, kStreamChainBase + static_cast<std::uint32_t>(c)));
    }
    parallel_blocks(n_chains, [&](std::int64_t c) {
        ChainState& chain = chains[static_cast<std::size_t>(c)];
        for (std::int64_t k = 0; k < burn_in; ++k) gibbs_step(model, chain);
    });
    SampleBuffer buffer;
    buffer.samples = round_robin(chains, model.visible_dim(), n, thinning,
                                 [&](ChainState& chain, std::int64_t steps) {
                                     for (std::int64_t k = 0; k < steps; ++k) gibbs_step(model, chain);
                                 });
    buffer.model_digest = model_digest(model);
    buffer.burn_in = burn_in;
    buffer.thinning = thinning;
    return buffer;
}

PersistentSampler::PersistentSampler(const WeightAtomMix& mix, int n_chains, std::uint64_t seed,
                                     std::int64_t burn_in, std::int64_t thinning)
    : mix_(mix), seed_(seed), burn_in_(burn_in), thinning_(thinning) {
    if (n_chains < 1) throw std::invalid_argument("PersistentSampler: n_chains must be positive");
    if (burn_in < 0) throw std::invalid_argument("PersistentSampler: burn_in must be non-negative");
    if (thinning < 1) throw std::invalid_argument("PersistentSampler: thinning must be positive");
    rebuild_kernel();
    chains_.reserve(static_cast<std::size_t>(n_chains));
    for (int c = 0; c < n_chains; ++c) {
        chains_.push_back(make_chain(mix_.visible_dim(), seed, kStreamChainBase + static_cast<std::uint32_t>(c)));
    }
    burn_all();
}

void PersistentSampler::rebuild_kernel() {
    gibbs_model_.reset();
    proposal_.reset();
    if (mix_.is_standard()) {
        gibbs_model_ = to_standard_rbm(mix_);
    } else if (mix_.atom_count() > 0) {
        proposal_ = fractional_proposal_rbm(mix_);
    }
}

void PersistentSampler::advance(ChainState& chain, std::int64_t steps) const {
    for (std::int64_t k = 0; k < steps; ++k) {
        if (gibbs_model_) {
            gibbs_step(*gibbs_model_, chain);
        } else if (proposal_) {
            mh_fractional_step(mix_, *proposal_, chain);
        } else {
            // No atoms: visible units are independent given the bias.
            RngStream rng(chain.seed, chain.stream, static_cast<std::uint64_t>(chain.steps_taken));
            for (int j = 0; j < mix_.visible_dim(); ++j) {
                chain.v[static_cast<std::size_t>(j)] = rng.uniform() < sigmoid(mix_.bias()[j]) ? 1 : 0;
            }
            ++chain.steps_taken;
        }
    }
}

void PersistentSampler::burn_all() {
    parallel_blocks(static_cast<std::int64_t>(chains_.size()),
                    [&](std::int64_t c) { advance(chains_[static_cast<std::size_t>(c)], burn_in_); });
}

void PersistentSampler::set_model(const WeightAtomMix& mix, bool reburn) {
    if (mix.visible_dim() != mix_.visible_dim()) {
        throw DimensionError("PersistentSampler::set_model: dimension mismatch");
    }
    mix_ = mix;
    rebuild_kernel();
    if (reburn) burn_all();
}

SampleBuffer PersistentSampler::draw(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("PersistentSampler::draw: n must be non-negative");
    SampleBuffer buffer;
    buffer.samples = round_robin(chains_, mix_.visible_dim(), n, thinning_,
                                 [&](ChainState& chain, std::int64_t steps) { advance(chain, steps); });
    buffer.model_digest = model_digest(mix_);
    buffer.burn_in = burn_in_;
    buffer.thinning = thinning_;
    return buffer;
}

Vec PersistentSampler::draw_mean(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("PersistentSampler::draw_mean: n must be positive");
    return draw(n).samples.mean();
}

}  // namespace frbm
