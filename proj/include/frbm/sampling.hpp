#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "frbm/dataset.hpp"
#include "frbm/model.hpp"
#include "frbm/rng.hpp"

namespace frbm {

/// One Markov chain with replayable randomness: the k-th kernel application
/// always uses rng step k, and draws inside a step are indexed hidden units
/// first, then visible units, then (for MH) the accept threshold. Two chains
/// with the same (seed, stream) history are bit-identical regardless of what
/// other chains ran beside them.
struct ChainState {
    Bits v;
    std::optional<Bits> h;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;
    std::int64_t steps_taken = 0;
    std::int64_t accepted = 0;
};

/// Fresh chain with v drawn uniformly at rng step 0.
ChainState make_chain(int dim, std::uint64_t seed, std::uint32_t stream);

/// One block Gibbs sweep: h ~ p(h|v), then v ~ p(v|h).
void gibbs_step(const RbmModel& model, ChainState& state);

/// Log Metropolis-Hastings ratio for moving from `from` to `to` when the
/// proposal draws from the proposal machine's conditionals: target difference
/// under the mix minus the same difference under the proposal. Normalization
/// constants cancel. Exactly zero when the proposal equals the target.
double mh_log_acceptance(const WeightAtomMix& mix, const RbmModel& proposal, const Bits& from,
                         const Bits& to);

/// One proposal step from the proposal machine plus accept/reject against the
/// fractional target. Returns whether the proposal was accepted; the chain's
/// step counter advances either way.
bool mh_fractional_step(const WeightAtomMix& mix, const RbmModel& proposal, ChainState& state);

/// Drawn samples plus the provenance needed to detect stale reuse.
struct SampleBuffer {
    PackedBitMatrix samples;
    std::uint64_t model_digest = 0;
    std::int64_t burn_in = 0;
    std::int64_t thinning = 1;
};

/// Runs n_chains Gibbs chains, discards burn_in sweeps, then records one
/// sample every `thinning` sweeps, assigning sample s to chain s % n_chains.
/// Output is a fixed function of (model, arguments), not of the thread cap.
SampleBuffer run_chain(const RbmModel& model, std::int64_t n, std::int64_t burn_in,
                       std::int64_t thinning, std::uint64_t seed, int n_chains = 1);

/// Long-lived chain pool that follows a model as it changes. Standard mixes
/// get the Gibbs kernel, fractional mixes the MH kernel with the expanded
/// proposal machine, and an atomless mix degenerates to independent draws
/// from the bias distribution.
class PersistentSampler {
public:
    PersistentSampler(const WeightAtomMix& mix, int n_chains, std::uint64_t seed,
                      std::int64_t burn_in, std::int64_t thinning);

    const WeightAtomMix& model() const { return mix_; }

    /// Swaps in a new model. With reburn, every chain advances burn_in steps
    /// under the new kernel; without, chains continue from where they are
    /// (cheap bias nudges between draws).
    void set_model(const WeightAtomMix& mix, bool reburn = true);

    /// n samples, round-robin over chains with `thinning` steps per sample.
    SampleBuffer draw(std::int64_t n);

    /// Mean of n fresh samples.
    Vec draw_mean(std::int64_t n);

    const std::vector<ChainState>& chains() const { return chains_; }
    std::int64_t burn_in() const { return burn_in_; }
    std::int64_t thinning() const { return thinning_; }

private:
    void rebuild_kernel();
    void advance(ChainState& chain, std::int64_t steps) const;
    void burn_all();

    WeightAtomMix mix_;
    std::optional<RbmModel> gibbs_model_;
    std::optional<RbmModel> proposal_;
    std::vector<ChainState> chains_;
    std::uint64_t seed_;
    std::int64_t burn_in_;
    std::int64_t thinning_;
};

}  // namespace frbm
