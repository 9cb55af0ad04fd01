#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "frbm/errors.hpp"

namespace frbm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Binary vector stored one unit per byte; entries are 0 or 1.
using Bits = std::vector<std::uint8_t>;

struct WeightAtom {
    Vec w;
    double mass;
};

/// Discrete weight measure over hidden-unit weight vectors, plus visible bias
/// and total hidden mass alpha. Each atom's `mass` is the effective
/// coefficient of its softplus term, so a standard |h|-unit machine is the
/// special case of |h| atoms with unit mass and alpha == |h|.
class WeightAtomMix {
public:
    explicit WeightAtomMix(int visible_dim);
    WeightAtomMix(int visible_dim, Vec bias, double alpha);

    int visible_dim() const { return visible_dim_; }
    int atom_count() const { return static_cast<int>(atoms_.size()); }
    const std::vector<WeightAtom>& atoms() const { return atoms_; }
    const WeightAtom& atom(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }

    const Vec& bias() const { return bias_; }
    void set_bias(const Vec& b);

    double alpha() const { return alpha_; }
    void set_alpha(double a);

    void add_atom(const Vec& w, double mass);
    void set_mass(int i, double mass);
    void scale_masses(double factor);
    void clear_atoms() { atoms_.clear(); }

    /// True when the mix encodes an ordinary machine: at least one atom and
    /// every mass exactly 1 and alpha exactly the atom count.
    bool is_standard() const;

private:
    int visible_dim_;
    std::vector<WeightAtom> atoms_;
    Vec bias_;
    double alpha_;
};

/// Dense machine with weights |v| x |h| (one column per hidden unit) and
/// visible bias. All entries finite.
struct RbmModel {
    RbmModel(Mat weights, Vec bias);

    int visible_dim() const { return static_cast<int>(weights.rows()); }
    int hidden_dim() const { return static_cast<int>(weights.cols()); }

    Mat weights;
    Vec bias;
};

/// Exact round trips between the two representations.
RbmModel to_standard_rbm(const WeightAtomMix& mix);
WeightAtomMix from_standard_rbm(const RbmModel& model);

/// Proposal machine for a fractional mix: an atom with mass c contributes
/// floor(c) copies of its weight vector plus, when frac(c) > 0, one column
/// scaled by frac(c). Masses of exactly 1 reproduce the atom verbatim, so a
/// standard mix converts to its own standard machine.
RbmModel fractional_proposal_rbm(const WeightAtomMix& mix);

/// w·v over the set bits of v, accumulated in ascending index order.
double bits_dot(const Bits& v, const Vec& w);

/// sum_i mass_i * softplus(w_i·v) + bias·v, atom terms in ascending index
/// order, bias added last. Log of the unnormalized marginal at v.
double unnormalized_log_prob(const WeightAtomMix& mix, const Bits& v);

/// sum_i softplus(col_i·v) + bias·v for a dense machine.
double unnormalized_log_prob(const RbmModel& model, const Bits& v);

/// Per-hidden-unit activation probabilities sigma(col_i·v).
Vec hidden_conditional(const RbmModel& model, const Bits& v);
Vec hidden_conditional(const WeightAtomMix& mix, const Bits& v);  // standard only

/// Per-visible-unit activation probabilities sigma(W h + b).
Vec visible_conditional(const RbmModel& model, const Bits& h);
Vec visible_conditional(const WeightAtomMix& mix, const Bits& h);  // standard only

}  // namespace frbm
