#include "frbm/model.hpp"

#include <cmath>

#include "frbm/math.hpp"

namespace frbm {
namespace {

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

void require_dim(const Vec& v, int dim, const char* what) {
    if (v.size() != dim) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(dim) +
                             ", got " + std::to_string(v.size()));
    }
}

void require_bits(const Bits& v, int dim, const char* what) {
    if (static_cast<int>(v.size()) != dim) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(dim) +
                             " bits, got " + std::to_string(v.size()));
    }
}

}  // namespace

WeightAtomMix::WeightAtomMix(int visible_dim) : WeightAtomMix(visible_dim, Vec::Zero(visible_dim), 1.0) {}

WeightAtomMix::WeightAtomMix(int visible_dim, Vec bias, double alpha) : visible_dim_(visible_dim) {
    if (visible_dim < 1) throw DimensionError("WeightAtomMix: visible_dim must be positive");
    require_dim(bias, visible_dim, "WeightAtomMix bias");
    require_finite(bias, "WeightAtomMix bias");
    bias_ = std::move(bias);
    alpha_ = 1.0;
    set_alpha(alpha);
}

void WeightAtomMix::set_bias(const Vec& b) {
    require_dim(b, visible_dim_, "WeightAtomMix bias");
    require_finite(b, "WeightAtomMix bias");
    bias_ = b;
}

void WeightAtomMix::set_alpha(double a) {
    if (!(std::isfinite(a) && a > 0.0)) {
        throw std::invalid_argument("WeightAtomMix: alpha must be finite and positive");
    }
    alpha_ = a;
}

void WeightAtomMix::add_atom(const Vec& w, double mass) {
    require_dim(w, visible_dim_, "WeightAtomMix atom");
    require_finite(w, "WeightAtomMix atom");
    if (!(std::isfinite(mass) && mass > 0.0)) {
        throw std::invalid_argument("WeightAtomMix: atom mass must be finite and positive");
    }
    atoms_.push_back({w, mass});
}

void WeightAtomMix::set_mass(int i, double mass) {
    if (!(std::isfinite(mass) && mass > 0.0)) {
        throw std::invalid_argument("WeightAtomMix: atom mass must be finite and positive");
    }
    atoms_.at(static_cast<std::size_t>(i)).mass = mass;
}

void WeightAtomMix::scale_masses(double factor) {
    if (!(std::isfinite(factor) && factor > 0.0)) {
        throw std::invalid_argument("WeightAtomMix: mass scale must be finite and positive");
    }
    for (auto& a : atoms_) a.mass *= factor;
}

bool WeightAtomMix::is_standard() const {
    if (atoms_.empty()) return false;
    for (const auto& a : atoms_) {
        if (a.mass != 1.0) return false;
    }
    return alpha_ == static_cast<double>(atoms_.size());
}

RbmModel::RbmModel(Mat w, Vec b) : weights(std::move(w)), bias(std::move(b)) {
    if (weights.rows() < 1 || weights.cols() < 1) {
        throw DimensionError("RbmModel: weights must be |v| x |h| with both positive");
    }
    if (bias.size() != weights.rows()) {
        throw DimensionError("RbmModel: bias length must match weight rows");
    }
    if (!weights.allFinite()) throw std::invalid_argument("RbmModel: non-finite weights");
    if (!bias.allFinite()) throw std::invalid_argument("RbmModel: non-finite bias");
}

RbmModel to_standard_rbm(const WeightAtomMix& mix) {
    if (!mix.is_standard()) {
        throw NotStandardError("to_standard_rbm: mix has fractional masses or alpha != atom count");
    }
    Mat w(mix.visible_dim(), mix.atom_count());
    for (int i = 0; i < mix.atom_count(); ++i) w.col(i) = mix.atom(i).w;
    return RbmModel(std::move(w), mix.bias());
}

WeightAtomMix from_standard_rbm(const RbmModel& model) {
    WeightAtomMix mix(model.visible_dim(), model.bias, static_cast<double>(model.hidden_dim()));
    for (int i = 0; i < model.hidden_dim(); ++i) mix.add_atom(model.weights.col(i), 1.0);
    return mix;
}

RbmModel fractional_proposal_rbm(const WeightAtomMix& mix) {
    if (mix.atom_count() == 0) {
        throw std::invalid_argument("fractional_proposal_rbm: mix has no atoms");
    }
    constexpr std::int64_t kColumnGuard = 1 << 20;
    std::int64_t columns = 0;
    for (const auto& a : mix.atoms()) {
        columns += static_cast<std::int64_t>(std::floor(a.mass));
        if (a.mass != std::floor(a.mass)) ++columns;
        if (columns > kColumnGuard) {
            throw CapacityError("fractional_proposal_rbm: expansion exceeds column guard");
        }
    }
    Mat w(mix.visible_dim(), columns);
    std::int64_t k = 0;
    for (const auto& a : mix.atoms()) {
        auto whole = static_cast<std::int64_t>(std::floor(a.mass));
        double frac = a.mass - std::floor(a.mass);
        for (std::int64_t c = 0; c < whole; ++c) w.col(k++) = a.w;
        if (frac > 0.0) w.col(k++) = frac * a.w;
    }
    return RbmModel(std::move(w), mix.bias());
}

double bits_dot(const Bits& v, const Vec& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j]) s += w[static_cast<Eigen::Index>(j)];
    }
    return s;
}

double unnormalized_log_prob(const WeightAtomMix& mix, const Bits& v) {
    require_bits(v, mix.visible_dim(), "unnormalized_log_prob");
    double s = 0.0;
    for (const auto& a : mix.atoms()) s += a.mass * softplus(bits_dot(v, a.w));
    return s + bits_dot(v, mix.bias());
}

double unnormalized_log_prob(const RbmModel& model, const Bits& v) {
    require_bits(v, model.visible_dim(), "unnormalized_log_prob");
    double s = 0.0;
    for (int i = 0; i < model.hidden_dim(); ++i) s += softplus(bits_dot(v, model.weights.col(i)));
    return s + bits_dot(v, model.bias);
}

Vec hidden_conditional(const RbmModel& model, const Bits& v) {
    require_bits(v, model.visible_dim(), "hidden_conditional");
    Vec p(model.hidden_dim());
    for (int i = 0; i < model.hidden_dim(); ++i) p[i] = sigmoid(bits_dot(v, model.weights.col(i)));
    return p;
}

Vec hidden_conditional(const WeightAtomMix& mix, const Bits& v) {
    if (!mix.is_standard()) throw NotStandardError("hidden_conditional: mix is not standard");
    require_bits(v, mix.visible_dim(), "hidden_conditional");
    Vec p(mix.atom_count());
    for (int i = 0; i < mix.atom_count(); ++i) p[i] = sigmoid(bits_dot(v, mix.atom(i).w));
    return p;
}

Vec visible_conditional(const RbmModel& model, const Bits& h) {
    require_bits(h, model.hidden_dim(), "visible_conditional");
    Vec p(model.visible_dim());
    for (int j = 0; j < model.visible_dim(); ++j) {
        double t = model.bias[j];
        for (int i = 0; i < model.hidden_dim(); ++i) {
            if (h[static_cast<std::size_t>(i)]) t += model.weights(j, i);
        }
        p[j] = sigmoid(t);
    }
    return p;
}

Vec visible_conditional(const WeightAtomMix& mix, const Bits& h) {
    if (!mix.is_standard()) throw NotStandardError("visible_conditional: mix is not standard");
    return visible_conditional(to_standard_rbm(mix), h);
}

}  // namespace frbm
