#pragma once
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>
#include <solar/error.hpp>
#include <solar/reflection_group.hpp>
#include <solar/solar_base.hpp>

namespace solar {

enum class FamilyKind { gaussian, bernoulli, poisson, spherical_power };

/// Largest group a generator is known to be invariant under.
enum class InvarianceTag { permutation, orthogonal };

/**
 * Generator phi of an expofam-type estimator argmin phi(theta) - <x, theta> + h_C(theta),
 * together with grad phi and the conjugate-gradient map grad phi* = (grad phi)^{-1}.
 *
 *   gaussian         phi = 1/2 ||theta||^2           mean domain R^n
 *   bernoulli        phi = sum log(1 + e^theta_j)     mean domain (0, 1)^n
 *   poisson          phi = sum e^theta_j              mean domain (0, inf)^n
 *   spherical-power  phi = ||theta||^4 / 4            mean domain R^n
 */
class GeneratorFamily
{
public:
    explicit GeneratorFamily(FamilyKind kind) : kind_(kind) {}

    static GeneratorFamily from_name(std::string_view name)
    {
        if (name == "gaussian") return GeneratorFamily(FamilyKind::gaussian);
        if (name == "bernoulli") return GeneratorFamily(FamilyKind::bernoulli);
        if (name == "poisson") return GeneratorFamily(FamilyKind::poisson);
        if (name == "spherical-power") return GeneratorFamily(FamilyKind::spherical_power);
        throw Error("unknown generator family '" + std::string(name) + "'");
    }

    FamilyKind kind() const noexcept { return kind_; }

    std::string_view name() const noexcept
    {
        switch (kind_) {
            case FamilyKind::gaussian: return "gaussian";
            case FamilyKind::bernoulli: return "bernoulli";
            case FamilyKind::poisson: return "poisson";
            case FamilyKind::spherical_power: return "spherical-power";
        }
        return "?";
    }

    InvarianceTag invariance() const noexcept
    {
        return (kind_ == FamilyKind::bernoulli || kind_ == FamilyKind::poisson) ? InvarianceTag::permutation
                                                                                 : InvarianceTag::orthogonal;
    }

    double value(const Eigen::Ref<const Vector>& theta) const
    {
        switch (kind_) {
            case FamilyKind::gaussian: return 0.5 * theta.squaredNorm();
            case FamilyKind::bernoulli: {
                double s = 0.0;
                for (Index i = 0; i < theta.size(); ++i) s += softplus(theta[i]);
                return s;
            }
            case FamilyKind::poisson: return theta.array().exp().sum();
            case FamilyKind::spherical_power: {
                const double q = theta.squaredNorm();
                return 0.25 * q * q;
            }
        }
        return 0.0;
    }

    Vector grad(const Eigen::Ref<const Vector>& theta) const
    {
        switch (kind_) {
            case FamilyKind::gaussian: return theta;
            case FamilyKind::bernoulli: {
                Vector g(theta.size());
                for (Index i = 0; i < theta.size(); ++i) g[i] = sigmoid(theta[i]);
                return g;
            }
            case FamilyKind::poisson: return theta.array().exp().matrix();
            case FamilyKind::spherical_power: return theta.squaredNorm() * theta;
        }
        return theta;
    }

    /// Coordinates of u outside the open mean domain (empty for the unbounded families).
    std::vector<long> boundary_coordinates(const Eigen::Ref<const Vector>& u) const
    {
        std::vector<long> bad;
        for (Index i = 0; i < u.size(); ++i) {
            const double v = u[i];
            bool ok = std::isfinite(v);
            if (kind_ == FamilyKind::bernoulli) ok = ok && v > 0.0 && v < 1.0;
            if (kind_ == FamilyKind::poisson) ok = ok && v > 0.0;
            if (!ok) bad.push_back(static_cast<long>(i));
        }
        return bad;
    }

    /// grad phi*(u); throws BoundarySolution outside the open mean domain.
    Vector conj_grad(const Eigen::Ref<const Vector>& u) const
    {
        if (auto bad = boundary_coordinates(u); !bad.empty()) {
            std::string msg = std::string(name()) + ": dual fit outside the open mean domain at coordinate(s)";
            for (long i : bad) msg += " " + std::to_string(i + 1);
            throw BoundarySolution(std::move(bad), msg);
        }
        switch (kind_) {
            case FamilyKind::gaussian: return u;
            case FamilyKind::bernoulli: return (u.array() / (1.0 - u.array())).log().matrix();
            case FamilyKind::poisson: return u.array().log().matrix();
            case FamilyKind::spherical_power: {
                const double nrm = u.norm();
                if (nrm == 0.0) return Vector::Zero(u.size());
                return u * std::pow(nrm, -2.0 / 3.0);
            }
        }
        return u;
    }

private:
    static double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
    static double sigmoid(double t)
    {
        if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
        const double e = std::exp(t);
        return e / (1.0 + e);
    }

    FamilyKind kind_;
};

/// T(x) = grad phi*(U(x)).
inline Vector reduce(const GeneratorFamily& family, const Eigen::Ref<const Vector>& u)
{
    return family.conj_grad(u);
}

namespace detail {

/// Random group element: uniform over an enumerated or full product group, a
/// random word in the generating reflections otherwise.
inline Matrix sample_element(const GroupReport& rep, std::mt19937_64& rng)
{
    if (rep.is_finite() && !rep.elements.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, rep.elements.size() - 1);
        return rep.elements[pick(rng)];
    }
    Matrix g = Matrix::Zero(rep.dim, rep.dim);
    if (rep.is_finite() && rep.full_product) {
        std::vector<bool> flips(static_cast<std::size_t>(rep.dim), false);
        for (Index i : rep.flipped) flips[static_cast<std::size_t>(i)] = true;
        std::bernoulli_distribution coin(0.5);
        for (const auto& comp : rep.components) {
            auto image = comp;
            std::shuffle(image.begin(), image.end(), rng);
            for (std::size_t t = 0; t < comp.size(); ++t) {
                const bool neg = flips[static_cast<std::size_t>(comp[t])] && coin(rng);
                g(image[t], comp[t]) = neg ? -1.0 : 1.0;
            }
        }
        return g;
    }
    g.setIdentity();
    if (rep.generators.empty()) return g;
    std::uniform_int_distribution<std::size_t> pick(0, rep.generators.size() - 1);
    std::uniform_int_distribution<int> len(1, 12);
    for (int k = len(rng); k > 0; --k) {
        const Vector& r = rep.generators[pick(rng)];
        g.noalias() -= 2.0 * r * (r.transpose() * g);
    }
    return g;
}

} // namespace detail

/**
 * Whether the family's generator is invariant under the group, so that the
 * least-squares reduction applies.
 *
 * The invariance tag must cover the classification: orthogonal covers every
 * group (including the orthogonal fallback for infinite groups); permutation
 * covers trivial and permutation groups only. A sampled check of
 * |phi(g theta) - phi(theta)| is run as well.
 */
inline bool check_invariance(const GeneratorFamily& family, const GroupReport& rep, std::size_t samples = 100,
                             unsigned long long seed = 7)
{
    bool covered = false;
    if (family.invariance() == InvarianceTag::orthogonal) {
        covered = true;
    } else {
        covered = rep.is_finite()
               && (rep.classification == GroupClass::permutation || rep.classification == GroupClass::trivial);
    }
    if (!covered) return false;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
        Vector theta(rep.dim);
        for (Index i = 0; i < rep.dim; ++i) theta[i] = nd(rng);
        const Matrix g = detail::sample_element(rep, rng);
        const double a = family.value(theta);
        const double b = family.value(g * theta);
        if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) return false;
    }
    return true;
}

} // namespace solar
