#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>
#include <solar/error.hpp>
#include <solar/solar_base.hpp>

namespace solar {

/// Reflection S_r x = x - 2 r <r, x> across the hyperplane orthogonal to r.
class Reflection
{
public:
    explicit Reflection(Vector normal) : normal_(std::move(normal))
    {
        const double nrm = normal_.norm();
        if (!(nrm > 0.0)) throw GroupError("Reflection: zero normal");
        normal_ /= nrm;
    }

    const Vector& normal() const noexcept { return normal_; }

    Matrix matrix() const
    {
        const Index n = normal_.size();
        return Matrix::Identity(n, n) - 2.0 * normal_ * normal_.transpose();
    }

private:
    Vector normal_;
};

inline Vector reflect(const Reflection& r, const Eigen::Ref<const Vector>& x)
{
    if (x.size() != r.normal().size()) throw DimensionMismatch("reflect", r.normal().size(), x.size());
    return x - 2.0 * r.normal().dot(x) * r.normal();
}

enum class GroupVerdict { finite, infinite, undetermined };

enum class GroupClass
{
    trivial,
    sign_change,
    permutation,
    signed_permutation,
    orthogonal_fallback,
    unknown_finite,
};

inline std::string_view to_string(GroupVerdict v)
{
    switch (v) {
        case GroupVerdict::finite: return "finite";
        case GroupVerdict::infinite: return "infinite";
        case GroupVerdict::undetermined: return "undetermined";
    }
    return "?";
}

inline std::string_view to_string(GroupClass c)
{
    switch (c) {
        case GroupClass::trivial: return "trivial";
        case GroupClass::sign_change: return "sign-change";
        case GroupClass::permutation: return "permutation";
        case GroupClass::signed_permutation: return "signed-permutation";
        case GroupClass::orthogonal_fallback: return "orthogonal-fallback";
        case GroupClass::unknown_finite: return "unknown-finite";
    }
    return "?";
}

/// Outcome of deciding whether an angle / pi is a rational number.
struct AngleRationality
{
    bool rational = false;
    long numerator = 0;
    long denominator = 1;
};

/**
 * Best rational approximation of q with denominator <= max_den by continued
 * fractions; q counts as rational when that approximation is within tol.
 */
inline AngleRationality detect_rational(double q, long max_den = 720, double tol = 1e-9)
{
    // convergents h/k of the continued fraction of q
    long h_prev = 1, h = static_cast<long>(std::floor(q));
    long k_prev = 0, k = 1;
    double frac = q - std::floor(q);
    AngleRationality best{std::abs(q - static_cast<double>(h)) <= tol, h, 1};
    while (!best.rational && frac > 1e-15) {
        const double inv = 1.0 / frac;
        const long a = static_cast<long>(std::floor(inv));
        frac = inv - static_cast<double>(a);
        const long h_next = a * h + h_prev;
        const long k_next = a * k + k_prev;
        if (k_next > max_den) break;
        h_prev = h; h = h_next;
        k_prev = k; k = k_next;
        best = {std::abs(q - static_cast<double>(h) / static_cast<double>(k)) <= tol, h, k};
    }
    return best;
}

/**
 * The reflection group G(B) generated by a solar base.
 *
 * Finite groups carry their full element list (orthogonal n x n matrices, the
 * identity first) unless they were identified structurally with an order above
 * the enumeration cap (see generate_group). `components` lists the coordinate
 * orbits of a signed-permutation group. `generators` holds the distinct
 * reflection normals so that every group, enumerated or not, can be sampled.
 *
 * `full_product` means the group is the direct product, over `components`, of
 * the symmetric group (unflipped component) or the hyperoctahedral group
 * (component inside `flipped`). Majorization then has a closed form.
 */
struct GroupReport
{
    GroupVerdict verdict = GroupVerdict::undetermined;
    GroupClass classification = GroupClass::orthogonal_fallback;
    std::size_t order = 0;            // saturates when order_overflow is set
    bool order_overflow = false;
    double log10_order = 0.0;
    Index dim = 0;
    std::vector<Matrix> elements;
    std::vector<Vector> generators;
    Matrix inner_products;  // <r_i, r_j>
    Matrix angle_ratio;     // arccos(<r_i, r_j>) / pi
    std::optional<std::pair<Index, Index>> irrational_pair;
    std::vector<std::vector<Index>> components;
    /// coordinates whose sign some element flips
    std::vector<Index> flipped;
    bool full_product = false;

    bool is_finite() const noexcept { return verdict == GroupVerdict::finite; }
};

namespace detail {

struct MatrixKeyHash
{
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (auto v : key) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

inline std::vector<std::int64_t> matrix_key(const Matrix& g)
{
    std::vector<std::int64_t> key(static_cast<std::size_t>(g.size()));
    for (Index i = 0; i < g.size(); ++i) key[static_cast<std::size_t>(i)] = std::llround(g.data()[i] * 1e8);
    return key;
}

/// +1 / -1 entry position per row when g is a signed permutation matrix.
inline std::optional<std::vector<std::pair<Index, int>>> signed_permutation_pattern(const Matrix& g, double tol = 1e-8)
{
    const Index n = g.rows();
    std::vector<std::pair<Index, int>> pat(static_cast<std::size_t>(n));
    std::vector<bool> col_used(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < n; ++i) {
        Index where = -1;
        for (Index j = 0; j < n; ++j) {
            const double v = g(i, j);
            if (std::abs(v) <= tol) continue;
            if (std::abs(std::abs(v) - 1.0) > tol || where >= 0) return std::nullopt;
            where = j;
        }
        if (where < 0 || col_used[static_cast<std::size_t>(where)]) return std::nullopt;
        col_used[static_cast<std::size_t>(where)] = true;
        pat[static_cast<std::size_t>(i)] = {where, g(i, where) > 0 ? 1 : -1};
    }
    return pat;
}

inline void classify(GroupReport& rep)
{
    const Index n = rep.dim;
    if (rep.order == 1) {
        rep.classification = GroupClass::trivial;
        rep.components.clear();
        for (Index i = 0; i < n; ++i) rep.components.push_back({i});
        rep.full_product = true;
        return;
    }
    bool all_signed_perm = true, all_diag = true, all_pos = true;
    // union-find over coordinates moved into each other
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    std::vector<bool> flipped(static_cast<std::size_t>(n), false);
    for (const auto& g : rep.elements) {
        auto pat = signed_permutation_pattern(g);
        if (!pat) {
            all_signed_perm = false;
            break;
        }
        for (Index i = 0; i < n; ++i) {
            const auto [col, sign] = (*pat)[static_cast<std::size_t>(i)];
            if (col != i) all_diag = false;
            if (sign < 0) {
                all_pos = false;
                flipped[static_cast<std::size_t>(i)] = true;
            }
            parent[static_cast<std::size_t>(find(i))] = find(col);
        }
    }
    if (!all_signed_perm) {
        rep.classification = GroupClass::unknown_finite;
        return;
    }
    // components ordered by their smallest coordinate
    std::unordered_map<Index, std::size_t> slot;
    rep.components.clear();
    for (Index i = 0; i < n; ++i) {
        auto [it, fresh] = slot.emplace(find(i), rep.components.size());
        if (fresh) rep.components.emplace_back();
        rep.components[it->second].push_back(i);
    }
    rep.flipped.clear();
    for (Index i = 0; i < n; ++i) {
        if (flipped[static_cast<std::size_t>(i)]) rep.flipped.push_back(i);
    }
    if (all_diag) rep.classification = GroupClass::sign_change;
    else if (all_pos) rep.classification = GroupClass::permutation;
    else rep.classification = GroupClass::signed_permutation;

    double expect = 1.0;
    bool whole = true;
    for (const auto& comp : rep.components) {
        const auto in_flipped = [&](Index i) { return flipped[static_cast<std::size_t>(i)]; };
        const bool all = std::all_of(comp.begin(), comp.end(), in_flipped);
        if (!all && std::any_of(comp.begin(), comp.end(), in_flipped)) whole = false;
        for (std::size_t k = 1; k <= comp.size(); ++k) expect *= static_cast<double>((all ? 2 : 1) * k);
    }
    rep.full_product = whole && static_cast<double>(rep.order) == expect;
}

/// Group generated by coordinate flips e_i and transpositions (e_j - e_i)/sqrt2:
/// on each connected component of the transposition graph it is the symmetric
/// group, or the hyperoctahedral group when some coordinate of the component
/// is also flipped. Empty when the base has any other kind of vector.
struct StructuralGroup
{
    std::size_t order = 1;
    bool overflow = false;
    double log10_order = 0.0;
    GroupClass classification = GroupClass::trivial;
    std::vector<std::vector<Index>> components;
    std::vector<Index> flipped;
};

inline std::optional<StructuralGroup> structural_group(const SolarBase::sp_mat_t& cols, Index n, double tol = 1e-12)
{
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    std::vector<bool> flip(static_cast<std::size_t>(n), false);
    bool any_edge = false, any_flip = false;
    const double h = 1.0 / std::numbers::sqrt2;
    for (Index j = 0; j < cols.cols(); ++j) {
        std::vector<std::pair<Index, double>> nz;
        for (SolarBase::sp_mat_t::InnerIterator it(cols, j); it; ++it) {
            if (std::abs(it.value()) > tol) nz.emplace_back(it.index(), it.value());
        }
        if (nz.size() == 1) {
            flip[static_cast<std::size_t>(nz[0].first)] = any_flip = true;
        } else if (nz.size() == 2) {
            const double a = nz[0].second, b = nz[1].second;
            if (std::abs(std::abs(a) - h) > 1e-10 || std::abs(std::abs(b) - h) > 1e-10 || a * b > 0) return std::nullopt;
            parent[static_cast<std::size_t>(find(nz[0].first))] = find(nz[1].first);
            any_edge = true;
        } else {
            return std::nullopt;
        }
    }

    StructuralGroup g;
    std::unordered_map<Index, std::size_t> slot;
    for (Index i = 0; i < n; ++i) {
        const Index root = find(i);
        auto [it, fresh] = slot.emplace(root, g.components.size());
        if (fresh) g.components.emplace_back();
        g.components[it->second].push_back(i);
    }
    for (const auto& comp : g.components) {
        const bool signed_comp = std::any_of(comp.begin(), comp.end(), [&](Index i) { return flip[static_cast<std::size_t>(i)]; });
        for (std::size_t k = 1; k <= comp.size(); ++k) {
            const std::size_t f = (signed_comp ? 2 : 1) * k;
            g.log10_order += std::log10(static_cast<double>(f));
            if (g.overflow || g.order > std::numeric_limits<std::size_t>::max() / f) {
                g.overflow = true;
                g.order = std::numeric_limits<std::size_t>::max();
            } else {
                g.order *= f;
            }
        }
        if (signed_comp) g.flipped.insert(g.flipped.end(), comp.begin(), comp.end());
    }
    std::sort(g.flipped.begin(), g.flipped.end());
    if (g.order == 1) g.classification = GroupClass::trivial;
    else if (!any_edge) g.classification = GroupClass::sign_change;
    else if (!any_flip) g.classification = GroupClass::permutation;
    else g.classification = GroupClass::signed_permutation;
    return g;
}

} // namespace detail

/**
 * Generate G(B).
 *
 * Stage 1 judges every pairwise angle ratio arccos(<r_i, r_j>) / pi for
 * rationality (denominator <= max_den, tolerance angle_tol); any irrational
 * ratio means an infinite group. Stage 2 closes the generating reflections
 * under multiplication breadth first, deduplicating matrices by their entries
 * rounded to 1e-8. Hitting `cap` elements (or about 512 MB of matrices)
 * gives an undetermined verdict,
 * except for bases made only of coordinate vectors and edge differences, whose
 * group is a product of symmetric / hyperoctahedral groups over the connected
 * components; those are reported as finite without the element list.
 */
inline GroupReport generate_group(const SolarBase& base, std::size_t cap = 100000, long max_den = 720,
                                  double angle_tol = 1e-9)
{
    if (cap < 2) throw GroupError("generate_group: cap must be >= 2");
    // memory bound on the enumerated element list (doubles)
    constexpr std::size_t max_doubles = std::size_t{1} << 26;
    const Index n = base.dim();
    const Index m = base.size();
    GroupReport rep;
    rep.dim = n;

    Matrix dense(base.bases());
    rep.inner_products = dense.transpose() * dense;
    rep.angle_ratio.resize(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            const double c = std::clamp(rep.inner_products(i, j), -1.0, 1.0);
            rep.angle_ratio(i, j) = std::acos(c) / std::numbers::pi;
        }
    }

    // distinct generators (duplicate or antiparallel base vectors reflect identically)
    std::unordered_map<std::vector<std::int64_t>, std::size_t, detail::MatrixKeyHash> gen_seen;
    for (Index j = 0; j < m; ++j) {
        Vector r = dense.col(j);
        Index lead = 0;
        while (std::abs(r[lead]) <= 1e-12) ++lead;
        if (r[lead] < 0) r = -r;
        if (gen_seen.emplace(detail::matrix_key(r), rep.generators.size()).second) rep.generators.push_back(std::move(r));
    }

    for (Index i = 0; i < m && !rep.irrational_pair; ++i) {
        for (Index j = i + 1; j < m; ++j) {
            if (!detect_rational(rep.angle_ratio(i, j), max_den, angle_tol).rational) {
                rep.irrational_pair = std::make_pair(i, j);
                break;
            }
        }
    }
    if (rep.irrational_pair) {
        rep.verdict = GroupVerdict::infinite;
        rep.classification = GroupClass::orthogonal_fallback;
        return rep;
    }

    // groups too large to enumerate are still known exactly for flip/transposition bases
    const auto sg = detail::structural_group(base.bases(), n);
    const bool too_big = sg && (sg->overflow || sg->order > cap || sg->order * static_cast<std::size_t>(n * n) > max_doubles);
    if (too_big) {
        rep.verdict = GroupVerdict::finite;
        rep.order = sg->order;
        rep.order_overflow = sg->overflow;
        rep.log10_order = sg->log10_order;
        rep.classification = sg->classification;
        rep.components = std::move(sg->components);
        rep.flipped = std::move(sg->flipped);
        rep.full_product = true;
        return rep;
    }

    std::unordered_map<std::vector<std::int64_t>, std::size_t, detail::MatrixKeyHash> seen;
    Matrix id = Matrix::Identity(n, n);
    seen.emplace(detail::matrix_key(id), 0);
    rep.elements.push_back(id);
    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const std::size_t idx = frontier.front();
        frontier.pop_front();
        for (const auto& r : rep.generators) {
            // S_r E = E - 2 r (r^T E)
            Matrix prod = rep.elements[idx];
            prod.noalias() -= 2.0 * r * (r.transpose() * rep.elements[idx]);
            auto key = detail::matrix_key(prod);
            if (seen.contains(key)) continue;
            if (rep.elements.size() >= cap || (rep.elements.size() + 1) * static_cast<std::size_t>(n * n) > max_doubles) {
                rep.verdict = GroupVerdict::undetermined;
                rep.classification = GroupClass::orthogonal_fallback;
                rep.order = 0;
                rep.elements.clear();
                return rep;
            }
            seen.emplace(std::move(key), rep.elements.size());
            rep.elements.push_back(std::move(prod));
            frontier.push_back(rep.elements.size() - 1);
        }
    }
    rep.verdict = GroupVerdict::finite;
    rep.order = rep.elements.size();
    rep.log10_order = std::log10(static_cast<double>(rep.order));
    detail::classify(rep);
    return rep;
}

/// Deduplicated orbit {g y : g in G} of a finite group.
inline std::vector<Vector> orbit(const GroupReport& rep, const Eigen::Ref<const Vector>& y)
{
    if (!rep.is_finite()) throw GroupError("orbit: group is not known to be finite");
    if (rep.elements.empty()) throw GroupError("orbit: group is too large to enumerate");
    if (y.size() != rep.dim) throw DimensionMismatch("orbit", rep.dim, y.size());
    const double scale = 1e-8 * (1.0 + y.cwiseAbs().maxCoeff());
    std::unordered_map<std::vector<std::int64_t>, std::size_t, detail::MatrixKeyHash> seen;
    std::vector<Vector> out;
    for (const auto& g : rep.elements) {
        Vector p = g * y;
        std::vector<std::int64_t> key(static_cast<std::size_t>(p.size()));
        for (Index i = 0; i < p.size(); ++i) key[static_cast<std::size_t>(i)] = std::llround(p[i] / scale);
        if (seen.emplace(std::move(key), out.size()).second) out.push_back(std::move(p));
    }
    return out;
}

} // namespace solar
