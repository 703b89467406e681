#pragma once
#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <utility>
#include <vector>
#include <solar/error.hpp>
#include <solar/ext_interval.hpp>

namespace solar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/**
 * Base representation (B, Lambda) of a solar penalty.
 *
 * The penalty support set is Z = { sum_j t_j r_j : t_j in I_j }, a Minkowski sum
 * of segments and rays. Base vectors are stored as the columns of a sparse
 * n x m matrix and are normalized to unit length on construction.
 *
 * Instances are immutable.
 */
class SolarBase
{
public:
    using sp_mat_t = Eigen::SparseMatrix<double, Eigen::ColMajor>;

    struct Entry
    {
        Index row;
        double value;
    };
    using sparse_col_t = std::vector<Entry>;

    SolarBase(Index dim, const std::vector<sparse_col_t>& cols, std::vector<ExtInterval> intervals)
        : dim_(dim), intervals_(std::move(intervals))
    {
        if (dim < 1) throw InvalidPenalty("SolarBase: dimension must be positive");
        if (cols.empty()) throw InvalidPenalty("SolarBase: at least one base vector is required");
        if (cols.size() != intervals_.size()) {
            throw InvalidPenalty("SolarBase: bases and intervals differ in length");
        }
        std::vector<Eigen::Triplet<double>> trips;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            double sq = 0.0;
            for (const auto& e : cols[j]) {
                if (e.row < 0 || e.row >= dim) throw InvalidPenalty("SolarBase: row index out of range");
                sq += e.value * e.value;
            }
            const double nrm = std::sqrt(sq);
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                throw InvalidPenalty("SolarBase: base vector " + std::to_string(j) + " is zero or non-finite");
            }
            for (const auto& e : cols[j]) {
                if (e.value != 0.0) trips.emplace_back(e.row, static_cast<Index>(j), e.value / nrm);
            }
        }
        bases_.resize(dim, static_cast<Index>(cols.size()));
        bases_.setFromTriplets(trips.begin(), trips.end());
        bases_.makeCompressed();
    }

    /// Columns of `dense` are the (not necessarily normalized) base vectors.
    static SolarBase from_dense(const Matrix& dense, std::vector<ExtInterval> intervals)
    {
        std::vector<sparse_col_t> cols(static_cast<std::size_t>(dense.cols()));
        for (Index j = 0; j < dense.cols(); ++j) {
            for (Index i = 0; i < dense.rows(); ++i) {
                if (dense(i, j) != 0.0) cols[static_cast<std::size_t>(j)].push_back({i, dense(i, j)});
            }
        }
        return SolarBase(dense.rows(), cols, std::move(intervals));
    }

    Index dim() const noexcept { return dim_; }
    Index size() const noexcept { return bases_.cols(); }
    const sp_mat_t& bases() const noexcept { return bases_; }
    const std::vector<ExtInterval>& intervals() const noexcept { return intervals_; }
    const ExtInterval& interval(Index j) const { return intervals_[static_cast<std::size_t>(j)]; }

    Vector base_vector(Index j) const { return Vector(bases_.col(j)); }

    /// <r_j, v>
    double dot(Index j, const Eigen::Ref<const Vector>& v) const
    {
        double s = 0.0;
        for (sp_mat_t::InnerIterator it(bases_, j); it; ++it) s += it.value() * v[it.index()];
        return s;
    }

    /// v += a * r_j
    void axpy(Index j, double a, Eigen::Ref<Vector> v) const
    {
        for (sp_mat_t::InnerIterator it(bases_, j); it; ++it) v[it.index()] += a * it.value();
    }

    /// sum_j coeffs_j r_j
    Vector combine(const Eigen::Ref<const Vector>& coeffs) const
    {
        if (coeffs.size() != size()) throw DimensionMismatch("SolarBase::combine", size(), coeffs.size());
        return bases_ * coeffs;
    }

    /// Base for s * h_C, i.e. every interval scaled by s >= 0.
    SolarBase scaled(double s) const
    {
        SolarBase out = *this;
        for (auto& iv : out.intervals_) iv = iv.scaled(s);
        return out;
    }

    /// Concatenation of bases and intervals; h of the result is h_a + h_b.
    friend SolarBase sum_penalties(const SolarBase& a, const SolarBase& b)
    {
        if (a.dim() != b.dim()) throw DimensionMismatch("sum_penalties", a.dim(), b.dim());
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(a.bases_.nonZeros() + b.bases_.nonZeros()));
        for (Index j = 0; j < a.size(); ++j) {
            for (sp_mat_t::InnerIterator it(a.bases_, j); it; ++it) trips.emplace_back(it.index(), j, it.value());
        }
        for (Index j = 0; j < b.size(); ++j) {
            for (sp_mat_t::InnerIterator it(b.bases_, j); it; ++it) {
                trips.emplace_back(it.index(), a.size() + j, it.value());
            }
        }
        SolarBase out = a;
        out.bases_.resize(a.dim(), a.size() + b.size());
        out.bases_.setFromTriplets(trips.begin(), trips.end());
        out.bases_.makeCompressed();
        out.intervals_.insert(out.intervals_.end(), b.intervals_.begin(), b.intervals_.end());
        return out;
    }

private:
    Index dim_;
    sp_mat_t bases_;
    std::vector<ExtInterval> intervals_;
};

/**
 * Support function h_Z(theta) = sum_j sup_{t in I_j} t <r_j, theta>.
 *
 * `slack` only affects unbounded interval ends: a slope within `slack` of zero
 * on an unbounded side counts as zero instead of +inf. With the default of 0 the
 * value is exact.
 */
inline double support_function(const SolarBase& base, const Eigen::Ref<const Vector>& theta,
                               double slack = 0.0)
{
    if (theta.size() != base.dim()) throw DimensionMismatch("support_function", base.dim(), theta.size());
    double h = 0.0;
    for (Index j = 0; j < base.size(); ++j) {
        const auto& iv = base.interval(j);
        double s = base.dot(j, theta);
        if (std::abs(s) <= slack) {
            if ((s > 0.0 && iv.hi == inf) || (s < 0.0 && iv.lo == -inf)) s = 0.0;
        }
        const double term = iv.sup_linear(s);
        if (term == inf) return inf;
        h += term;
    }
    return h;
}

} // namespace solar
