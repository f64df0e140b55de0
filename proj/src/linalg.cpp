// SPDX-License-Identifier: Apache-2.0
//
// linklab: link-level analysis of IOS-aided MIMO uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "linklab/linalg.hpp"

#include <cmath>
#include <sstream>

namespace linklab
{

namespace
{

constexpr double kHalfSqrt = 0.70710678118654752440;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

bool is_hermitian(const CMat &m, double rel_tol)
{
    if (m.rows() != m.cols())
        return false;
    const double scale = std::max(m.norm(), 1e-300);
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

CMat hermitian_part(const CMat &m)
{
    return 0.5 * (m + m.adjoint());
}

double min_eigenvalue(const CMat &hermitian)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

HermitianPD HermitianPD::factor(const CMat &mat, double rel_jitter)
{
    if (mat.rows() != mat.cols() || mat.rows() == 0)
        throw LinalgError("HermitianPD: matrix must be square and non-empty");
    if (!mat.allFinite())
        throw LinalgError("HermitianPD: non-finite entries");
    if (!is_hermitian(mat))
        throw LinalgError("HermitianPD: matrix is not Hermitian");

    HermitianPD out;
    out.mat_ = hermitian_part(mat);

    if (out.mat_.cwiseAbs().maxCoeff() == 0.0)
    {
        out.zero_ = true;
        out.chol_ = CMat::Zero(mat.rows(), mat.cols());
        return out;
    }

    Eigen::LLT<CMat> llt(out.mat_);
    if (llt.info() == Eigen::Success)
    {
        out.chol_ = llt.matrixL();
        return out;
    }

    const double n = static_cast<double>(mat.rows());
    const double load = rel_jitter * std::abs(out.mat_.trace().real()) / n;
    if (load > 0.0)
    {
        CMat loaded = out.mat_;
        loaded.diagonal().array() += load;
        Eigen::LLT<CMat> llt2(loaded);
        if (llt2.info() == Eigen::Success)
        {
            out.chol_ = llt2.matrixL();
            out.jitter_ = load;
            return out;
        }
    }

    const double lmin = min_eigenvalue(out.mat_);
    std::ostringstream msg;
    msg << "HermitianPD: Cholesky factorization failed, minimum eigenvalue " << lmin;
    throw FactorizationError(msg.str(), lmin);
}

CVec HermitianPD::solve(const CVec &b) const
{
    if (zero_)
        throw LinalgError("HermitianPD: cannot solve with the zero matrix");
    if (b.size() != dim())
        throw LinalgError("HermitianPD: dimension mismatch in solve");
    CVec y = chol_.triangularView<Eigen::Lower>().solve(b);
    return chol_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

CMat HermitianPD::solve(const CMat &b) const
{
    if (zero_)
        throw LinalgError("HermitianPD: cannot solve with the zero matrix");
    if (b.rows() != dim())
        throw LinalgError("HermitianPD: dimension mismatch in solve");
    CMat y = chol_.triangularView<Eigen::Lower>().solve(b);
    return chol_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

CMat HermitianPD::inverse() const
{
    return solve(CMat::Identity(dim(), dim()).eval());
}

cd standard_cn(Rng &rng)
{
    std::normal_distribution<double> nd(0.0, kHalfSqrt);
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

CVec standard_cn(Eigen::Index n, Rng &rng)
{
    std::normal_distribution<double> nd(0.0, kHalfSqrt);
    CVec z(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double re = nd(rng);
        const double im = nd(rng);
        z[i] = cd(re, im);
    }
    return z;
}

CMat standard_cn(Eigen::Index rows, Eigen::Index cols, Rng &rng)
{
    std::normal_distribution<double> nd(0.0, kHalfSqrt);
    CMat z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
        {
            const double re = nd(rng);
            const double im = nd(rng);
            z(r, c) = cd(re, im);
        }
    return z;
}

CVec sample_cn(const CVec &mean, const HermitianPD &cov, Rng &rng)
{
    if (mean.size() != cov.dim())
        throw LinalgError("sample_cn: mean and covariance dimensions differ");
    if (cov.is_zero())
        return mean;
    return mean + cov.lower() * standard_cn(mean.size(), rng);
}

namespace
{

template <typename Rhs>
Rhs checked_solve(const HermitianPD &a, const Rhs &b)
{
    if (b.rows() != a.dim())
        throw LinalgError("herm_solve: non-conforming dimensions");
    Rhs x = a.solve(b);
    // one refinement step against the unloaded matrix
    Rhs r = b - a.matrix() * x;
    x += a.solve(r);
    r = b - a.matrix() * x;
    const double bn = b.norm();
    if (!x.allFinite() || r.norm() > 1e-10 * std::max(bn, 1e-300))
        throw LinalgError("herm_solve: matrix is numerically singular");
    return x;
}

} // namespace

CVec herm_solve(const HermitianPD &a, const CVec &b)
{
    return checked_solve(a, b);
}

CMat herm_solve(const HermitianPD &a, const CMat &b)
{
    return checked_solve(a, b);
}

CMat woodbury_inverse(const HermitianPD &d, const CMat &f1, const CMat &f2, const CMat &f3)
{
    const Eigen::Index l1 = d.dim();
    const Eigen::Index l2 = f2.rows();
    if (f2.cols() != l2 || f1.rows() != l1 || f1.cols() != l2 || f3.rows() != l2 || f3.cols() != l1)
        throw LinalgError("woodbury_inverse: non-conforming dimensions");

    Eigen::FullPivLU<CMat> f2_lu(f2);
    if (!f2_lu.isInvertible())
        throw LinalgError("woodbury_inverse: F2 is singular");

    const CMat d_inv = d.inverse();
    const CMat d_inv_f1 = d_inv * f1;
    const CMat inner = f3 * d_inv_f1 + f2_lu.inverse();
    Eigen::FullPivLU<CMat> inner_lu(inner);
    if (!inner_lu.isInvertible())
        throw LinalgError("woodbury_inverse: inner matrix F3 D^-1 F1 + F2^-1 is singular");

    return d_inv - d_inv_f1 * inner_lu.solve(f3 * d_inv);
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords)
{
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t c : coords)
        h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
    return Rng(h);
}

} // namespace linklab
