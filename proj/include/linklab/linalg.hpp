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

#ifndef LINKLAB_LINALG_HPP
#define LINKLAB_LINALG_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace linklab
{

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// All random draws go through explicit stream values. No global generator exists.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Relative diagonal loading used when a covariance is only semi-definite.
inline constexpr double kDefaultJitter = 1e-12;

class LinalgError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a matrix that should be positive definite cannot be factored.
class FactorizationError : public LinalgError
{
public:
    FactorizationError(const std::string &what, double min_eigenvalue)
        : LinalgError(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

// Hermitian positive (semi-)definite matrix together with its Cholesky factor.
//
// Factoring first tries the exact matrix. Semi-definite inputs (estimation-error
// covariances are rank deficient in noiseless limits) are retried with a diagonal
// load of `rel_jitter * trace / dim`. The all-zero matrix is accepted and flagged;
// it samples as a point mass and refuses to solve.
class HermitianPD
{
public:
    static HermitianPD factor(const CMat &mat, double rel_jitter = kDefaultJitter);

    const CMat &matrix() const { return mat_; }
    const CMat &lower() const { return chol_; }
    Eigen::Index dim() const { return mat_.rows(); }
    bool is_zero() const { return zero_; }
    double jitter() const { return jitter_; }

    CVec solve(const CVec &b) const;
    CMat solve(const CMat &b) const;
    CMat inverse() const;

private:
    HermitianPD() = default;
    CMat mat_;
    CMat chol_;
    double jitter_ = 0.0;
    bool zero_ = false;
};

bool is_hermitian(const CMat &m, double rel_tol = 1e-10);
CMat hermitian_part(const CMat &m);
double min_eigenvalue(const CMat &hermitian);

// One draw of CN(0,1): real and imaginary parts each N(0, 1/2).
cd standard_cn(Rng &rng);
CVec standard_cn(Eigen::Index n, Rng &rng);
CMat standard_cn(Eigen::Index rows, Eigen::Index cols, Rng &rng);

// mean + L z with L the Cholesky factor of cov and z ~ CN(0, I).
CVec sample_cn(const CVec &mean, const HermitianPD &cov, Rng &rng);

// Solves a x = b and verifies ||a x - b|| <= 1e-10 ||b||.
CVec herm_solve(const HermitianPD &a, const CVec &b);
CMat herm_solve(const HermitianPD &a, const CMat &b);

// (D + F1 F2 F3)^-1 = D^-1 - D^-1 F1 (F3 D^-1 F1 + F2^-1)^-1 F3 D^-1
CMat woodbury_inverse(const HermitianPD &d, const CMat &f1, const CMat &f2, const CMat &f3);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

// Independent stream keyed by (seed, coords...). Equal keys give equal streams on every
// run, independent of thread scheduling.
Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

// Compensated running sum.
class KahanSum
{
public:
    void add(double x)
    {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace linklab

#endif
