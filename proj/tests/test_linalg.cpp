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

#include <catch_amalgamated.hpp>

using namespace linklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

CMat random_pd(Eigen::Index n, Rng &rng)
{
    const CMat b = standard_cn(n, n, rng);
    CMat a = b * b.adjoint();
    a.diagonal().array() += 0.5;
    return a;
}

CMat sample_covariance(const std::vector<CVec> &xs)
{
    const Eigen::Index m = xs.front().size();
    CMat c = CMat::Zero(m, m);
    for (const CVec &x : xs)
        c += x * x.adjoint();
    return c / static_cast<double>(xs.size());
}

} // namespace

TEST_CASE("herm_solve on identity and diagonal systems")
{
    const HermitianPD eye = HermitianPD::factor(CMat::Identity(3, 3));
    CVec b(3);
    b << 1.0, 2.0, 3.0;
    CHECK((herm_solve(eye, b) - b).norm() < 1e-15);

    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    CVec rhs(2);
    rhs << 2.0, 4.0;
    const CVec x = herm_solve(HermitianPD::factor(d), rhs);
    CHECK_THAT(std::abs(x[0] - 1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(x[1] - 1.0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("herm_solve residual and recovery on random PD systems")
{
    Rng rng = derive_stream(11, {});
    for (Eigen::Index n : {2, 3, 8, 17, 32, 64})
    {
        const CMat a = random_pd(n, rng);
        const HermitianPD f = HermitianPD::factor(a);
        const CVec b = standard_cn(n, rng);
        const CVec x = herm_solve(f, b);
        CHECK((a * x - b).norm() <= 1e-10 * b.norm());

        const CVec x0 = standard_cn(n, rng);
        CHECK((herm_solve(f, CVec(a * x0)) - x0).norm() <= 1e-9 * x0.norm());

        const CMat bm = standard_cn(n, 3, rng);
        CHECK((a * herm_solve(f, bm) - bm).norm() <= 1e-10 * bm.norm());
    }
}

TEST_CASE("factorization handles semi-definite, zero and invalid matrices")
{
    CMat singular = CMat::Identity(3, 3);
    singular(1, 1) = 0.0;
    const HermitianPD f = HermitianPD::factor(singular);
    CHECK(f.jitter() > 0.0);
    CHECK(f.jitter() <= 1e-12 * 2.0);
    CHECK(std::abs(f.lower()(1, 1)) > 0.0);

    const HermitianPD z = HermitianPD::factor(CMat::Zero(3, 3));
    CHECK(z.is_zero());
    CHECK_THROWS_AS(z.solve(CVec(CVec::Ones(3))), LinalgError);

    CMat indefinite = CMat::Identity(2, 2);
    indefinite(1, 1) = -1.0;
    try
    {
        HermitianPD::factor(indefinite);
        FAIL("indefinite matrix accepted");
    }
    catch (const FactorizationError &e)
    {
        CHECK_THAT(e.min_eigenvalue(), WithinAbs(-1.0, 1e-12));
    }

    CMat skew = CMat::Identity(2, 2);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(HermitianPD::factor(skew), LinalgError);
    CHECK_THROWS_AS(HermitianPD::factor(CMat(2, 3)), LinalgError);
}

TEST_CASE("herm_solve rejects non-conforming right-hand sides")
{
    const HermitianPD eye = HermitianPD::factor(CMat::Identity(3, 3));
    CHECK_THROWS_AS(herm_solve(eye, CVec(CVec::Ones(4))), LinalgError);
}

TEST_CASE("sample_cn with identity covariance")
{
    Rng rng = derive_stream(13, {});
    const HermitianPD cov = HermitianPD::factor(CMat::Identity(2, 2));
    const CVec mean = CVec::Zero(2);
    std::vector<CVec> xs;
    CVec sum = CVec::Zero(2);
    for (int n = 0; n < 100000; ++n)
    {
        xs.push_back(sample_cn(mean, cov, rng));
        sum += xs.back();
    }
    const CMat c = sample_covariance(xs);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(c(i, j) - (i == j ? 1.0 : 0.0)) < 0.02);
    CHECK(std::abs(sum[0] / 1e5) < 0.015);
}

TEST_CASE("sample_cn with degenerate and diagonal covariances")
{
    Rng rng = derive_stream(14, {});
    CVec mean(2);
    mean << cd(1.0, 0.0), cd(0.0, 0.0);
    const HermitianPD zero = HermitianPD::factor(CMat::Zero(2, 2));
    CHECK(sample_cn(mean, zero, rng) == mean);

    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    const HermitianPD cov = HermitianPD::factor(d);
    double p0 = 0.0, p1 = 0.0;
    for (int n = 0; n < 100000; ++n)
    {
        const CVec x = sample_cn(CVec::Zero(2), cov, rng);
        p0 += std::norm(x[0]);
        p1 += std::norm(x[1]);
    }
    CHECK_THAT(p0 / p1, WithinRel(4.0, 0.05));
}

TEST_CASE("sample_cn covariance of a correlated target")
{
    Rng rng = derive_stream(15, {});
    const CMat target = random_pd(3, rng);
    const HermitianPD cov = HermitianPD::factor(target);
    CVec mean(3);
    mean << cd(1, 2), cd(-1, 0), cd(0, 3);
    std::vector<CVec> xs;
    for (int n = 0; n < 100000; ++n)
        xs.push_back(sample_cn(mean, cov, rng) - mean);
    const CMat c = sample_covariance(xs);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(c(i, j) - target(i, j)) / std::sqrt(target(i, i).real() * target(j, j).real()) < 0.05);
}

TEST_CASE("standard_cn has unit power and is circular")
{
    Rng rng = derive_stream(16, {});
    const CVec z = standard_cn(200000, rng);
    CHECK_THAT(z.squaredNorm() / z.size(), WithinRel(1.0, 0.01));
    CHECK(std::abs(z.array().square().sum() / static_cast<double>(z.size())) < 0.01);
}

TEST_CASE("woodbury_inverse special cases")
{
    const HermitianPD two = HermitianPD::factor(CMat::Constant(1, 1, 2.0));
    const CMat one = CMat::Constant(1, 1, 1.0);
    CHECK_THAT(woodbury_inverse(two, one, one, one)(0, 0).real(), WithinAbs(1.0 / 3.0, 1e-15));

    const HermitianPD eye = HermitianPD::factor(CMat::Identity(4, 4));
    CMat e1 = CMat::Zero(4, 1);
    e1(0, 0) = 1.0;
    const CMat inv = woodbury_inverse(eye, e1, one, e1.adjoint());
    CMat expected = CMat::Identity(4, 4);
    expected(0, 0) = 0.5;
    CHECK((inv - expected).norm() < 1e-15);
}

TEST_CASE("woodbury_inverse matches direct inversion")
{
    Rng rng = derive_stream(17, {});
    for (Eigen::Index l1 : {2, 6, 16, 32})
        for (Eigen::Index l2 : {1, 2, 3})
        {
            const CMat d = random_pd(l1, rng);
            const CMat f1 = standard_cn(l1, l2, rng);
            const CMat f2 = random_pd(l2, rng);
            const CMat f3 = standard_cn(l2, l1, rng);
            const CMat direct = (d + f1 * f2 * f3).inverse();
            const CMat w = woodbury_inverse(HermitianPD::factor(d), f1, f2, f3);
            CHECK((w - direct).norm() <= 1e-9 * direct.norm());
        }
}

TEST_CASE("woodbury_inverse rejects singular or non-conforming factors")
{
    const HermitianPD eye = HermitianPD::factor(CMat::Identity(3, 3));
    CHECK_THROWS_AS(woodbury_inverse(eye, CMat::Ones(3, 2), CMat::Zero(2, 2), CMat::Ones(2, 3)), LinalgError);
    CHECK_THROWS_AS(woodbury_inverse(eye, CMat::Ones(3, 2), CMat::Identity(2, 2), CMat::Ones(3, 3)), LinalgError);
}

TEST_CASE("decibel conversions")
{
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK_THAT(db_to_linear(-30.0), WithinRel(1e-3, 1e-14));
    CHECK_THAT(dbm_to_watts(-90.0), WithinRel(1e-12, 1e-14));
    CHECK_THAT(dbm_to_watts(20.0), WithinRel(0.1, 1e-14));
}

TEST_CASE("derived streams are reproducible and distinct")
{
    Rng a = derive_stream(5, {1, 2});
    Rng b = derive_stream(5, {1, 2});
    Rng c = derive_stream(5, {2, 1});
    Rng d = derive_stream(6, {1, 2});
    const auto va = a(), vb = b(), vc = c(), vd = d();
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
}

TEST_CASE("compensated summation keeps small terms")
{
    KahanSum k;
    double naive = 0.0;
    k.add(1e16);
    naive += 1e16;
    for (int i = 0; i < 1000; ++i)
    {
        k.add(1.0);
        naive += 1.0;
    }
    CHECK(k.value() == 1e16 + 1000.0);
    CHECK(naive != 1e16 + 1000.0);
}
