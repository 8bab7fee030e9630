#include <cmath>

#include "doctest.h"
#include "tcsim/dense_oracle.hpp"
#include "tcsim/errors.hpp"
#include "tcsim/tc_spectrum.hpp"

using namespace tcsim;

TEST_CASE("dense oracle: single molecule doublets") {
  const auto res = dense_oracle(1, 8, 1.0);
  CHECK(res.full_dim == 18);
  const auto* sec = res.find(HalfInt::from_twice(1), HalfInt::from_twice(3));
  REQUIRE(sec != nullptr);
  CHECK(sec->multiplicity == 1);
  REQUIRE(sec->eigenvalues.size() == 2);
  CHECK(std::fabs(sec->eigenvalues[0] - (1.5 - std::sqrt(2.0))) < 1e-10);
  CHECK(std::fabs(sec->eigenvalues[1] - (1.5 + std::sqrt(2.0))) < 1e-10);
  // Sectors touching the cutoff are left out.
  CHECK(res.find(HalfInt::from_twice(1), HalfInt::from_twice(17)) == nullptr);
}

TEST_CASE("dense oracle: the two-molecule singlet is uncoupled") {
  const auto res = dense_oracle(2, 6, 0.8);
  for (int c = 0; c <= 5; ++c) {  // c + N/2 must stay within the cutoff
    const auto* sec = res.find(HalfInt::from_int(0), HalfInt::from_int(c));
    REQUIRE(sec != nullptr);
    CHECK(sec->multiplicity == 1);
    REQUIRE(sec->eigenvalues.size() == 1);
    CHECK(std::fabs(sec->eigenvalues[0] - c) < 1e-12);
  }
}

TEST_CASE("dense oracle: multiplet multiplicities for three molecules") {
  const auto res = dense_oracle(3, 6, 1.0);
  const auto* half = res.find(HalfInt::from_twice(1), HalfInt::from_twice(5));
  const auto* full = res.find(HalfInt::from_twice(3), HalfInt::from_twice(5));
  REQUIRE(half != nullptr);
  REQUIRE(full != nullptr);
  CHECK(half->multiplicity == 2);
  CHECK(full->multiplicity == 1);
}

TEST_CASE("dense oracle agrees with the block solver") {
  for (int molecules = 1; molecules <= 3; ++molecules) {
    for (double kappa : {0.5, 1.0}) {
      const int cutoff = molecules == 3 ? 8 : 10;
      const auto res = dense_oracle(molecules, cutoff, kappa);
      REQUIRE_FALSE(res.sectors.empty());
      for (const auto& sec : res.sectors) {
        const auto block = block_eigenvalues(build_block({sec.r, sec.c, kappa}));
        REQUIRE(sec.eigenvalues.size() == block.size() * sec.multiplicity);
        for (std::size_t i = 0; i < sec.eigenvalues.size(); ++i) {
          CHECK(std::fabs(sec.eigenvalues[i] - block[i / sec.multiplicity]) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("dense oracle limits") {
  CHECK_THROWS_AS(dense_oracle(0, 4, 1.0), DomainError);
  CHECK_THROWS_AS(dense_oracle(4, 4, 1.0), DomainError);
  CHECK_THROWS_AS(dense_oracle(3, 1000, 1.0), DomainError);
}
