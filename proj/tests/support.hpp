#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "virtlev/virtlev.hpp"

// Expects `stmt` to throw virtlev::Error of the given kind.
#define EXPECT_ERROR_KIND(stmt, expected_kind)                                                  \
    do {                                                                                        \
        bool thrown_ = false;                                                                   \
        try {                                                                                   \
            (void)(stmt);                                                                       \
        } catch (const virtlev::Error& e_) {                                                    \
            thrown_ = true;                                                                     \
            EXPECT_EQ(virtlev::to_string(e_.kind()), virtlev::to_string(expected_kind)) << e_.what(); \
        }                                                                                       \
        EXPECT_TRUE(thrown_) << "no virtlev::Error thrown by " #stmt;                           \
    } while (0)

namespace gen {

// Small hand-rolled generators for property tests. Every test owns its Rng
// with a fixed seed, so failures reproduce.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double gauss() { return std::normal_distribution<double>()(eng_); }
    virtlev::cplx complex_gauss() { return {gauss(), gauss()}; }

    // point with |z| in (rmin, rmax] and uniform argument
    virtlev::cplx annulus(double rmin, double rmax) {
        const double r = rmin + (rmax - rmin) * (1.0 - uniform(0.0, 1.0));
        return std::polar(r, uniform(0.0, 2.0 * virtlev::pi));
    }

    virtlev::CVector vector(std::size_t n) {
        virtlev::CVector v = virtlev::CVector::Zero(Eigen::Index(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = complex_gauss();
        return v;
    }

    virtlev::CMatrix matrix(std::size_t r, std::size_t c) {
        virtlev::CMatrix m = virtlev::CMatrix::Zero(Eigen::Index(r), Eigen::Index(c));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = complex_gauss();
        return m;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline double max_abs(const virtlev::CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace gen
