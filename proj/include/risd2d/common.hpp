#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace risd2d {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Random engine used everywhere; every stochastic operation takes one by reference
/// so callers control seeding.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Standard circular complex Gaussian sample, E|u|^2 = 1.
cdouble circular_gaussian(Rng& rng);

}  // namespace risd2d
