#pragma once

#include "impulse/band.hpp"

#include <string>
#include <vector>

namespace impulse {

/// Labor-demand model reduced to the ratio xi = L / Z, which follows
///   d xi = -(b + delta) xi dt + sigma xi dB,
/// discounted at r - b, with running reward (A xi)^mu - w xi.
struct LaborParams {
    double demand_drift = 0.03;  // b
    double rate = 0.06;          // r
    double mu = 0.75;
    double sigma = 0.35;
    double quit_rate = 0.1;      // delta
    double productivity = 5.0;   // A
    double wage = 2.0;           // w
    double delay = 0.5;
    double c1 = 0.05;
    double c2 = 0.1;
    double c3 = 2.0;
    double c4 = 1.0;

    /// Throws Error{NoAction} when r <= b and Error{Configuration} otherwise.
    void validate() const;
};

struct LaborExponents {
    double beta1;  // > 1
    double beta2;  // < 0
};

/// Roots of sigma^2/2 beta^2 - (sigma^2/2 + b + delta) beta + b - r = 0.
LaborExponents labor_exponents(const LaborParams& params);

double labor_k1(const LaborParams& params);
double labor_k2(const LaborParams& params);
double labor_g(const LaborParams& params, double xi);
double labor_g_prime(const LaborParams& params, double xi);

struct LaborLogTerms {
    double d1;
    double d2;
    double epsilon;
};

LaborLogTerms labor_log_terms(const LaborParams& params, double xi, double c);

/// Delayed firing cost r(xi; c), closed form in N(d1), N(d2), exp(epsilon).
double labor_r(const LaborParams& params, double xi, double c);
double labor_r_dx(const LaborParams& params, double xi, double c);

/// Building blocks of r under the uncontrolled law of xi_delay:
/// A = P(xi_delay > c), B = P(xi_delay < c), C(theta) = E[xi_delay^theta],
/// D = E[xi_delay 1{xi_delay > c}], E = E[xi_delay 1{xi_delay < c}].
struct LaborMoments {
    double A;
    double B;
    double D;
    double E;
};

LaborMoments labor_moments(const LaborParams& params, double xi, double c);
double labor_power_moment(const LaborParams& params, double xi, double theta);

struct LaborModel {
    LaborParams params;
    DiffusionModel model;
    BandCostStructure cost;
};

LaborModel build_labor(const LaborParams& params, StateInterval window = {1e-3, 200.0});

/// Checks of the uniqueness conditions: c1 q - g(q) < 0 and
/// max(c1 - c2, c3 + c4) < |k2|. Returns warnings.
std::vector<std::string> labor_condition_warnings(const LaborParams& params, double q);

/// Two-variable value v(z, l) = z Y(l / z) with Y = u + g.
double lift_value(const BandSolution& solution, double z, double l);

}  // namespace impulse
