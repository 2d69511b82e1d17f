#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace itree {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with the usual max shift.
double log_add_exp(double a, double b);

// log(exp(a) - exp(b)); requires a >= b, returns -inf when a == b.
double log_sub_exp(double a, double b);

double log_sum_exp(std::span<const double> v);

// Standard normal CDF and its inverse (Acklam's rational approximation,
// refined with one Halley step).
double norm_cdf(double x);
double norm_ppf(double p);

double norm_log_pdf(double x, double mean, double sd);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with nu degrees of freedom.
double student_t_two_sided_p(double t, double nu);

// log density of a standardized Student-T with nu dof evaluated at u.
double student_t_log_pdf(double u, double nu);

struct WelchResult {
  double t = 0.0;
  double nu = 0.0;
  double p_value = 1.0;
};

// Welch two-sample t-test. Degenerate variances with equal means give p = 1.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // Bessel-corrected
};
MeanSd mean_sd(std::span<const double> v);

}  // namespace itree
