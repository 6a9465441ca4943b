#pragma once

#include <functional>
#include <string>

namespace nacest {

enum class Family { Clayton, Gumbel, Frank, Joe, Independence };

std::string to_string(Family family);
// Case-insensitive; throws std::invalid_argument.
Family parse_family(const std::string& name);

struct GeneratorSpec {
  Family family = Family::Clayton;
  double theta = 1.0;
  double tau = 0.0;

  static GeneratorSpec from_tau(Family family, double tau);
  static GeneratorSpec from_theta(Family family, double theta);
  // Throws std::invalid_argument when theta is outside the family's range.
  void validate() const;
};

double psi(const GeneratorSpec& g, double t);
double psi_inv(const GeneratorSpec& g, double u);

// Clayton in closed form; the others through the numeric Kendall integral,
// inverted by bisection.
double tau_to_theta(Family family, double tau);
double theta_to_tau(Family family, double theta);

// 1 + 4 * int_0^1 phi(t) / phi'(t) dt with phi = psi^{-1}, always numeric.
double kendall_integral(Family family, double theta);

// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

}  // namespace nacest
