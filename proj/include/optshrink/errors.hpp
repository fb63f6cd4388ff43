#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace optshrink {

// Raised when a D-transform evaluation point sits on or inside the guard
// band around the empirical noise spectrum, where the resolvent sums blow up.
class pole_proximity_error : public std::runtime_error {
 public:
  pole_proximity_error(double z, double singular_value, double guard_gap)
      : std::runtime_error(format(z, singular_value, guard_gap)),
        z_(z),
        singular_value_(singular_value) {}

  double evaluation_point() const { return z_; }
  double singular_value() const { return singular_value_; }

 private:
  static std::string format(double z, double singular_value, double guard_gap) {
    std::ostringstream msg;
    msg << "evaluation point " << z << " is within the relative guard gap "
        << guard_gap << " of the noise singular value " << singular_value;
    return msg.str();
  }

  double z_;
  double singular_value_;
};

}  // namespace optshrink
