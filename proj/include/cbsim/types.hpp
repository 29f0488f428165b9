#pragma once

#include <Eigen/Dense>

namespace cbsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace cbsim
