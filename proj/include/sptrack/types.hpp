#ifndef SPTRACK_TYPES_HPP
#define SPTRACK_TYPES_HPP

#include <Eigen/Dense>

namespace sptrack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace sptrack

#endif
