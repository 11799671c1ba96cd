#pragma once

#include <Eigen/Core>

namespace fairprobe {

using Index = Eigen::Index;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

}  // namespace fairprobe
