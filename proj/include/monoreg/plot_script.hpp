#pragma once

#include <string>

#include <Eigen/Core>

namespace monoreg {

/// Gnuplot script with output, control and state panels for a trajectory
/// CSV written by write_csv; the image goes to `image_path`.
std::string plot_script(const std::string& csv_path, Eigen::Index n, Eigen::Index m, const std::string& title,
                        const std::string& image_path);

}  // namespace monoreg
