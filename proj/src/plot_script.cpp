#include "monoreg/plot_script.hpp"

#include <sstream>

namespace monoreg {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Plot command for `count` consecutive CSV columns starting at `first`
// (1-based), labelled prefix0, prefix1, ...
std::string series(const std::string& data, long first, long count, const std::string& prefix) {
  std::ostringstream os;
  os << "plot ";
  for (long i = 0; i < count; ++i) {
    if (i > 0) os << ", \\\n     ";
    os << data << " using 1:" << first + i << " with lines title '" << prefix << i << "'";
  }
  os << "\n";
  return os.str();
}

}  // namespace

std::string plot_script(const std::string& csv_path, Eigen::Index n, Eigen::Index m, const std::string& title,
                        const std::string& image_path) {
  const long nx = static_cast<long>(n);
  const long nm = static_cast<long>(m);
  const std::string data = quoted(csv_path);
  // Columns: t | x (n) | y (m) | u (m) | v (m) | H2 | supply | distS | inOmega
  const long x_col = 2;
  const long y_col = x_col + nx;
  const long u_col = y_col + nm;

  std::ostringstream os;
  os << "# gnuplot script for " << csv_path << "\n";
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 900,1100\n";
  os << "set output " << quoted(image_path) << "\n";
  os << "set key outside right\n";
  os << "set grid\n";
  os << "set xlabel 't [s]'\n";
  os << "set multiplot layout 3,1 title " << quoted(title) << "\n";
  os << "set title 'output y'\n";
  os << series(data, y_col, nm, "y");
  os << "set title 'control u'\n";
  os << series(data, u_col, nm, "u");
  os << "set title 'state x'\n";
  os << series(data, x_col, nx, "x");
  os << "unset multiplot\n";
  return os.str();
}

}  // namespace monoreg
