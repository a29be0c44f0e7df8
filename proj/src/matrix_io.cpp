#include "misscov/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "misscov/text_format.hpp"

namespace misscov {

void write_matrix(std::ostream& out, const SymmetricMatrix& m) {
  const std::size_t d = m.dim();
  out << d << "\n";
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

SymmetricMatrix read_matrix(std::istream& in) {
  std::size_t d = 0;
  if (!(in >> d) || d == 0) throw std::runtime_error("matrix load: bad dimension line");
  std::vector<double> dense(d * d);
  for (std::size_t k = 0; k < d * d; ++k) {
    if (!(in >> dense[k])) throw std::runtime_error("matrix load: truncated entries");
    if (!std::isfinite(dense[k])) throw std::runtime_error("matrix load: non-finite entry");
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(dense[i * d + j] - dense[j * d + i]) > 1e-12) {
        std::ostringstream msg;
        msg << "matrix load: asymmetry at (" << i << "," << j << ") exceeds 1e-12";
        throw std::runtime_error(msg.str());
      }
  return SymmetricMatrix::from_dense_lower(d, dense);
}

void save_matrix(const std::string& path, const SymmetricMatrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix(f, m);
}

SymmetricMatrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_matrix(f);
}

}  // namespace misscov
