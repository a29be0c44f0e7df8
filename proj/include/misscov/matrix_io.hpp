#pragma once

#include <iosfwd>
#include <string>

#include "misscov/symmetric_matrix.hpp"

namespace misscov {

// Fixture text format: first line "d", then d lines of d whitespace-separated
// decimals. Loading validates |m_ij - m_ji| <= 1e-12 and finiteness; the lower
// triangle is what gets stored.
void write_matrix(std::ostream& out, const SymmetricMatrix& m);
SymmetricMatrix read_matrix(std::istream& in);

void save_matrix(const std::string& path, const SymmetricMatrix& m);
SymmetricMatrix load_matrix(const std::string& path);

}  // namespace misscov
