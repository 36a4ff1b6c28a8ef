#include "rdict/matrix.hpp"

#include <algorithm>
#include <string>

#include "rdict/error.hpp"

namespace rdict {

Matrix stack_rows(std::span<const std::vector<double>> rows, std::size_t dim) {
  Matrix m(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim) {
      fail(ErrorCode::kDimensionMismatch,
           "row " + std::to_string(r) + " has length " + std::to_string(rows[r].size()) +
               ", expected " + std::to_string(dim));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

}  // namespace rdict
