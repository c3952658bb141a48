#pragma once

#include <Eigen/Core>

#include "fks/minimax.hpp"

namespace fks {

/// Discrete minimax fit solved as a linear program.
///
/// Solves the dual of "minimize e subject to |v_i - sum_j c_j x_i^j| <= e" with a
/// dense two-phase simplex (Bland's rule) and reads the polynomial off the
/// optimal simplex multipliers. It shares no code with best_poly_fit beyond
/// Horner evaluation and exists as an independent cross-check.
///
/// Throws OracleError when the simplex fails to terminate at an optimal basis.
PolyFit lp_oracle_fit(const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const Eigen::Ref<const Eigen::VectorXd>& values, int r);

/// Piece-level wrapper with the same conventions as best_poly.
PolynomialPiece lp_oracle_best_poly(const SamplePath& path, Index left, Index right, int r);

}  // namespace fks
