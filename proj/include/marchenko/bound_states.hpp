#pragma once

#include <string>
#include <vector>

#include "marchenko/linalg.hpp"

namespace marchenko {

enum class Side { plus, minus };

/// One bound-state pole. plus poles sit in the upper half of the lambda
/// plane, minus poles in the lower half. norming_constants[k] is c_k.
struct BoundStateSpec {
  cplx lambda;
  int multiplicity = 1;
  std::vector<cplx> norming_constants;
  Side side = Side::plus;
  bool operator==(const BoundStateSpec&) const = default;
};

/// Residues t_1..t_m of the transmission coefficient at the pole and the
/// dependency constants gamma_0..gamma_{m-1}.
struct SpectralResidueData {
  cplx zeta;
  std::vector<cplx> residues;
  std::vector<cplx> dependency_constants;
};

/// (A, B, C) with A block-diagonal Jordan, B = stacked (0,...,0,1)^T,
/// C = rows [c_{m-1} ... c_0] per block.
struct MatrixTriplet {
  CMatrix A;
  CMatrix B;
  CMatrix C;

  Eigen::Index size() const { return A.rows(); }
  static MatrixTriplet empty() { return {CMatrix(0, 0), CMatrix(0, 1), CMatrix(1, 0)}; }
};

bool operator==(const MatrixTriplet& a, const MatrixTriplet& b);

/// Principal square root of lambda, then forced into the first quadrant for
/// plus poles and the fourth quadrant for minus poles.
cplx zeta_for(cplx lambda, Side side);

/// Norming constants c_0..c_{m-1} from residues and dependency constants.
/// Only m <= 3 is supported; the minus side uses t -> -t (applied to the
/// barred residues) with the barred zeta and gammas.
std::vector<cplx> norming_constants(const SpectralResidueData& data, Side side);

MatrixTriplet assemble_triplet(std::vector<BoundStateSpec> states, Side side);

/// Inverse of assemble_triplet for special-form triplets.
std::vector<BoundStateSpec> read_off(const MatrixTriplet& t, Side side);

/// Throws DimensionError on inconsistent shapes.
void check_shapes(const MatrixTriplet& t, const std::string& name);

struct PairDiagnostics {
  bool placement_ok = true;
  bool special_form_ok = true;
  bool sizes_equal = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

PairDiagnostics validate_pair(const MatrixTriplet& plus, const MatrixTriplet& minus,
                              bool require_equal_sizes = true);

}  // namespace marchenko
