#include "marchenko/bound_states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "marchenko/errors.hpp"

namespace marchenko {

namespace {

std::string fmt_c(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
  return os.str();
}

bool in_half_plane(cplx lambda, Side side) {
  return side == Side::plus ? lambda.imag() > 0 : lambda.imag() < 0;
}

}  // namespace

bool operator==(const MatrixTriplet& a, const MatrixTriplet& b) {
  return a.A.rows() == b.A.rows() && a.A.cols() == b.A.cols() && a.B.rows() == b.B.rows() &&
         a.C.cols() == b.C.cols() && a.A == b.A && a.B == b.B && a.C == b.C;
}

cplx zeta_for(cplx lambda, Side side) {
  cplx z = std::sqrt(lambda);  // principal branch: Re z >= 0
  if (side == Side::plus && z.imag() < 0) z = -z;
  if (side == Side::minus && z.imag() > 0) z = -z;
  return z;
}

std::vector<cplx> norming_constants(const SpectralResidueData& data, Side side) {
  const std::size_t m = data.residues.size();
  if (m == 0) throw DimensionError("at least one residue is required");
  if (data.dependency_constants.size() != m)
    throw DimensionError("need as many dependency constants as residues");
  if (m >= 4)
    throw UnsupportedMultiplicityError("norming constants from residues are available only for multiplicity <= 3; "
                                       "supply the constants directly instead");
  const cplx zeta = data.zeta;
  const bool quadrant_ok = side == Side::plus ? (zeta.real() > 0 && zeta.imag() > 0)
                                              : (zeta.real() > 0 && zeta.imag() < 0);
  if (!quadrant_ok)
    throw PlacementError("zeta " + fmt_c(zeta) +
                         (side == Side::plus ? " must lie in the first quadrant" : " must lie in the fourth quadrant"));

  const double s = side == Side::plus ? 1.0 : -1.0;
  std::vector<cplx> t(m);
  for (std::size_t k = 0; k < m; ++k) t[k] = s * data.residues[k];
  const auto& g = data.dependency_constants;
  const cplx lam = zeta * zeta;
  const cplx f = -I_unit / zeta;

  std::vector<cplx> c(m);
  if (m == 1) {
    c[0] = f * t[0] * g[0];
  } else if (m == 2) {
    c[1] = f * t[1] * g[0];
    c[0] = f * t[0] * g[0] + f * t[1] * (g[1] - g[0] / (2.0 * lam));
  } else {
    const cplx d1 = g[1] - g[0] / (2.0 * lam);
    const cplx d2 = g[2] - g[1] / lam + 3.0 * g[0] / (4.0 * lam * lam);
    c[2] = f * t[2] * g[0];
    c[1] = f * t[1] * g[0] + f * t[2] * d1;
    c[0] = f * t[0] * g[0] + f * t[1] * d1 + 0.5 * f * t[2] * d2;
  }
  return c;
}

MatrixTriplet assemble_triplet(std::vector<BoundStateSpec> states, Side side) {
  for (const auto& s : states) {
    if (s.side != side) throw PlacementError("bound state " + fmt_c(s.lambda) + " belongs to the other side");
    if (!in_half_plane(s.lambda, side))
      throw PlacementError("bound state " + fmt_c(s.lambda) +
                           (side == Side::plus ? " must have Im(lambda) > 0" : " must have Im(lambda) < 0"));
    if (s.multiplicity < 1) throw DimensionError("multiplicity must be positive");
    if (static_cast<int>(s.norming_constants.size()) != s.multiplicity)
      throw DimensionError("bound state " + fmt_c(s.lambda) + " needs " + std::to_string(s.multiplicity) +
                           " norming constants");
  }
  std::sort(states.begin(), states.end(), [](const BoundStateSpec& a, const BoundStateSpec& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  for (std::size_t j = 1; j < states.size(); ++j)
    if (states[j].lambda == states[j - 1].lambda)
      throw MergeError("duplicate bound state at " + fmt_c(states[j].lambda) + "; give one entry per pole");

  Eigen::Index n = 0;
  for (const auto& s : states) n += s.multiplicity;
  MatrixTriplet t{CMatrix::Zero(n, n), CMatrix::Zero(n, 1), CMatrix::Zero(1, n)};
  Eigen::Index off = 0;
  for (const auto& s : states) {
    const int m = s.multiplicity;
    for (int i = 0; i < m; ++i) {
      t.A(off + i, off + i) = s.lambda;
      if (i + 1 < m) t.A(off + i, off + i + 1) = 1.0;
      t.C(0, off + i) = s.norming_constants[m - 1 - i];
    }
    t.B(off + m - 1, 0) = 1.0;
    off += m;
  }
  return t;
}

void check_shapes(const MatrixTriplet& t, const std::string& name) {
  if (t.A.rows() != t.A.cols()) throw DimensionError(name + ".A must be square");
  if (t.B.rows() != t.A.rows() || t.B.cols() != 1)
    throw DimensionError(name + ".B must be a column of length " + std::to_string(t.A.rows()));
  if (t.C.cols() != t.A.rows() || t.C.rows() != 1)
    throw DimensionError(name + ".C must be a row of length " + std::to_string(t.A.rows()));
}

std::vector<BoundStateSpec> read_off(const MatrixTriplet& t, Side side) {
  check_shapes(t, "triplet");
  if (!is_jordan_form(t.A)) throw DimensionError("A is not in Jordan form");
  std::vector<BoundStateSpec> out;
  const Eigen::Index n = t.A.rows();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start;
    while (end + 1 < n && t.A(end, end + 1) == cplx(1.0)) ++end;
    const int m = static_cast<int>(end - start + 1);
    BoundStateSpec s;
    s.lambda = t.A(start, start);
    s.multiplicity = m;
    s.side = side;
    s.norming_constants.resize(m);
    for (int i = 0; i < m; ++i) s.norming_constants[m - 1 - i] = t.C(0, start + i);
    for (int i = 0; i < m; ++i)
      if (t.B(start + i, 0) != cplx(i == m - 1 ? 1.0 : 0.0))
        throw DimensionError("B is not in the special (0,...,0,1) form");
    out.push_back(std::move(s));
    start = end + 1;
  }
  return out;
}

PairDiagnostics validate_pair(const MatrixTriplet& plus, const MatrixTriplet& minus, bool require_equal_sizes) {
  PairDiagnostics d;
  try {
    check_shapes(plus, "plus");
    check_shapes(minus, "minus");
  } catch (const DimensionError& e) {
    d.errors.push_back(e.what());
    d.placement_ok = d.special_form_ok = false;
    return d;
  }
  auto check = [&](const MatrixTriplet& t, Side side, const char* name) {
    const Eigen::ComplexEigenSolver<CMatrix> es(t.A, false);
    for (Eigen::Index k = 0; k < t.A.rows(); ++k) {
      const cplx ev = is_jordan_form(t.A) ? t.A(k, k) : es.eigenvalues()(k);
      if (!in_half_plane(ev, side)) {
        d.placement_ok = false;
        d.errors.push_back(std::string(name) + " eigenvalue " + fmt_c(ev) + " lies in the wrong half plane");
      }
    }
    if (!is_jordan_form(t.A)) {
      d.special_form_ok = false;
      d.warnings.push_back(std::string(name) + ".A is not in Jordan form");
    } else {
      try {
        const auto specs = read_off(t, side);
        for (std::size_t j = 1; j < specs.size(); ++j)
          for (std::size_t k = 0; k < j; ++k)
            if (specs[j].lambda == specs[k].lambda) {
              d.special_form_ok = false;
              d.warnings.push_back(std::string(name) + " has two Jordan blocks at " + fmt_c(specs[j].lambda));
            }
      } catch (const DimensionError& e) {
        d.special_form_ok = false;
        d.warnings.push_back(std::string(name) + ": " + e.what());
      }
    }
  };
  check(plus, Side::plus, "plus");
  check(minus, Side::minus, "minus");
  if (plus.size() != minus.size()) {
    d.sizes_equal = false;
    if (require_equal_sizes)
      d.warnings.push_back("triplet sizes differ (" + std::to_string(plus.size()) + " vs " +
                           std::to_string(minus.size()) +
                           "): potentials cannot both be Schwartz class when the sizes differ");
  }
  return d;
}

}  // namespace marchenko
