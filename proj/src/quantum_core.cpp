#include "entlab/quantum_core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "entlab/errors.hpp"

namespace entlab {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

PureTwoQubit::PureTwoQubit(const Vec4& amplitudes) : amplitudes_(amplitudes) {
  if (!amplitudes.allFinite()) throw InvalidArgument("PureTwoQubit: non-finite amplitude");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > kNormTolerance)
    throw InvalidArgument("PureTwoQubit: squared norm differs from 1");
}

PureTwoQubit PureTwoQubit::normalized(const Vec4& amplitudes) {
  const double n = amplitudes.norm();
  if (!std::isfinite(n) || n == 0.0) throw InvalidArgument("PureTwoQubit: cannot normalize");
  return PureTwoQubit(amplitudes / n);
}

void check_density_matrix(const Mat4& m, double tolerance) {
  if (!m.allFinite()) throw InvalidArgument("density matrix: non-finite entry");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerance)
    throw InvalidArgument("density matrix: not Hermitian");
  if (std::abs(m.trace() - Complex(1.0, 0.0)) > tolerance)
    throw InvalidArgument("density matrix: trace differs from 1");
  const Mat4 h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tolerance)
    throw InvalidArgument("density matrix: negative eigenvalue");
}

TwoQubitState::TwoQubitState(const Mat4& matrix) : matrix_(matrix) { check_density_matrix(matrix_); }

TwoQubitState TwoQubitState::from_pure(const PureTwoQubit& psi) {
  const Vec4& v = psi.amplitudes();
  return TwoQubitState(v * v.adjoint());
}

TwoQubitState TwoQubitState::maximally_mixed() { return TwoQubitState(Mat4::Identity() / 4.0); }

std::string_view to_string(BasisLabel label) {
  switch (label) {
    case BasisLabel::zero: return "zero";
    case BasisLabel::one: return "one";
    case BasisLabel::plus: return "plus";
    case BasisLabel::minus: return "minus";
    case BasisLabel::u: return "u";
    case BasisLabel::d: return "d";
  }
  return "?";
}

std::optional<BasisLabel> parse_basis_label(std::string_view text) {
  for (BasisLabel l : {BasisLabel::zero, BasisLabel::one, BasisLabel::plus, BasisLabel::minus,
                       BasisLabel::u, BasisLabel::d})
    if (text == to_string(l)) return l;
  return std::nullopt;
}

MeasBasisState::MeasBasisState(BasisLabel label) : label_(label) {
  const Complex i{0.0, 1.0};
  switch (label) {
    case BasisLabel::zero: ket_ << 1.0, 0.0; break;
    case BasisLabel::one: ket_ << 0.0, 1.0; break;
    case BasisLabel::plus: ket_ << kInvSqrt2, kInvSqrt2; break;
    case BasisLabel::minus: ket_ << kInvSqrt2, -kInvSqrt2; break;
    case BasisLabel::u: ket_ << kInvSqrt2, i * kInvSqrt2; break;
    case BasisLabel::d: ket_ << kInvSqrt2, -i * kInvSqrt2; break;
  }
}

MeasBasisState::MeasBasisState(Complex alpha, Complex beta) {
  ket_ << alpha, beta;
  const double n = ket_.norm();
  if (!std::isfinite(n) || n == 0.0) throw InvalidArgument("MeasBasisState: zero vector");
  ket_ /= n;
}

PureTwoQubit psi_gamma(Complex gamma) {
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag()))
    throw InvalidArgument("psi_gamma: gamma must be finite");
  const double s = 1.0 / std::sqrt(1.0 + std::norm(gamma));
  Vec4 v;
  v << s, 0.0, 0.0, gamma * s;
  return PureTwoQubit(v);
}

double born_probability(const TwoQubitState& state, const MeasBasisState& a,
                        const MeasBasisState& b) {
  const Vec4 ab = product_ket(a.ket(), b.ket());
  const double p = (ab.adjoint() * state.matrix() * ab)(0, 0).real();
  if (p < -kPsdTolerance || p > 1.0 + kPsdTolerance)
    throw DomainError("born_probability: result outside [0, 1]; state is not physical");
  return std::clamp(p, 0.0, 1.0);
}

double purity(const TwoQubitState& state) {
  return (state.matrix() * state.matrix()).trace().real();
}

double fidelity_to_pure(const TwoQubitState& state, const PureTwoQubit& target) {
  const Vec4& v = target.amplitudes();
  return std::clamp((v.adjoint() * state.matrix() * v)(0, 0).real(), 0.0, 1.0);
}

double trace_distance(const Mat4& a, const Mat4& b) {
  const Mat4 diff = a - b;
  const Mat4 h = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Vec4 product_ket(const Vec2& a, const Vec2& b) {
  Vec4 v;
  v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  return v;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Mat4 apply_local(const Mat4& rho, const Mat2& ua, const Mat2& ub) {
  const Mat4 u = kron(ua, ub);
  return u * rho * u.adjoint();
}

Mat4 swap_operator() {
  Mat4 s = Mat4::Zero();
  s(0, 0) = 1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 3) = 1.0;
  return s;
}

Mat4 project_to_density(const Mat4& m) {
  const Mat4 h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 0.0)) throw NumericalError("project_to_density: no positive eigenvalue");
  ev /= total;
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

void SourceSpectrum::validate() const {
  if (m_max < 0) throw InvalidArgument("SourceSpectrum: m_max must be >= 0");
  if (!(excitation_probability > 0.0 && excitation_probability <= 0.1))
    throw InvalidArgument("SourceSpectrum: excitation_probability must lie in (0, 0.1]");
  double total = 0.0;
  for (const auto& [m, c] : coefficients) {
    if (std::abs(m) > m_max) throw InvalidArgument("SourceSpectrum: |m| exceeds m_max");
    total += std::norm(c);
  }
  if (total == 0.0) throw InvalidArgument("SourceSpectrum: all-zero spectrum");
  if (std::abs(total - 1.0) > 1e-10)
    throw InvalidArgument("SourceSpectrum: sum of |C_m|^2 differs from 1");
}

Complex QuditPairState::amplitude(int m_as, int m_atom) const {
  if (std::abs(m_as) > m_max || std::abs(m_atom) > m_max) return 0.0;
  return amplitudes((m_as + m_max) * dim() + (m_atom + m_max));
}

QuditPairState truncated_source_state(const SourceSpectrum& spectrum) {
  spectrum.validate();
  QuditPairState out;
  out.m_max = spectrum.m_max;
  const int dim = out.dim();
  out.amplitudes = Eigen::VectorXcd::Zero(dim * dim);
  for (const auto& [m, c] : spectrum.coefficients)
    out.amplitudes((m + out.m_max) * dim + (-m + out.m_max)) = c;
  out.amplitudes /= out.amplitudes.norm();
  return out;
}

PureTwoQubit embed_two_qubit(const QuditPairState& state, double tolerance) {
  if (state.m_max < 1) {
    Vec4 v = Vec4::Zero();
    v(0) = state.amplitude(0, 0);
    return PureTwoQubit::normalized(v);
  }
  const Complex c00 = state.amplitude(0, 0);
  const Complex c11 = state.amplitude(1, -1);
  const double outside = state.amplitudes.squaredNorm() - std::norm(c00) - std::norm(c11);
  if (outside > tolerance)
    throw DomainError("embed_two_qubit: state has weight outside span{|0,0>, |+1,-1>}");
  Vec4 v;
  v << c00, 0.0, 0.0, c11;
  return PureTwoQubit::normalized(v);
}

double entanglement_entropy(const QuditPairState& state) {
  const int dim = state.dim();
  Eigen::MatrixXcd coeff(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) coeff(a, b) = state.amplitudes(a * dim + b);
  const Eigen::MatrixXcd reduced = coeff * coeff.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(reduced, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam > 1e-300) s -= lam * std::log2(lam);
  }
  return s;
}

}  // namespace entlab
