#include "calibcube/ellipse.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "calibcube/error.hpp"

namespace calibcube {

// Partitioned direct fit: split the design matrix into quadratic and linear
// blocks so the ellipse constraint 4AC - B^2 = 1 turns into a 3x3
// eigenproblem with exactly one admissible eigenvector. Points are centered
// on their centroid and scaled to unit mean radius first; this keeps the
// scatter well conditioned and makes the fit translate with the data.
Ellipse fit_ellipse(const std::vector<Point2>& points) {
  const size_t n = points.size();
  if (n < 6) throw CalibError(Errc::TooFewPoints, "ellipse fit needs at least 6 points");

  Point2 centroid = Point2::Zero();
  for (const Point2& p : points) centroid += p;
  centroid /= double(n);
  double scale = 0;
  for (const Point2& p : points) scale += (p - centroid).norm();
  scale /= double(n);
  if (scale <= 0) throw CalibError(Errc::DegenerateConfiguration, "all points coincide");

  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (size_t i = 0; i < n; ++i) {
    Point2 q = (points[i] - centroid) / scale;
    d1(i, 0) = q.x() * q.x();
    d1(i, 1) = q.x() * q.y();
    d1(i, 2) = q.y() * q.y();
    d2(i, 0) = q.x();
    d2(i, 1) = q.y();
    d2(i, 2) = 1.0;
  }
  Eigen::Matrix3d s1 = d1.transpose() * d1;
  Eigen::Matrix3d s2 = d1.transpose() * d2;
  Eigen::Matrix3d s3 = d2.transpose() * d2;

  Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
  if (!lu.isInvertible())
    throw CalibError(Errc::DegenerateConfiguration, "rank-deficient point scatter");
  Eigen::Matrix3d t = -lu.solve(s2.transpose());

  Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> eig(reduced);
  if (eig.info() != Eigen::Success)
    throw CalibError(Errc::DegenerateConfiguration, "conic eigenproblem failed");

  Eigen::Vector3d a1 = Eigen::Vector3d::Zero();
  bool found = false;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(eig.eigenvalues()[k].imag()) > 1e-12) continue;
    Eigen::Vector3d v = eig.eigenvectors().col(k).real();
    double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond > 0) {
      a1 = v;
      found = true;
      break;
    }
  }
  if (!found)
    throw CalibError(Errc::DegenerateConfiguration, "no ellipse satisfies the constraint");

  Eigen::Vector3d a2 = t * a1;
  // Conic a x^2 + b xy + c y^2 + d x + e y + f = 0 in centered coordinates.
  double a = a1(0), b = a1(1), c = a1(2), d = a2(0), e = a2(1), f = a2(2);

  Eigen::Matrix2d quad;
  quad << a, b / 2.0, b / 2.0, c;
  Eigen::Vector2d lin(d / 2.0, e / 2.0);
  Eigen::FullPivLU<Eigen::Matrix2d> qlu(quad);
  if (!qlu.isInvertible())
    throw CalibError(Errc::DegenerateConfiguration, "degenerate conic");
  Eigen::Vector2d center = -qlu.solve(lin);
  double f0 = center.transpose() * quad * center;
  f0 += 2.0 * lin.dot(center) + f;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(quad);
  Eigen::Vector2d lambda = qe.eigenvalues();
  double r0sq = -f0 / lambda(0);
  double r1sq = -f0 / lambda(1);
  if (!(r0sq > 0) || !(r1sq > 0) || !std::isfinite(r0sq) || !std::isfinite(r1sq))
    throw CalibError(Errc::DegenerateConfiguration, "conic is not a real ellipse");

  Ellipse out;
  int major = r0sq >= r1sq ? 0 : 1;
  out.semi_major = std::sqrt(std::max(r0sq, r1sq)) * scale;
  out.semi_minor = std::sqrt(std::min(r0sq, r1sq)) * scale;
  Eigen::Vector2d axis = qe.eigenvectors().col(major);
  double angle = std::atan2(axis.y(), axis.x());
  if (angle >= M_PI / 2.0) angle -= M_PI;
  if (angle < -M_PI / 2.0) angle += M_PI;
  out.angle = angle;
  out.center = center * scale + centroid;
  return out;
}

}  // namespace calibcube
