#ifndef DCM_QP_DENSE_HPP
#define DCM_QP_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcm {

enum class QpStatus { Optimal, Infeasible, MaxIterations };

inline const char* to_string(QpStatus s)
{
  switch (s) {
  case QpStatus::Optimal: return "optimal";
  case QpStatus::Infeasible: return "infeasible";
  case QpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

class QpDimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class QpNotConvexError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/**
 * minimize 1/2 z'Hz + g'z  s.t.  A_eq z = b_eq,  A_in z <= b_in
 */
template <typename Scalar>
struct QpProblemT
{
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix H;
  Vector g;
  Matrix A_eq;
  Vector b_eq;
  Matrix A_in;
  Vector b_in;

  Eigen::Index num_variables() const { return H.rows(); }

  void validate() const
  {
    const auto n = H.rows();
    auto fail = [](const std::string& what) { throw QpDimensionError("QpProblem: " + what); };
    if (n == 0 || H.cols() != n)
      fail("hessian must be square and non-empty");
    if (g.size() != n)
      fail("gradient size does not match hessian");
    if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n))
      fail("equality block dimensions are inconsistent");
    if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != n))
      fail("inequality block dimensions are inconsistent");
    const Scalar scale = std::max(Scalar(1), H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      fail("hessian is not symmetric");
  }

  Scalar objective(const Vector& z) const { return Scalar(0.5) * z.dot(H * z) + g.dot(z); }
};

template <typename Scalar>
struct QpSolutionT
{
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector z;
  Scalar objective = 0;
  QpStatus status = QpStatus::MaxIterations;
  Scalar kkt_residual = std::numeric_limits<Scalar>::infinity();
  Vector eq_multipliers;
  Vector in_multipliers;
  /// indices into the inequality block that are active at the solution
  std::vector<Eigen::Index> active_set;
  int iterations = 0;
};

/**
 * Worst violation among stationarity, primal feasibility, dual feasibility and
 * complementary slackness, for the sign convention
 *   H z + g + A_eq' lambda + A_in' mu = 0,  mu >= 0.
 */
template <typename Scalar>
Scalar kkt_residual(const QpProblemT<Scalar>& p,
                    const typename QpProblemT<Scalar>::Vector& z,
                    const typename QpProblemT<Scalar>::Vector& lambda,
                    const typename QpProblemT<Scalar>::Vector& mu)
{
  using Vector = typename QpProblemT<Scalar>::Vector;
  Vector stat = p.H * z + p.g;
  if (p.A_eq.rows() > 0)
    stat += p.A_eq.transpose() * lambda;
  if (p.A_in.rows() > 0)
    stat += p.A_in.transpose() * mu;
  Scalar res = stat.cwiseAbs().maxCoeff();
  if (p.A_eq.rows() > 0)
    res = std::max(res, (p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff());
  if (p.A_in.rows() > 0) {
    const Vector slack = p.b_in - p.A_in * z;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      res = std::max(res, std::max(Scalar(0), -slack(i)));
      res = std::max(res, std::max(Scalar(0), -mu(i)));
      res = std::max(res, std::abs(mu(i) * slack(i)));
    }
  }
  return res;
}

/**
 * Dense dual active-set solver (Goldfarb-Idnani) for small convex QPs.
 *
 * The solver keeps its factorization workspace between calls; use one
 * instance per thread. Positive semidefinite Hessians are handled by an outer
 * proximal-point loop; indefinite ones raise QpNotConvexError.
 */
template <typename Scalar>
class DenseQpSolverT
{
public:
  using Problem = QpProblemT<Scalar>;
  using Solution = QpSolutionT<Scalar>;
  using Matrix = typename Problem::Matrix;
  using Vector = typename Problem::Vector;

  Solution solve(const Problem& p, Scalar tol = Scalar(1e-8), int max_iter = 200)
  {
    p.validate();
    if (!(tol > 0))
      throw std::invalid_argument("DenseQpSolver: tolerance must be positive");

    Eigen::LLT<Matrix> llt(p.H);
    if (llt.info() == Eigen::Success && min_pivot_ok(llt))
      return finish(p, solve_strict(p, llt.matrixL(), p.g, tol, max_iter), tol);

    check_convex(p.H);
    return solve_proximal(p, tol, max_iter);
  }

  /**
   * Warm-started solve. The guess is tried as the optimal active set first;
   * if it does not certify optimality the cold path is taken, so the reported
   * optimum never depends on the guess.
   */
  Solution solve(const Problem& p, std::span<const Eigen::Index> active_guess,
                 Scalar tol = Scalar(1e-8), int max_iter = 200)
  {
    p.validate();
    if (auto warm = try_active_set(p, active_guess, tol))
      return *warm;
    return solve(p, tol, max_iter);
  }

private:
  Matrix J_;
  Matrix R_;
  Eigen::Index q_ = 0;

  static bool min_pivot_ok(const Eigen::LLT<Matrix>& llt)
  {
    const auto diag = llt.matrixLLT().diagonal();
    return diag.minCoeff() > std::sqrt(std::numeric_limits<Scalar>::epsilon()) * std::max(Scalar(1), diag.maxCoeff());
  }

  static void check_convex(const Matrix& H)
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    const Scalar scale = std::max(Scalar(1), eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -Scalar(1e-10) * scale)
      throw QpNotConvexError("DenseQpSolver: hessian is not positive semidefinite");
  }

  struct RawResult
  {
    Vector z;
    Vector eq_mult;  // lambda
    Vector in_mult;  // mu
    QpStatus status;
    int iterations;
  };

  Solution finish(const Problem& p, RawResult raw, Scalar tol)
  {
    Solution s;
    s.z = std::move(raw.z);
    s.eq_multipliers = std::move(raw.eq_mult);
    s.in_multipliers = std::move(raw.in_mult);
    s.iterations = raw.iterations;
    s.status = raw.status;
    if (s.status == QpStatus::Infeasible) {
      s.objective = std::numeric_limits<Scalar>::quiet_NaN();
      return s;
    }
    for (Eigen::Index i = 0; i < s.in_multipliers.size(); ++i)
      if (s.in_multipliers(i) > 0)
        s.active_set.push_back(i);
    polish(p, s);
    s.objective = p.objective(s.z);
    s.kkt_residual = kkt_residual(p, s.z, s.eq_multipliers, s.in_multipliers);
    if (s.status == QpStatus::Optimal && s.kkt_residual > tol)
      s.status = QpStatus::MaxIterations;
    return s;
  }

  // Re-solve the KKT system on the final active set; keeps whichever is more accurate.
  void polish(const Problem& p, Solution& s) const
  {
    const Eigen::Index n = p.num_variables();
    const Eigen::Index me = p.A_eq.rows();
    const Eigen::Index ma = static_cast<Eigen::Index>(s.active_set.size());
    Matrix K = Matrix::Zero(n + me + ma, n + me + ma);
    Vector rhs(n + me + ma);
    K.topLeftCorner(n, n) = p.H;
    rhs.head(n) = -p.g;
    for (Eigen::Index i = 0; i < me; ++i) {
      K.block(n + i, 0, 1, n) = p.A_eq.row(i);
      K.block(0, n + i, n, 1) = p.A_eq.row(i).transpose();
      rhs(n + i) = p.b_eq(i);
    }
    for (Eigen::Index k = 0; k < ma; ++k) {
      const Eigen::Index i = s.active_set[static_cast<std::size_t>(k)];
      K.block(n + me + k, 0, 1, n) = p.A_in.row(i);
      K.block(0, n + me + k, n, 1) = p.A_in.row(i).transpose();
      rhs(n + me + k) = p.b_in(i);
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible())
      return;
    const Vector sol = lu.solve(rhs);
    Vector mu = Vector::Zero(p.A_in.rows());
    for (Eigen::Index k = 0; k < ma; ++k)
      mu(s.active_set[static_cast<std::size_t>(k)]) = sol(n + me + k);
    const Vector z = sol.head(n);
    const Vector lambda = sol.segment(n, me);
    if (kkt_residual(p, z, lambda, mu) < kkt_residual(p, s.z, s.eq_multipliers, s.in_multipliers)) {
      s.z = z;
      s.eq_multipliers = lambda;
      s.in_multipliers = mu;
    }
  }

  std::optional<Solution> try_active_set(const Problem& p, std::span<const Eigen::Index> guess, Scalar tol) const
  {
    Solution s;
    for (auto i : guess) {
      if (i < 0 || i >= p.A_in.rows())
        return std::nullopt;
      s.active_set.push_back(i);
    }
    std::sort(s.active_set.begin(), s.active_set.end());
    s.active_set.erase(std::unique(s.active_set.begin(), s.active_set.end()), s.active_set.end());
    s.z = Vector::Zero(p.num_variables());
    s.eq_multipliers = Vector::Zero(p.A_eq.rows());
    s.in_multipliers = Vector::Zero(p.A_in.rows());
    s.kkt_residual = std::numeric_limits<Scalar>::infinity();
    polish(p, s);
    const Scalar res = kkt_residual(p, s.z, s.eq_multipliers, s.in_multipliers);
    if (!(res <= tol))
      return std::nullopt;
    s.kkt_residual = res;
    s.objective = p.objective(s.z);
    s.status = QpStatus::Optimal;
    s.iterations = 0;
    return s;
  }

  Solution solve_proximal(const Problem& p, Scalar tol, int max_iter)
  {
    const Eigen::Index n = p.num_variables();
    const Scalar rho = std::max(Scalar(1e-6), Scalar(1e-3) * p.H.cwiseAbs().maxCoeff());
    Problem reg = p;
    reg.H += rho * Matrix::Identity(n, n);
    Eigen::LLT<Matrix> llt(reg.H);
    Vector z = Vector::Zero(n);
    RawResult raw{z, Vector::Zero(p.A_eq.rows()), Vector::Zero(p.A_in.rows()), QpStatus::MaxIterations, 0};
    int total = 0;
    for (int outer = 0; outer < max_iter; ++outer) {
      reg.g = p.g - rho * z;
      raw = solve_strict(reg, llt.matrixL(), reg.g, tol, max_iter);
      total += raw.iterations;
      if (raw.status != QpStatus::Optimal)
        break;
      const Scalar step = (raw.z - z).cwiseAbs().maxCoeff();
      z = raw.z;
      if (step * rho <= Scalar(0.1) * tol &&
          kkt_residual(p, raw.z, raw.eq_mult, raw.in_mult) <= tol) {
        raw.iterations = total;
        return finish(p, raw, tol);
      }
    }
    if (raw.status == QpStatus::Optimal)
      raw.status = QpStatus::MaxIterations;
    raw.iterations = total;
    return finish(p, raw, tol);
  }

  template <typename LowerView>
  RawResult solve_strict(const Problem& p, const LowerView& L, const Vector& g, Scalar tol, int max_iter)
  {
    const Eigen::Index n = p.num_variables();
    const Eigen::Index me = p.A_eq.rows();
    const Eigen::Index mi = p.A_in.rows();
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    // H^{-1} = J J'
    J_ = L.solve(Matrix::Identity(n, n)).transpose();
    R_ = Matrix::Zero(n, n);
    q_ = 0;

    Vector x = -J_ * (J_.transpose() * g);
    std::vector<Eigen::Index> active;  // < me: equality, else me + inequality index
    std::vector<Scalar> u;

    RawResult out{Vector::Zero(n), Vector::Zero(me), Vector::Zero(mi), QpStatus::Optimal, 0};
    auto infeasible = [&]() {
      out.z = x;
      out.status = QpStatus::Infeasible;
      return out;
    };

    Vector d(n), z(n), r(n);
    auto directions = [&](const Vector& np) {
      d = J_.transpose() * np;
      z = J_.rightCols(n - q_) * d.tail(n - q_);
      r.head(q_) = R_.topLeftCorner(q_, q_).template triangularView<Eigen::Upper>().solve(d.head(q_));
    };

    for (Eigen::Index i = 0; i < me; ++i) {
      const Vector np = p.A_eq.row(i).transpose();
      directions(np);
      const Scalar znp = z.dot(np);
      const Scalar viol = p.b_eq(i) - np.dot(x);
      if (z.norm() <= Scalar(1e3) * eps * np.norm()) {
        // dependent on rows already active
        if (std::abs(viol) > tol)
          return infeasible();
        continue;
      }
      const Scalar t = viol / znp;
      x += t * z;
      for (Eigen::Index k = 0; k < q_; ++k)
        u[static_cast<std::size_t>(k)] -= t * r(k);
      add_constraint(d);
      active.push_back(i);
      u.push_back(t);
    }

    auto normal = [&](Eigen::Index i) -> Vector { return -p.A_in.row(i).transpose(); };
    auto slack = [&](Eigen::Index i) { return p.b_in(i) - p.A_in.row(i).dot(x); };
    auto is_active = [&](Eigen::Index i) {
      return std::find(active.begin(), active.end(), me + i) != active.end();
    };
    auto drop = [&](Eigen::Index l) {
      active.erase(active.begin() + l);
      u.erase(u.begin() + l);
      delete_constraint(l);
    };

    int iter = 0;
    bool exhausted = false;
    while (!exhausted) {
      Eigen::Index p_idx = -1;
      Scalar worst = 0;
      for (Eigen::Index i = 0; i < mi; ++i) {
        if (is_active(i))
          continue;
        const Scalar scale = Scalar(1) + std::abs(p.b_in(i)) + p.A_in.row(i).cwiseAbs().dot(x.cwiseAbs());
        const Scalar s = slack(i);
        if (s < -Scalar(1e2) * eps * scale && s < worst) {
          worst = s;
          p_idx = i;
        }
      }
      if (p_idx < 0)
        break;

      Scalar u_p = 0;
      const Vector np = normal(p_idx);
      for (;;) {
        if (++iter > max_iter) {
          out.status = QpStatus::MaxIterations;
          exhausted = true;
          break;
        }
        directions(np);
        Scalar t1 = std::numeric_limits<Scalar>::infinity();
        Eigen::Index l = -1;
        for (Eigen::Index k = 0; k < q_; ++k) {
          if (active[static_cast<std::size_t>(k)] < me)
            continue;
          if (r(k) > eps * (Scalar(1) + std::abs(u[static_cast<std::size_t>(k)]))) {
            const Scalar ratio = u[static_cast<std::size_t>(k)] / r(k);
            if (ratio < t1) {
              t1 = ratio;
              l = k;
            }
          }
        }
        Scalar t2 = std::numeric_limits<Scalar>::infinity();
        if (z.norm() > Scalar(1e3) * eps * np.norm())
          t2 = -slack(p_idx) / z.dot(np);

        const Scalar t = std::min(t1, t2);
        if (!std::isfinite(t))
          return infeasible();

        if (!std::isfinite(t2)) {
          for (Eigen::Index k = 0; k < q_; ++k)
            u[static_cast<std::size_t>(k)] -= t * r(k);
          u_p += t;
          drop(l);
          continue;
        }

        x += t * z;
        for (Eigen::Index k = 0; k < q_; ++k)
          u[static_cast<std::size_t>(k)] -= t * r(k);
        u_p += t;

        if (t2 <= t1) {
          add_constraint(d);
          active.push_back(me + p_idx);
          u.push_back(u_p);
          break;
        }
        drop(l);
      }
    }

    out.z = x;
    out.iterations = iter;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Eigen::Index id = active[k];
      if (id < me)
        out.eq_mult(id) = -u[k];
      else
        out.in_mult(id - me) = u[k];
    }
    return out;
  }

  void add_constraint(Vector& d)
  {
    const Eigen::Index n = J_.rows();
    for (Eigen::Index j = n - 1; j >= q_ + 1; --j) {
      Scalar cc = d(j - 1);
      Scalar ss = d(j);
      const Scalar h = std::hypot(cc, ss);
      if (h == Scalar(0))
        continue;
      d(j) = 0;
      ss /= h;
      cc /= h;
      if (cc < 0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const Scalar xny = ss / (Scalar(1) + cc);
      for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar t1 = J_(k, j - 1);
        const Scalar t2 = J_(k, j);
        J_(k, j - 1) = t1 * cc + t2 * ss;
        J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
      }
    }
    ++q_;
    R_.col(q_ - 1).head(q_) = d.head(q_);
  }

  void delete_constraint(Eigen::Index l)
  {
    const Eigen::Index n = J_.rows();
    for (Eigen::Index j = l; j < q_ - 1; ++j)
      R_.col(j) = R_.col(j + 1);
    R_.col(q_ - 1).setZero();
    --q_;
    for (Eigen::Index j = l; j < q_; ++j) {
      Scalar cc = R_(j, j);
      Scalar ss = R_(j + 1, j);
      const Scalar h = std::hypot(cc, ss);
      if (h == Scalar(0))
        continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0;
      if (cc < 0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const Scalar xny = ss / (Scalar(1) + cc);
      for (Eigen::Index k = j + 1; k < q_; ++k) {
        const Scalar t1 = R_(j, k);
        const Scalar t2 = R_(j + 1, k);
        R_(j, k) = t1 * cc + t2 * ss;
        R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar t1 = J_(k, j);
        const Scalar t2 = J_(k, j + 1);
        J_(k, j) = t1 * cc + t2 * ss;
        J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
      }
    }
  }
};

using QpProblem = QpProblemT<double>;
using QpSolution = QpSolutionT<double>;
using DenseQpSolver = DenseQpSolverT<double>;

} // namespace dcm

#endif // DCM_QP_DENSE_HPP
