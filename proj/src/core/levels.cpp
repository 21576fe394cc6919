#include "core/levels.hpp"

#include <cmath>
#include <stdexcept>

namespace ucs {

AdaptiveAlphabet AdaptiveAlphabet::from_sequence(const Vector& levels,
                                                 const SymbolSeq& u) {
  AdaptiveAlphabet a;
  a.levels = levels;
  a.population.assign(static_cast<std::size_t>(levels.size()), 0);
  for (Symbol s : u) {
    if (s >= a.population.size())
      throw std::invalid_argument("sequence symbol outside the alphabet");
    ++a.population[s];
  }
  return a;
}

LevelSolver::LevelSolver(const Matrix& phi, const Vector& y,
                         const SymbolSeq& u, std::size_t alphabet_size)
    : phi_(&phi), y_(&y) {
  if (phi.rows() != y.size())
    throw std::invalid_argument("operator height does not match y");
  if (static_cast<std::size_t>(phi.cols()) != u.size())
    throw std::invalid_argument("operator width does not match sequence");
  mu_.resize(phi.rows(), static_cast<Eigen::Index>(alphabet_size));
  omega_.resize(static_cast<Eigen::Index>(alphabet_size),
                static_cast<Eigen::Index>(alphabet_size));
  theta_.resize(static_cast<Eigen::Index>(alphabet_size));
  rebuild(u);
}

void LevelSolver::rebuild(const SymbolSeq& u) {
  mu_.setZero();
  population_.assign(alphabet_size(), 0);
  for (std::size_t n = 0; n < u.size(); ++n) {
    Symbol s = u[n];
    if (s >= alphabet_size())
      throw std::invalid_argument("sequence symbol outside the alphabet");
    mu_.col(s) += phi_->col(static_cast<Eigen::Index>(n));
    ++population_[s];
  }
  omega_.noalias() = mu_.transpose() * mu_;
  theta_.noalias() = mu_.transpose() * (*y_);
  undo_.valid = false;
}

void LevelSolver::refresh_cross_terms(Symbol a, Symbol b) {
  omega_.col(a).noalias() = mu_.transpose() * mu_.col(a);
  omega_.row(a) = omega_.col(a).transpose();
  omega_.col(b).noalias() = mu_.transpose() * mu_.col(b);
  omega_.row(b) = omega_.col(b).transpose();
  theta_[a] = mu_.col(a).dot(*y_);
  theta_[b] = mu_.col(b).dot(*y_);
}

void LevelSolver::update_symbol(std::size_t n, Symbol old_sym, Symbol new_sym) {
  if (old_sym >= alphabet_size() || new_sym >= alphabet_size())
    throw std::invalid_argument("symbol outside the alphabet");
  if (n >= static_cast<std::size_t>(phi_->cols()))
    throw std::invalid_argument("column index out of range");
  if (old_sym == new_sym) return;

  if (undo_.valid && undo_.n == n && undo_.old_sym == new_sym &&
      undo_.new_sym == old_sym) {
    // Exact inverse of the previous move: restore the saved slices.
    mu_.col(new_sym) = undo_.mu_old_col;
    mu_.col(old_sym) = undo_.mu_new_col;
    omega_.col(new_sym) = undo_.omega_old_col;
    omega_.row(new_sym) = undo_.omega_old_col.transpose();
    omega_.col(old_sym) = undo_.omega_new_col;
    omega_.row(old_sym) = undo_.omega_new_col.transpose();
    theta_[new_sym] = undo_.theta_old;
    theta_[old_sym] = undo_.theta_new;
    population_[new_sym] = undo_.pop_old;
    population_[old_sym] = undo_.pop_new;
    undo_.valid = false;
    return;
  }

  undo_.valid = true;
  undo_.n = n;
  undo_.old_sym = old_sym;
  undo_.new_sym = new_sym;
  undo_.mu_old_col = mu_.col(old_sym);
  undo_.mu_new_col = mu_.col(new_sym);
  undo_.omega_old_col = omega_.col(old_sym);
  undo_.omega_new_col = omega_.col(new_sym);
  undo_.theta_old = theta_[old_sym];
  undo_.theta_new = theta_[new_sym];
  undo_.pop_old = population_[old_sym];
  undo_.pop_new = population_[new_sym];

  mu_.col(old_sym) -= phi_->col(static_cast<Eigen::Index>(n));
  mu_.col(new_sym) += phi_->col(static_cast<Eigen::Index>(n));
  --population_[old_sym];
  ++population_[new_sym];
  refresh_cross_terms(old_sym, new_sym);
}

std::optional<Vector> LevelSolver::solve(const Vector& prev_levels) const {
  const std::size_t z = alphabet_size();
  if (static_cast<std::size_t>(prev_levels.size()) != z)
    throw std::invalid_argument("previous level vector has the wrong length");

  std::vector<Eigen::Index> active;
  active.reserve(z);
  for (std::size_t b = 0; b < z; ++b)
    if (population_[b] > 0) active.push_back(static_cast<Eigen::Index>(b));
  if (active.empty()) return prev_levels;

  const Eigen::Index k = static_cast<Eigen::Index>(active.size());
  Matrix sub(k, k);
  Vector rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs[i] = theta_[active[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < k; ++j)
      sub(i, j) = omega_(active[static_cast<std::size_t>(i)],
                         active[static_cast<std::size_t>(j)]);
  }
  const double ridge =
      ridge_scale > 0.0 ? ridge_scale * sub.trace() / static_cast<double>(k)
                        : 0.0;
  sub.diagonal().array() += ridge;

  Eigen::LDLT<Matrix> ldlt(sub);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  Vector sol = ldlt.solve(rhs);
  if (!sol.allFinite()) return std::nullopt;

  Vector out = prev_levels;
  for (Eigen::Index i = 0; i < k; ++i)
    out[active[static_cast<std::size_t>(i)]] = sol[i];
  return out;
}

double LevelSolver::fast_residual(const Vector& levels) const {
  if (levels.size() != static_cast<Eigen::Index>(alphabet_size()))
    throw std::invalid_argument("level vector has the wrong length");
  return (*y_ - mu_ * levels).squaredNorm();
}

}  // namespace ucs
