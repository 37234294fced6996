#include "alvar/genealogy.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace alvar {

namespace {

void check_ancestors(const IndexArray& ancestors, Index n_particles) {
  if (ancestors.size() != n_particles) {
    throw std::invalid_argument("ancestor array length differs from the particle count");
  }
  if ((ancestors < 0).any() || (ancestors >= n_particles).any()) {
    throw std::invalid_argument("invalid ancestor index");
  }
}

void gather(const IndexArray& source, const IndexArray& ancestors, IndexArray& target) {
  target.resize(ancestors.size());
  for (Index i = 0; i < ancestors.size(); ++i) target[i] = source[ancestors[i]];
}

}  // namespace

std::size_t count_distinct(const IndexArray& labels) {
  std::vector<char> seen(static_cast<std::size_t>(labels.size()), 0);
  std::size_t distinct = 0;
  for (Index i = 0; i < labels.size(); ++i) {
    auto& flag = seen[static_cast<std::size_t>(labels[i])];
    if (!flag) {
      flag = 1;
      ++distinct;
    }
  }
  return distinct;
}

EnochWindow::EnochWindow(Index n_particles) : n_particles_(n_particles) {
  if (n_particles < 1) throw std::invalid_argument("EnochWindow: N must be positive");
  rows_.push_back(identity_indices(n_particles));
}

const IndexArray& EnochWindow::row(std::size_t generation) const {
  if (!contains(generation)) {
    throw std::out_of_range("generation " + std::to_string(generation) +
                            " outside Enoch window [" + std::to_string(oldest_generation_) + ", " +
                            std::to_string(newest_generation()) + "]");
  }
  return rows_[generation - oldest_generation_];
}

IndexArray EnochWindow::take_row() {
  if (spare_.empty()) return IndexArray(n_particles_);
  IndexArray r = std::move(spare_.back());
  spare_.pop_back();
  return r;
}

void EnochWindow::truncate(std::size_t max_rows) {
  if (max_rows < 1) throw std::invalid_argument("EnochWindow: max_rows must be positive");
  while (rows_.size() > max_rows) {
    spare_.push_back(std::move(rows_.front()));
    rows_.pop_front();
    ++oldest_generation_;
  }
}

void EnochWindow::advance(const IndexArray& ancestors, std::size_t max_rows) {
  check_ancestors(ancestors, n_particles_);
  if (max_rows < 1) throw std::invalid_argument("EnochWindow: max_rows must be positive");
  // Rows that would fall out after appending are dropped before the gather.
  truncate(max_rows > 1 ? max_rows - 1 : 1);
  if (max_rows == 1) {
    spare_.push_back(std::move(rows_.front()));
    rows_.pop_front();
    ++oldest_generation_;
  } else {
    for (auto& r : rows_) {
      gather(r, ancestors, scratch_);
      r.swap(scratch_);
    }
  }
  IndexArray fresh = take_row();
  for (Index i = 0; i < n_particles_; ++i) fresh[i] = i;
  rows_.push_back(std::move(fresh));
}

std::size_t EnochWindow::distinct_count(std::size_t generation) const {
  return count_distinct(row(generation));
}

void EveTracker::advance(const IndexArray& ancestors) {
  check_ancestors(ancestors, eve_.size());
  gather(eve_, ancestors, scratch_);
  eve_.swap(scratch_);
}

}  // namespace alvar
