#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "alvar/types.hpp"

namespace alvar {

/// Rolling window of Enoch index rows.
///
/// Row for generation m holds, for every particle i of the reference
/// generation r, the index of its ancestor at generation m. The newest row
/// (m = r) is always the identity. Generations are counted in filter steps for
/// the plain estimator and in resampling events for the adaptive one.
///
/// Storage is bounded by the retained row count times N; dropped rows go to a
/// spare pool and are reused, so a steady-state advance never allocates.
class EnochWindow {
 public:
  explicit EnochWindow(Index n_particles);

  Index particle_count() const { return n_particles_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t oldest_generation() const { return oldest_generation_; }
  std::size_t newest_generation() const { return oldest_generation_ + rows_.size() - 1; }
  bool contains(std::size_t generation) const {
    return generation >= oldest_generation_ && generation <= newest_generation();
  }

  /// Row of ancestor labels at the given generation; throws std::out_of_range
  /// outside the window.
  const IndexArray& row(std::size_t generation) const;

  /// Compose every retained row with the ancestor map of a new generation,
  /// append the identity row and keep at most max_rows rows (oldest dropped).
  void advance(const IndexArray& ancestors, std::size_t max_rows);

  /// Drop oldest rows until at most max_rows remain (max_rows >= 1).
  void truncate(std::size_t max_rows);

  std::size_t distinct_count(std::size_t generation) const;

 private:
  IndexArray take_row();

  Index n_particles_;
  std::size_t oldest_generation_ = 0;
  std::deque<IndexArray> rows_;
  std::vector<IndexArray> spare_;
  IndexArray scratch_;
};

/// Number of distinct values in a label row.
std::size_t count_distinct(const IndexArray& labels);

/// Persistent time-0 ancestor row, updated in O(N) per selection.
class EveTracker {
 public:
  explicit EveTracker(Index n_particles) : eve_(identity_indices(n_particles)) {}
  void advance(const IndexArray& ancestors);
  const IndexArray& labels() const { return eve_; }
  std::size_t distinct_count() const { return count_distinct(eve_); }

 private:
  IndexArray eve_;
  IndexArray scratch_;
};

}  // namespace alvar
