#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qeval/context.hpp"
#include "qeval/heap_file.hpp"
#include "qeval/types.hpp"

namespace qeval {

/// Ascending lexicographic order over a list of attribute positions.
struct SortKey {
  std::vector<std::size_t> columns;

  static SortKey on(const Schema& schema, std::span<const std::string> names);
  /// Every attribute in schema order, i.e. full-tuple order.
  static SortKey all(const Schema& schema);

  bool less(const Tuple& a, const Tuple& b) const { return compare_on(a, b, columns) < 0; }
};

/// A sorted temporary heap file.
struct Run {
  HeapFile file;

  std::size_t page_count() const noexcept { return file.page_count(); }
  std::uint64_t tuple_count() const noexcept { return file.tuple_count(); }
};

struct SortStats {
  std::size_t runs_created = 0;
  std::size_t merge_passes = 0;
  std::uint64_t phase1_pages_written = 0;
  std::vector<std::uint64_t> pass_pages_written;
  std::size_t peak_pinned_run_generation = 0;
  std::size_t peak_pinned_merge = 0;  // max over every two-run merge
};

inline constexpr std::size_t kInsertionSortThreshold = 16;

/// Quicksort with a median-of-three pivot; slices shorter than 16 elements
/// are finished with insertion sort. Not stable.
template <class T, class Less>
void quicksort(std::span<T> items, Less less) {
  while (items.size() >= kInsertionSortThreshold) {
    const std::size_t n = items.size();
    const std::size_t mid = n / 2;
    if (less(items[mid], items[0])) std::swap(items[mid], items[0]);
    if (less(items[n - 1], items[0])) std::swap(items[n - 1], items[0]);
    if (less(items[n - 1], items[mid])) std::swap(items[n - 1], items[mid]);
    // items[0] <= pivot <= items[n-1] act as sentinels for the scans below.
    std::swap(items[mid], items[n - 2]);
    const T& pivot = items[n - 2];
    std::size_t i = 0;
    std::size_t j = n - 2;
    for (;;) {
      while (less(items[++i], pivot)) {
      }
      while (less(pivot, items[--j])) {
      }
      if (i >= j) break;
      std::swap(items[i], items[j]);
    }
    std::swap(items[i], items[n - 2]);
    auto left = items.first(i);
    auto right = items.subspan(i + 1);
    if (left.size() < right.size()) {
      quicksort(left, less);
      items = right;
    } else {
      quicksort(right, less);
      items = left;
    }
  }
  for (std::size_t i = 1; i < items.size(); ++i) {
    T value = std::move(items[i]);
    std::size_t j = i;
    for (; j > 0 && less(value, items[j - 1]); --j) items[j] = std::move(items[j - 1]);
    items[j] = std::move(value);
  }
}

/// Phase 1: reads the input M pages at a time, sorts each load in memory
/// and writes it as a run. Yields ceil(B / M) runs for a B-page input.
std::vector<Run> generate_runs(ExecContext& ctx, const HeapFile& input, const SortKey& key, std::size_t buffers,
                               SortStats* stats = nullptr);

/// Run generation for projection with duplicate elimination: base tuples
/// are projected on read into a workspace of (M - 1) pages of projected
/// tuples (one frame stays with the input page); each load is sorted in
/// full-tuple order and written without adjacent duplicates.
std::vector<Run> generate_projected_runs(ExecContext& ctx, const HeapFile& input,
                                         std::span<const std::size_t> columns, std::size_t buffers,
                                         SortStats* stats = nullptr);

/// Two-input merge with three frames (two inputs, one output). An exhausted
/// input behaves as an element ordered after everything. With `dedup`, a
/// tuple equal to the last one written is dropped. Throws
/// contract_violation when either input has an adjacent inversion.
Run merge_two_runs(ExecContext& ctx, const Run& a, const Run& b, const SortKey& key, bool dedup = false,
                   SortStats* stats = nullptr);

/// Binary merge passes until one run remains: runs are paired left to
/// right in creation order and an odd last run is carried to the next pass.
/// Inputs are deleted as soon as their merge completes.
HeapFile merge_runs(ExecContext& ctx, std::vector<Run> runs, const Schema& schema, const SortKey& key,
                    bool dedup = false, SortStats* stats = nullptr);

/// Sorted temp copy of `input`. An empty input gives an empty temp file.
HeapFile external_sort(ExecContext& ctx, const HeapFile& input, const SortKey& key, std::size_t buffers,
                       SortStats* stats = nullptr);

}  // namespace qeval
