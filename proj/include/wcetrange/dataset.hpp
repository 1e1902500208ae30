#pragma once

#include <cstddef>
#include <vector>

#include "wcetrange/scheduler.hpp"
#include "wcetrange/time.hpp"

namespace wcetrange {

/// WCET values of the dataset's columns for one simulation, with its outcome.
struct LabelledRow {
  std::vector<Time> wcets;
  Label label = Label::safe;
  bool operator==(const LabelledRow&) const = default;
};

struct LabelledDataset {
  std::vector<std::size_t> columns;  // task indices, in task-set order
  std::vector<LabelledRow> rows;

  std::size_t count(Label l) const;
  bool operator==(const LabelledDataset&) const = default;
};

/// Projects an assignment onto `columns`.
LabelledRow make_row(const WcetAssignment& w, const std::vector<std::size_t>& columns, Label l);

}  // namespace wcetrange
