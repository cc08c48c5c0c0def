#include "recfair/types.hpp"

#include <algorithm>

namespace recfair {

SparseMatrix::SparseMatrix(int n_users, int n_items,
                           std::vector<Entry> entries)
    : n_users_(n_users), n_items_(n_items), entries_(std::move(entries)) {
  if (n_users_ < 0 || n_items_ < 0) {
    throw data_error("negative matrix dimensions");
  }
  for (const auto& e : entries_) {
    if (e.user < 0 || e.user >= n_users_ || e.item < 0 || e.item >= n_items_) {
      throw data_error("entry id out of range");
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].user == entries_[i - 1].user &&
        entries_[i].item == entries_[i - 1].item) {
      throw data_error("duplicate (user, item) entry");
    }
  }

  row_ptr_.assign(n_users_ + 1, 0);
  col_ptr_.assign(n_items_ + 1, 0);
  for (const auto& e : entries_) {
    ++row_ptr_[e.user + 1];
    ++col_ptr_[e.item + 1];
  }
  for (int u = 0; u < n_users_; ++u) row_ptr_[u + 1] += row_ptr_[u];
  for (int i = 0; i < n_items_; ++i) col_ptr_[i + 1] += col_ptr_[i];

  row_cells_.resize(entries_.size());
  col_cells_.resize(entries_.size());
  std::vector<std::size_t> col_fill(col_ptr_.begin(), col_ptr_.end() - 1);
  std::size_t pos = 0;
  double sum = 0.0;
  for (const auto& e : entries_) {
    row_cells_[pos++] = Cell{e.item, e.value};
    col_cells_[col_fill[e.item]++] = Cell{e.user, e.value};
    sum += e.value;
  }
  global_mean_ = entries_.empty() ? 0.0 : sum / static_cast<double>(entries_.size());
}

bool SparseMatrix::has(int user, int item) const {
  auto cells = row(user);
  auto it = std::lower_bound(
      cells.begin(), cells.end(), item,
      [](const Cell& c, int i) { return c.index < i; });
  return it != cells.end() && it->index == item;
}

}  // namespace recfair
