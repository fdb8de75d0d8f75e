#include "gbpf/errors.hpp"

#include <sstream>

namespace gbpf {

namespace {

std::string gap_message(char table, std::int64_t k, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "negative gap probability: " << table << "[" << k << "] = " << value;
  return os.str();
}

}  // namespace

NegativeGapProbability::NegativeGapProbability(char table, std::int64_t k, double value)
    : Error(gap_message(table, k, value)), table_(table), k_(k), value_(value) {}

}  // namespace gbpf
