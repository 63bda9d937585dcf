#include "fedsim/error.hpp"

namespace fedsim {
namespace {

template <typename E>
bool try_rethrow(const Error& e, const std::string& msg) {
  if (dynamic_cast<const E*>(&e) != nullptr) throw E(msg);
  return false;
}

}  // namespace

void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string msg = context + ": " + e.what();
  try_rethrow<ZeroMassError>(e, msg);
  try_rethrow<DimensionError>(e, msg);
  try_rethrow<DomainError>(e, msg);
  try_rethrow<InfeasibleError>(e, msg);
  try_rethrow<EmptyClassError>(e, msg);
  try_rethrow<NumericalError>(e, msg);
  try_rethrow<FormatError>(e, msg);
  try_rethrow<IoError>(e, msg);
  try_rethrow<ConfigError>(e, msg);
  throw Error(msg);
}

}  // namespace fedsim
