#pragma once

#include <cstdint>

namespace lcmd {

// Tally of oracle accesses made while answering one query. Owned by the
// caller; never shared between in-flight queries.
class ProbeCounter {
 public:
  void tick(std::uint64_t n = 1) noexcept { probes_ += n; }
  void reset() noexcept { probes_ = 0; }
  std::uint64_t probes() const noexcept { return probes_; }

 private:
  std::uint64_t probes_ = 0;
};

}  // namespace lcmd
