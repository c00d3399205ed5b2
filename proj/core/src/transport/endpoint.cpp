#include "semilb/transport/endpoint.hpp"

namespace semilb {

std::vector<Delivery> Endpoint::sim_advance(int /*ticks*/) {
  throw UnsupportedOperation("sim_advance is only available on the simulated transport");
}

void Endpoint::broadcast_async(Tag tag, const Bytes& payload) {
  if (!rank().is_center()) throw ContractViolation("broadcast_async is reserved to the center");
  for (int w = 1; w <= worker_count(); ++w) send_async(Rank{w}, tag, payload);
}

}  // namespace semilb
