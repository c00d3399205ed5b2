#include "semilb/coordinator.hpp"

#include <thread>

namespace semilb {

FinalResult run_coordinator(Coordinator& coordinator, Endpoint& endpoint,
                            std::chrono::microseconds idle_sleep) {
  const auto origin = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count();
  };
  coordinator.start(endpoint, seconds());
  while (!coordinator.done()) {
    if (!coordinator.poll(endpoint, seconds())) std::this_thread::sleep_for(idle_sleep);
  }
  return coordinator.result();
}

}  // namespace semilb
