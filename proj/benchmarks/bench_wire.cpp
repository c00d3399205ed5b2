#include <benchmark/benchmark.h>

#include "semilb/transport/message.hpp"

using namespace semilb;

static void BM_EncodeFrame(benchmark::State& state) {
  const Message m{Tag::Work, Rank{3}, Bytes(static_cast<std::size_t>(state.range(0)), 0x5a)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_frame(m));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_EncodeFrame)->Arg(0)->Arg(250)->Arg(125 * 1024);

static void BM_DecodeFrame(benchmark::State& state) {
  const Bytes frame = encode_frame(Message{Tag::Work, Rank{3}, Bytes(static_cast<std::size_t>(state.range(0)), 0x5a)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_frame(frame));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_DecodeFrame)->Arg(0)->Arg(250)->Arg(125 * 1024);
