#include <benchmark/benchmark.h>

#include <string>
#include <variant>

#include "kbmc/constructor.hpp"
#include "kbmc/evaluator.hpp"
#include "kbmc/logic_engine.hpp"
#include "kbmc/parser.hpp"

namespace {

using namespace kbmc;

const char* kPicnic = R"(
domain weather/2 @1 {fair, cloudy, rainy}.
domain forecast/2 @1 {sunny, rainy}.
domain activity/2 @1 {picnic, work, sleep}.
prior (weather ?w tomorrow) = {fair: 0.5, cloudy: 0.3, rainy: 0.2}.
prob (forecast ?f tomorrow) |p (weather ?w tomorrow) = {
  fair: 0.8, 0.2; cloudy: 0.5, 0.5; rainy: 0.1, 0.9;
}.
info (activity ?a tomorrow) |i (forecast ?f tomorrow).
value (payoff ?v) |v (weather ?w tomorrow), (activity ?a tomorrow) = {
  fair, picnic: 100;  fair, work: 40;  fair, sleep: 30;
  cloudy, picnic: 50; cloudy, work: 40; cloudy, sleep: 35;
  rainy, picnic: 0;   rainy, work: 40;  rainy, sleep: 60;
}.
)";

// Weather chain over days d0..d<n>, one conditional per day.
std::string chain_kb(int n) {
  std::string kb = "domain weather/2 @1 {fair, cloudy, rainy}.\n"
                   "prior (weather ?x d0) = {fair: 0.5, cloudy: 0.3, rainy: 0.2}.\n";
  for (int k = 1; k <= n; ++k) {
    kb += "prob (weather ?x d" + std::to_string(k) + ") |p (weather ?y d" +
          std::to_string(k - 1) +
          ") = { fair: 0.6, 0.3, 0.1; cloudy: 0.3, 0.4, 0.3; rainy: 0.2, 0.3, 0.5; }.\n";
  }
  return kb;
}

// Edges n0 -> n1 -> ... -> n<n> with transitive closure.
std::string path_kb(int n) {
  std::string kb = "logic (path ?x ?y) <- (edge ?x ?y).\n"
                   "logic (path ?x ?z) <- (edge ?x ?y), (path ?y ?z).\n";
  for (int k = 0; k < n; ++k) {
    kb += "fact (edge n" + std::to_string(k) + " n" + std::to_string(k + 1) + ").\n";
  }
  return kb;
}

ConstructionResult build(const Query& q, const KnowledgeBase& kb) {
  return std::get<ConstructionResult>(construct(q, kb));
}

void BM_ParseChain(benchmark::State& state) {
  std::string text = chain_kb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_kb(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseChain)->Arg(10)->Arg(100);

void BM_PicnicConstructAndSolve(benchmark::State& state) {
  KnowledgeBase kb = parse_kb(kPicnic);
  Query q = parse_query("?decide (payoff ?v).");
  for (auto _ : state) benchmark::DoNotOptimize(solve_decision(build(q, kb).diagram));
}
BENCHMARK(BM_PicnicConstructAndSolve);

void BM_ChainConstruct(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  KnowledgeBase kb = parse_kb(chain_kb(n));
  Query q = parse_query("?dist (weather ?x d" + std::to_string(n) + ").");
  for (auto _ : state) benchmark::DoNotOptimize(build(q, kb));
}
BENCHMARK(BM_ChainConstruct)->Arg(4)->Arg(16)->Arg(32);

void BM_ChainSolve(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  KnowledgeBase kb = parse_kb(chain_kb(n));
  ConstructionResult r = build(parse_query("?dist (weather ?x d" + std::to_string(n) + ")."), kb);
  for (auto _ : state) benchmark::DoNotOptimize(solve_distribution(r.diagram, *r.query_node));
}
BENCHMARK(BM_ChainSolve)->Arg(4)->Arg(16)->Arg(32);

void BM_ReverseArc(benchmark::State& state) {
  KnowledgeBase kb = parse_kb(chain_kb(2));
  ConstructionResult r = build(parse_query("?dist (weather ?x d2)."), kb);
  // Reverse the arc into the query node from its parent.
  NodeId child = *r.query_node;
  NodeId parent = r.diagram.node(child).parents.front();
  for (auto _ : state) benchmark::DoNotOptimize(reverse_arc(r.diagram, parent, child));
}
BENCHMARK(BM_ReverseArc);

void BM_ProveTransitiveClosure(benchmark::State& state) {
  KnowledgeBase kb = parse_kb(path_kb(static_cast<int>(state.range(0))));
  std::vector<Proposition> goal = parse_query("?logic (path n0 ?z).").goals;
  for (auto _ : state) benchmark::DoNotOptimize(prove(goal, kb).all());
}
BENCHMARK(BM_ProveTransitiveClosure)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
