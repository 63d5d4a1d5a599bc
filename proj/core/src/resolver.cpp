#include "rtcx/resolver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace rtcx {

namespace {

std::string format_fraction(long long micros) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, double(micros) / 1e6);
  return std::string(buf, ptr);
}

}  // namespace

bool ports_compatible(const PortSpec& required, const PortSpec& provided) {
  return required.name == provided.name && required.interface == provided.interface &&
         required.data_type == provided.data_type && required.size == provided.size;
}

ResolutionResult resolve_functional(const Registry& view, Handle candidate,
                                    const std::set<Handle>& excluded) {
  const ComponentInstance& inst = view.at(candidate);
  auto excl = excluded;
  excl.insert(candidate);

  ResolutionResult result;
  for (const auto& inport : inst.descriptor.inports) {
    auto providers = view.find_provider(inport, excl);
    if (providers.empty()) {
      result.unmatched.push_back(inport.name);
      continue;
    }
    // find_provider iterates in id order; the first hit is the lowest id.
    const auto& [provider, outport] = providers.front();
    result.bindings.push_back(Binding{candidate, inport.name, provider, outport.name,
                                      inport.interface});
  }
  return result;
}

CpuBudgetLedger::CpuBudgetLedger(double cap, AdmissionPolicy policy)
    : cap_(cap), cap_micros_(to_micros(cap)), policy_(policy) {}

long long CpuBudgetLedger::to_micros(double fraction) {
  return static_cast<long long>(std::llround(fraction * 1e6));
}

double CpuBudgetLedger::rm_bound(int tasks) {
  if (tasks <= 0) return 1.0;
  return tasks * (std::pow(2.0, 1.0 / tasks) - 1.0);
}

bool CpuBudgetLedger::fits(int cpu, double usage, bool periodic) const {
  auto it = cpus_.find(cpu);
  const CpuLoad load = it == cpus_.end() ? CpuLoad{} : it->second;
  const long long next = load.micros + to_micros(usage);
  if (next > cap_micros_) return false;
  if (policy_ == AdmissionPolicy::RateMonotonic && periodic) {
    const long long bound = to_micros(rm_bound(load.periodic_tasks + 1));
    if (next > bound) return false;
  }
  return true;
}

void CpuBudgetLedger::commit(int cpu, double usage, bool periodic) {
  auto& load = cpus_[cpu];
  load.micros += to_micros(usage);
  if (periodic) ++load.periodic_tasks;
}

void CpuBudgetLedger::release(int cpu, double usage, bool periodic) {
  auto& load = cpus_[cpu];
  load.micros -= to_micros(usage);
  if (periodic) --load.periodic_tasks;
}

long long CpuBudgetLedger::load_micros(int cpu) const {
  auto it = cpus_.find(cpu);
  return it == cpus_.end() ? 0 : it->second.micros;
}

double CpuBudgetLedger::load(int cpu) const { return double(load_micros(cpu)) / 1e6; }

int CpuBudgetLedger::periodic_tasks(int cpu) const {
  auto it = cpus_.find(cpu);
  return it == cpus_.end() ? 0 : it->second.periodic_tasks;
}

int budget_cpu(const ComponentInstance& inst) {
  return inst.descriptor.task ? inst.descriptor.task->run_on_cpu : 0;
}

std::pair<bool, std::string> admit_internal(const Registry& view, Handle candidate,
                                            const CpuBudgetLedger& ledger) {
  const ComponentInstance& inst = view.at(candidate);
  const double usage = inst.descriptor.cpu_usage;
  if (CpuBudgetLedger::to_micros(usage) == 0) return {true, "internal: no cpu claim"};

  const int cpu = budget_cpu(inst);
  const bool periodic = inst.descriptor.task_type == TaskType::Periodic;
  if (ledger.fits(cpu, usage, periodic))
    return {true, "internal: cpu " + std::to_string(cpu) + " load " +
                      format_fraction(ledger.load_micros(cpu)) + " + " +
                      format_fraction(CpuBudgetLedger::to_micros(usage)) + " fits"};
  return {false, "internal: cpu " + std::to_string(cpu) + " load " +
                     format_fraction(ledger.load_micros(cpu)) + " + " +
                     format_fraction(CpuBudgetLedger::to_micros(usage)) + " exceeds budget"};
}

AdmissionDecision admit(const Registry& view, Handle candidate, const CpuBudgetLedger& ledger,
                        ResolvingService* external, std::chrono::milliseconds external_timeout) {
  AdmissionDecision decision;
  auto [internal_ok, internal_reason] = admit_internal(view, candidate, ledger);
  decision.internal_verdict = internal_ok;

  std::string external_reason = "external: none installed";
  if (external) {
    const auto started = std::chrono::steady_clock::now();
    try {
      decision.external_verdict = external->on_admit(view.at(candidate), view);
      external_reason = decision.external_verdict ? "external: accepted" : "external: rejected";
    } catch (const std::exception& e) {
      decision.external_verdict = false;
      external_reason = std::string("external: failure: ") + e.what();
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (elapsed > external_timeout) {
      decision.external_verdict = false;
      external_reason = "external: failure: timeout";
    }
  }

  decision.admitted = decision.internal_verdict && decision.external_verdict;
  if (decision.admitted)
    decision.reason = "admitted: " + internal_reason + "; " + external_reason;
  else if (!decision.internal_verdict)
    decision.reason = "admission-rejected: " + internal_reason;
  else
    decision.reason = "admission-rejected: " + external_reason;
  return decision;
}

std::vector<Handle> cascade_unsatisfied(const Registry& view, Handle departed,
                                        ResolvingService* external,
                                        const LifecycleEvent* event) {
  std::vector<Handle> order;
  std::set<Handle> excluded{departed};

  auto close = [&] {
    // Fixpoint: re-resolve every still-providing instance against the
    // shrinking view; each round removes the instances that fail.
    for (;;) {
      std::vector<Handle> round;
      for (const auto& [id, inst] : view.instances()) {
        if (!inst.provides() || excluded.count(id)) continue;
        if (!resolve_functional(view, id, excluded).satisfied()) round.push_back(id);
      }
      if (round.empty()) break;
      for (Handle id : round) {
        excluded.insert(id);
        order.push_back(id);
      }
    }
  };

  close();

  if (external && event) {
    std::vector<Handle> named;
    try {
      named = external->on_change(*event, view);
    } catch (const std::exception&) {
      named.clear();  // a failing adaptation service must not block the cascade
    }
    std::sort(named.begin(), named.end());
    for (Handle id : named) {
      if (excluded.count(id) || !view.contains(id) || !view.at(id).provides()) continue;
      excluded.insert(id);
      order.push_back(id);
    }
    close();
  }

  return order;
}

}  // namespace rtcx
