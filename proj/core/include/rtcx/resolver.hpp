#pragma once

#include "rtcx/registry.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rtcx {

/// Port compatibility: name, interface, data type and size must all match.
bool ports_compatible(const PortSpec& required, const PortSpec& provided);

struct ResolutionResult {
  std::vector<Binding> bindings;       // one per inport when satisfied
  std::vector<std::string> unmatched;  // inport names without a provider

  bool satisfied() const { return unmatched.empty(); }
};

/// Resolves every inport of `candidate` against providers in the view
/// (ACTIVE or SUSPENDED instances, minus `excluded` and the candidate
/// itself). Among multiple compatible providers the lowest instance id wins,
/// so resolution is deterministic and replayable.
ResolutionResult resolve_functional(const Registry& view, Handle candidate,
                                    const std::set<Handle>& excluded = {});

enum class AdmissionPolicy { Utilization, RateMonotonic };

/// Central CPU budget book-keeping. Loads are kept in exact micro-CPU units
/// (1e-6 of a core) so that commit/release arithmetic never drifts.
class CpuBudgetLedger {
 public:
  explicit CpuBudgetLedger(double cap = 1.0,
                           AdmissionPolicy policy = AdmissionPolicy::Utilization);

  /// Would `usage` fit on `cpu` under the configured policy?
  bool fits(int cpu, double usage, bool periodic = true) const;
  void commit(int cpu, double usage, bool periodic = true);
  void release(int cpu, double usage, bool periodic = true);

  long long load_micros(int cpu) const;
  double load(int cpu) const;
  int periodic_tasks(int cpu) const;
  double cap() const { return cap_; }
  AdmissionPolicy policy() const { return policy_; }

  static long long to_micros(double fraction);
  /// Liu-Layland utilization bound n(2^(1/n) - 1).
  static double rm_bound(int tasks);

 private:
  struct CpuLoad {
    long long micros = 0;
    int periodic_tasks = 0;
  };
  std::map<int, CpuLoad> cpus_;
  double cap_;
  long long cap_micros_;
  AdmissionPolicy policy_;
};

/// Verdict of the internal plus the (optional) external resolving service.
struct AdmissionDecision {
  bool admitted = false;
  bool internal_verdict = false;
  bool external_verdict = true;  // vacuously true when no external service
  std::string reason;            // machine-readable code + human text
};

/// Pluggable admission/adaptation policy consulted by the executive.
/// Implementations run on the executive's event loop and must return within
/// the configured timeout; an implementation that throws (or overruns the
/// timeout) vetoes admission.
class ResolvingService {
 public:
  virtual ~ResolvingService() = default;

  virtual bool on_admit(const ComponentInstance& candidate, const Registry& view) = 0;

  /// Instances the service deems unsatisfiable after `event`.
  virtual std::vector<Handle> on_change(const LifecycleEvent& event, const Registry& view) {
    (void)event;
    (void)view;
    return {};
  }
};

/// CPU that an instance's budget is charged to (the declared task CPU;
/// aperiodic components are accounted on CPU 0).
int budget_cpu(const ComponentInstance& inst);

/// Internal admission: would the candidate's claimed cpu_usage still fit its
/// CPU? Does not mutate the ledger; the executive commits at activation.
std::pair<bool, std::string> admit_internal(const Registry& view, Handle candidate,
                                            const CpuBudgetLedger& ledger);

/// Consults the internal policy and the external service; admitted iff both
/// agree. An external failure (exception or timeout) counts as a veto.
AdmissionDecision admit(const Registry& view, Handle candidate, const CpuBudgetLedger& ledger,
                        ResolvingService* external = nullptr,
                        std::chrono::milliseconds external_timeout = std::chrono::milliseconds(100));

/// Transitive closure of ACTIVE/SUSPENDED instances whose functional
/// constraints fail once `departed` (and earlier closure members) are gone,
/// in deactivation-safe order, unioned with instances named by the external
/// service for `event`.
std::vector<Handle> cascade_unsatisfied(const Registry& view, Handle departed,
                                        ResolvingService* external = nullptr,
                                        const LifecycleEvent* event = nullptr);

}  // namespace rtcx
