#include "rtcx/executive.hpp"

#include "rtcx/event_log.hpp"
#include "support.hpp"

#include <doctest.h>

#include <functional>
#include <random>
#include <thread>

using namespace rtcx;

namespace {

ComponentDescriptor calc_desc(double usage = 0.0) {
  auto d = test::periodic("calc", 1000, 0, 1, usage);
  d.bincode = "rtcx.builtin.Calculation";
  d.outports.push_back(
      test::outport("latdat", PortInterface::SharedMemory, PortDataType::Integer, 2));
  return d;
}

ComponentDescriptor display_desc(double usage = 0.0) {
  auto d = test::periodic("displa", 4, 0, 2, usage);
  d.bincode = "rtcx.builtin.Display";
  d.inports.push_back(
      test::inport("latdat", PortInterface::SharedMemory, PortDataType::Integer, 2));
  return d;
}

ExecError::Code code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ExecError& e) {
    return e.code();
  }
  FAIL("expected ExecError");
  return ExecError::Code::UnknownId;
}

// Ledger load must equal the exact sum over ACTIVE and SUSPENDED instances.
void check_ledger_conservation(Executive& exec) {
  auto reg = exec.snapshot();
  auto ledger = exec.ledger_snapshot();
  std::map<int, long long> expected;
  for (const auto& [id, inst] : reg.instances()) {
    if (!inst.provides()) continue;
    expected[budget_cpu(inst)] += CpuBudgetLedger::to_micros(inst.descriptor.cpu_usage);
  }
  for (const auto& [cpu, micros] : expected) CHECK(ledger.load_micros(cpu) == micros);
  for (int cpu = 0; cpu < 4; ++cpu) {
    const auto load = ledger.load_micros(cpu);
    CHECK(load >= 0);
    CHECK(load <= CpuBudgetLedger::to_micros(ledger.cap()));
    if (!expected.count(cpu)) CHECK(load == 0);
  }
}

void check_no_unbound_active_inports(Executive& exec) {
  auto reg = exec.snapshot();
  for (const auto& [id, inst] : reg.instances()) {
    if (!inst.provides()) continue;
    for (const auto& port : inst.descriptor.inports) {
      const bool bound =
          std::any_of(inst.bindings.begin(), inst.bindings.end(),
                      [&](const Binding& b) { return b.consumer_port == port.name; });
      CHECK(bound);
    }
    for (const auto& b : inst.bindings) CHECK(reg.contains(b.provider));
  }
}

}  // namespace

TEST_CASE("install resolves enabled components immediately") {
  Executive exec;

  SUBCASE("no dependencies, budget free -> SATISFIED") {
    auto [id, changes] = exec.install(calc_desc());
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].from == LifecycleState::Registered);
    CHECK(changes[0].to == LifecycleState::Satisfied);
    CHECK(exec.state_of(id) == LifecycleState::Satisfied);
  }
  SUBCASE("missing provider -> UNSATISFIED") {
    auto [id, changes] = exec.install(display_desc());
    CHECK(exec.state_of(id) == LifecycleState::Unsatisfied);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].reason.find("latdat") != std::string::npos);
  }
  SUBCASE("enabled=false stays REGISTERED") {
    auto d = calc_desc();
    d.enabled = false;
    auto [id, changes] = exec.install(d);
    CHECK(exec.state_of(id) == LifecycleState::Registered);
  }
  SUBCASE("duplicate name is refused") {
    exec.install(calc_desc());
    CHECK(code_of([&] { exec.install(calc_desc()); }) == ExecError::Code::DuplicateName);
  }
}

TEST_CASE("enable triggers resolution from REGISTERED") {
  Executive exec;
  auto disabled = calc_desc();
  disabled.enabled = false;
  auto [id, ignore] = exec.install(disabled);

  SUBCASE("dependencies met -> SATISFIED") {
    auto changes = exec.enable(id);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].to == LifecycleState::Satisfied);
  }
  SUBCASE("missing provider -> UNSATISFIED") {
    auto d = display_desc();
    d.enabled = false;
    auto [did, ignore2] = exec.install(d);
    auto changes = exec.enable(did);
    REQUIRE(changes.size() == 1);
    CHECK(changes[0].to == LifecycleState::Unsatisfied);
  }
  SUBCASE("enable out of REGISTERED is a wrong state") {
    exec.enable(id);
    CHECK(code_of([&] { exec.enable(id); }) == ExecError::Code::WrongState);
  }
}

TEST_CASE("start activates and re-resolves waiting consumers") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  auto [display, c2] = exec.install(display_desc());
  CHECK(exec.state_of(display) == LifecycleState::Unsatisfied);

  auto changes = exec.start(calc);
  // calc SATISFIED->ACTIVE, then display UNSATISFIED->SATISFIED via the
  // provider-appeared pass (no auto-start: display was never started).
  REQUIRE(changes.size() == 2);
  CHECK(changes[0].id == calc);
  CHECK(changes[0].to == LifecycleState::Active);
  CHECK(changes[1].id == display);
  CHECK(changes[1].to == LifecycleState::Satisfied);

  auto started = exec.start(display);
  REQUIRE(started.size() == 1);
  CHECK(exec.state_of(display) == LifecycleState::Active);
  auto reg = exec.snapshot();
  CHECK(reg.at(display).bindings.size() == 1);
  CHECK(reg.at(display).bindings[0].provider == calc);
  check_no_unbound_active_inports(exec);
  check_ledger_conservation(exec);
}

TEST_CASE("start re-validates admission and rejects over-budget claims") {
  Executive exec;
  auto [big, c1] = exec.install(test::periodic("big", 100, 0, 1, 0.7));
  auto [small, c2] = exec.install(test::periodic("small", 100, 0, 2, 0.5));
  CHECK(exec.state_of(big) == LifecycleState::Satisfied);
  CHECK(exec.state_of(small) == LifecycleState::Satisfied);

  exec.start(big);
  auto changes = exec.start(small);  // 0.7 + 0.5 > 1.0
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].to == LifecycleState::Unsatisfied);
  CHECK(changes[0].reason.find("admission-rejected") != std::string::npos);
  check_ledger_conservation(exec);

  SUBCASE("budget frees on stop and the victim is re-admitted") {
    exec.stop(big);
    // start() recorded small's intent even though admission was rejected,
    // so the freed budget lets it auto-restart.
    CHECK(exec.state_of(small) == LifecycleState::Active);
    check_ledger_conservation(exec);
  }
}

TEST_CASE("start from wrong states") {
  Executive exec;
  auto [display, ignore] = exec.install(display_desc());
  CHECK(exec.state_of(display) == LifecycleState::Unsatisfied);
  CHECK(code_of([&] { exec.start(display); }) == ExecError::Code::WrongState);

  auto disabled = calc_desc();
  disabled.enabled = false;
  auto [calc, ignore2] = exec.install(disabled);
  CHECK(code_of([&] { exec.start(calc); }) == ExecError::Code::WrongState);

  exec.enable(calc);
  exec.start(calc);
  CHECK(code_of([&] { exec.start(calc); }) == ExecError::Code::WrongState);  // already ACTIVE
}

TEST_CASE("stop releases the budget and cascades to consumers") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  auto [display, c2] = exec.install(display_desc());
  exec.start(calc);
  exec.start(display);

  auto changes = exec.stop(calc);
  // Cascade order: display is deactivated before calc's own change.
  REQUIRE(changes.size() == 2);
  CHECK(changes[0].id == display);
  CHECK(changes[0].from == LifecycleState::Active);
  CHECK(changes[0].to == LifecycleState::Unsatisfied);
  CHECK(changes[1].id == calc);
  CHECK(changes[1].from == LifecycleState::Active);
  CHECK(changes[1].to == LifecycleState::Satisfied);
  check_ledger_conservation(exec);

  SUBCASE("restart brings the consumer back automatically") {
    exec.start(calc);
    CHECK(exec.state_of(display) == LifecycleState::Active);  // sticky intent
    check_no_unbound_active_inports(exec);
  }
}

TEST_CASE("stop of a leaf changes only the leaf") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  exec.start(calc);
  auto changes = exec.stop(calc);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].id == calc);
}

TEST_CASE("chain cascade a -> b -> c") {
  Executive exec;
  auto a = test::minimal_aperiodic("a");
  a.outports.push_back(test::outport("pa"));
  auto b = test::minimal_aperiodic("b");
  b.inports.push_back(test::inport("pa"));
  b.outports.push_back(test::outport("pb"));
  auto c = test::minimal_aperiodic("c");
  c.inports.push_back(test::inport("pb"));

  auto [ia, x1] = exec.install(a);
  auto [ib, x2] = exec.install(b);
  auto [ic, x3] = exec.install(c);
  exec.start(ia);
  exec.start(ib);
  exec.start(ic);

  auto changes = exec.stop(ia);
  REQUIRE(changes.size() == 3);
  CHECK(changes[0].id == ib);
  CHECK(changes[1].id == ic);
  CHECK(changes[2].id == ia);
  CHECK(exec.state_of(ib) == LifecycleState::Unsatisfied);
  CHECK(exec.state_of(ic) == LifecycleState::Unsatisfied);
}

TEST_CASE("uninstall implies stop and removes the instance") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  auto [display, c2] = exec.install(display_desc());
  exec.start(calc);
  exec.start(display);

  auto changes = exec.uninstall(calc);
  REQUIRE(changes.size() == 2);
  CHECK(changes[0].id == display);
  CHECK(changes[0].to == LifecycleState::Unsatisfied);
  CHECK(changes[1].id == calc);
  CHECK(changes[1].to == LifecycleState::Uninstalled);
  CHECK(exec.find("calc") == kNoHandle);
  CHECK_THROWS_AS((void)exec.state_of(calc), ExecError);
  check_ledger_conservation(exec);

  SUBCASE("uninstall a registered instance: no cascade") {
    auto [extra, ignore] = exec.install(test::minimal_aperiodic("extra"));
    auto removed = exec.uninstall(extra);
    REQUIRE(removed.size() == 1);
    CHECK(removed[0].to == LifecycleState::Uninstalled);
  }
  SUBCASE("unknown handle") {
    CHECK(code_of([&] { exec.uninstall(calc); }) == ExecError::Code::UnknownId);
  }
}

TEST_CASE("disable stops a running component and parks it in REGISTERED") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  exec.start(calc);
  auto changes = exec.disable(calc);
  REQUIRE(changes.size() == 2);
  CHECK(changes[0].to == LifecycleState::Satisfied);   // implicit stop
  CHECK(changes[1].to == LifecycleState::Registered);  // then disabled
  CHECK_FALSE(exec.snapshot().at(calc).enabled);
  check_ledger_conservation(exec);
}

TEST_CASE("suspend and resume keep the budget committed and records published") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc(0.25));
  exec.start(calc);
  check_ledger_conservation(exec);

  auto suspended = exec.suspend(calc);
  REQUIRE(suspended.size() == 1);
  CHECK(exec.state_of(calc) == LifecycleState::Suspended);
  check_ledger_conservation(exec);  // SUSPENDED still counts
  CHECK(exec.snapshot().query({{"name", "calc"}}).size() == 1);

  // A suspended provider still satisfies its consumers.
  auto [display, c2] = exec.install(display_desc());
  CHECK(exec.state_of(display) == LifecycleState::Satisfied);

  exec.resume(calc);
  CHECK(exec.state_of(calc) == LifecycleState::Active);
  CHECK(code_of([&] { exec.resume(calc); }) == ExecError::Code::WrongState);
}

TEST_CASE("start intent on an unsatisfied component sticks through the rejection") {
  Executive exec;
  auto [display, c1] = exec.install(display_desc());
  CHECK(code_of([&] { exec.start(display); }) == ExecError::Code::WrongState);

  auto [calc, c2] = exec.install(calc_desc());
  exec.start(calc);
  // display resolves and auto-restarts in the same dispatch.
  CHECK(exec.state_of(display) == LifecycleState::Active);
}

TEST_CASE("auto-restart can be configured off") {
  ExecutiveConfig cfg;
  cfg.auto_restart = false;
  Executive exec(cfg);
  auto [calc, c1] = exec.install(calc_desc());
  auto [display, c2] = exec.install(display_desc());
  exec.start(calc);
  exec.start(display);
  exec.stop(calc);
  CHECK(exec.state_of(display) == LifecycleState::Unsatisfied);
  exec.start(calc);
  CHECK(exec.state_of(display) == LifecycleState::Satisfied);  // resolved, not restarted
}

TEST_CASE("set_property updates the management view") {
  Executive exec;
  auto [calc, c1] = exec.install(calc_desc());
  auto changes = exec.set_property(calc, "prox00", "7");
  CHECK(changes.empty());
  CHECK(exec.snapshot().at(calc).properties.at("prox00") == "7");
}

TEST_CASE("dispatch on an empty registry is a no-op") {
  Executive exec;
  CHECK(exec.dispatch(make_event(EventKind::ProviderAppeared, kNoHandle)).empty());
}

TEST_CASE("rebinding: a consumer follows the lowest-id provider") {
  Executive exec;
  auto p1 = test::minimal_aperiodic("prov1");
  p1.outports.push_back(test::outport("data"));
  auto p2 = test::minimal_aperiodic("prov2");
  p2.outports.push_back(test::outport("data"));
  auto consumer = test::minimal_aperiodic("consum");
  consumer.inports.push_back(test::inport("data"));

  auto [id1, x1] = exec.install(p1);
  auto [id2, x2] = exec.install(p2);
  auto [idc, x3] = exec.install(consumer);
  exec.start(id1);
  exec.start(id2);
  exec.start(idc);
  CHECK(exec.snapshot().at(idc).bindings[0].provider == id1);

  // The bound provider departs; the consumer stays ACTIVE on the surviving
  // provider with fresh bindings.
  auto changes = exec.stop(id1);
  REQUIRE(changes.size() == 1);  // only prov1 changes state
  CHECK(exec.state_of(idc) == LifecycleState::Active);
  CHECK(exec.snapshot().at(idc).bindings[0].provider == id2);
  check_no_unbound_active_inports(exec);
}

TEST_CASE("concurrent submissions are serialized in sequence order") {
  for (int round = 0; round < 20; ++round) {
    Executive exec;
    std::vector<std::future<std::vector<StateChange>>> futures;
    for (int i = 0; i < 8; ++i)
      futures.push_back(
          exec.submit(make_install_event(test::minimal_aperiodic("c" + std::to_string(i)))));
    for (auto& f : futures) f.get();

    const auto log = exec.log_snapshot();
    REQUIRE(log.size() == 8);
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].seq == i + 1);
    // Ids equal the acceptance order, whatever the thread interleaving was.
    std::set<Handle> ids;
    for (const auto& rec : log) {
      REQUIRE(rec.changes.size() == 1);
      ids.insert(rec.changes[0].id);
    }
    CHECK(ids == std::set<Handle>{1, 2, 3, 4, 5, 6, 7, 8});
  }
}

TEST_CASE("every logged change is a legal lifecycle transition") {
  Executive exec;
  std::mt19937_64 rng(31337);
  std::vector<std::string> names;
  for (int i = 0; i < 6; ++i) names.push_back("c" + std::to_string(i));

  for (int step = 0; step < 400; ++step) {
    const auto& name = names[rng() % names.size()];
    const Handle id = exec.find(name);
    try {
      switch (rng() % 7) {
        case 0: {
          auto d = test::periodic(name, 100, int(rng() % 2), int(rng() % 5),
                                  double(rng() % 40) / 100.0);
          if (rng() % 3 == 0) d.outports.push_back(test::outport("bus"));
          if (rng() % 3 == 0) d.inports.push_back(test::inport("bus"));
          d.enabled = rng() % 2 == 0;
          exec.install(d);
          break;
        }
        case 1: exec.enable(id); break;
        case 2: exec.start(id); break;
        case 3: exec.stop(id); break;
        case 4: exec.uninstall(id); break;
        case 5: exec.suspend(id); break;
        case 6: exec.resume(id); break;
      }
    } catch (const ExecError&) {
    }
    check_ledger_conservation(exec);
    check_no_unbound_active_inports(exec);
  }

  for (const auto& rec : exec.log_snapshot())
    for (const auto& c : rec.changes) {
      CAPTURE(rec.seq);
      CHECK(transition_legal(c.from, c.to));
    }
}

TEST_CASE("service records exist exactly for SATISFIED, ACTIVE and SUSPENDED") {
  Executive exec;
  std::mt19937_64 rng(555);
  for (int i = 0; i < 5; ++i) {
    auto d = test::periodic("c" + std::to_string(i), 50);
    d.enabled = i % 2 == 0;
    exec.install(d);
  }
  for (int step = 0; step < 200; ++step) {
    const Handle id = exec.find("c" + std::to_string(rng() % 5));
    if (id == kNoHandle) continue;
    try {
      switch (rng() % 5) {
        case 0: exec.enable(id); break;
        case 1: exec.start(id); break;
        case 2: exec.stop(id); break;
        case 3: exec.suspend(id); break;
        case 4: exec.resume(id); break;
      }
    } catch (const ExecError&) {
    }
    auto reg = exec.snapshot();
    std::set<Handle> expected;
    for (const auto& [id2, inst] : reg.instances())
      if (inst.state == LifecycleState::Satisfied || inst.provides()) expected.insert(id2);
    std::set<Handle> published;
    for (const auto& r : reg.query({})) published.insert(r.component_id);
    CHECK(published == expected);
  }
}

TEST_CASE("replaying an event log reproduces the state changes byte for byte") {
  ExecutiveConfig cfg;
  Executive exec(cfg);
  std::mt19937_64 rng(777);
  for (int step = 0; step < 120; ++step) {
    const std::string name = "c" + std::to_string(rng() % 5);
    const Handle id = exec.find(name);
    try {
      switch (rng() % 6) {
        case 0: {
          auto d = test::periodic(name, 100, 0, int(rng() % 3), double(rng() % 30) / 100.0);
          if (rng() % 2 == 0)
            d.outports.push_back(test::outport("bus"));
          else
            d.inports.push_back(test::inport("bus"));
          exec.install(d);
          break;
        }
        case 1: exec.start(id); break;
        case 2: exec.stop(id); break;
        case 3: exec.uninstall(id); break;
        case 4: exec.suspend(id); break;
        case 5: exec.resume(id); break;
      }
    } catch (const ExecError&) {
    }
  }

  const auto original = exec.log_snapshot();
  const auto original_text = to_text(original);

  // Round-trip through the serialized form, then replay on a fresh executive.
  const auto parsed = parse_event_log_text(original_text);
  REQUIRE(parsed.size() == original.size());
  CHECK(to_text(parsed) == original_text);

  Executive fresh(cfg);
  const auto replayed = replay_event_log(parsed, fresh);
  CHECK(to_text(replayed) == original_text);
}
