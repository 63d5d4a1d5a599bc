#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtcx {

/// Opaque component instance handle. Handles are assigned monotonically by
/// the registry and never reused within one executive lifetime.
using Handle = std::uint64_t;
inline constexpr Handle kNoHandle = 0;

enum class TaskType { Periodic, Aperiodic };
enum class PortDirection { In, Out };
enum class PortInterface { SharedMemory, Mailbox };
enum class PortDataType { Integer, Byte };
enum class PropertyType { Integer, String, Float, Boolean };

std::string_view to_string(TaskType t);
std::string_view to_string(PortDirection d);
std::string_view to_string(PortInterface i);   // serialized form: RTAI.SHM / RTAI.Mailbox
std::string_view to_string(PortDataType t);
std::string_view to_string(PropertyType t);

/// Timing contract of a periodic task.
struct PeriodicTaskSpec {
  double frequency_hz = 0.0;  // invocations per second, > 0
  int run_on_cpu = 0;
  int priority = 0;           // smaller value = higher priority

  std::int64_t period_ns() const;  // round(1e9 / frequency_hz)

  bool operator==(const PeriodicTaskSpec&) const = default;
};

/// A typed, named, unidirectional communication endpoint.
struct PortSpec {
  std::string name;
  PortDirection direction = PortDirection::In;
  PortInterface interface = PortInterface::SharedMemory;
  PortDataType data_type = PortDataType::Integer;
  std::uint32_t size = 1;  // element count, >= 1

  std::size_t element_bytes() const { return data_type == PortDataType::Integer ? 4 : 1; }
  std::size_t byte_size() const { return std::size_t{size} * element_bytes(); }

  bool operator==(const PortSpec&) const = default;
};

struct PropertySpec {
  std::string name;
  PropertyType type = PropertyType::String;
  std::string value;  // literal, parseable as `type`

  bool operator==(const PropertySpec&) const = default;
};

/// Parsed declarative contract of one component: task spec, ports, properties.
struct ComponentDescriptor {
  std::string name;
  std::string desc;
  TaskType task_type = TaskType::Aperiodic;
  bool enabled = true;
  double cpu_usage = 0.0;  // claimed CPU share in [0, 1]
  std::string bincode;     // implementation identifier
  std::optional<PeriodicTaskSpec> task;  // present iff task_type == Periodic
  std::vector<PortSpec> inports;
  std::vector<PortSpec> outports;
  std::vector<PropertySpec> properties;

  const PortSpec* find_inport(std::string_view port) const;
  const PortSpec* find_outport(std::string_view port) const;

  bool operator==(const ComponentDescriptor&) const = default;
};

enum class ParseMode { Strict, Lenient };

struct ParseOptions {
  ParseMode mode = ParseMode::Strict;  // strict: unknown elements/attributes rejected
  bool strict_six = false;             // enforce the six-character name limit as an error
};

class ParseError : public std::runtime_error {
 public:
  enum class Code {
    MalformedXml,
    MissingRequired,
    InvalidValue,
    DuplicatePortName,
    TaskSpecMismatch,
  };

  ParseError(Code code, std::string field, const std::string& detail);

  Code code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  Code code_;
  std::string field_;
};

std::string_view to_string(ParseError::Code c);

/// Parses an XML component descriptor. Throws ParseError on rejection; in
/// lenient mode unknown elements/attributes are appended to `warnings`
/// instead. The returned value satisfies all descriptor invariants.
ComponentDescriptor parse_descriptor(std::string_view xml_text, const ParseOptions& opts = {},
                                     std::vector<std::string>* warnings = nullptr);

/// Canonical XML form; parse_descriptor(serialize_descriptor(d)) == d.
std::string serialize_descriptor(const ComponentDescriptor& d);

enum class NameVerdict {
  Ok,
  Warning,    // longer than six characters, accepted
  EmptyName,  // rejected
  TooLong,    // rejected (strict_six only)
};

NameVerdict validate_name(std::string_view name, bool strict_six);

}  // namespace rtcx
