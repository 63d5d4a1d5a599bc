#include "rtcx/descriptor.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace rtcx {

namespace pt = boost::property_tree;

std::string_view to_string(TaskType t) {
  return t == TaskType::Periodic ? "periodic" : "aperiodic";
}

std::string_view to_string(PortDirection d) { return d == PortDirection::In ? "in" : "out"; }

std::string_view to_string(PortInterface i) {
  return i == PortInterface::SharedMemory ? "RTAI.SHM" : "RTAI.Mailbox";
}

std::string_view to_string(PortDataType t) {
  return t == PortDataType::Integer ? "Integer" : "Byte";
}

std::string_view to_string(PropertyType t) {
  switch (t) {
    case PropertyType::Integer: return "Integer";
    case PropertyType::String: return "String";
    case PropertyType::Float: return "Float";
    case PropertyType::Boolean: return "Boolean";
  }
  return "String";
}

std::string_view to_string(ParseError::Code c) {
  switch (c) {
    case ParseError::Code::MalformedXml: return "malformed-xml";
    case ParseError::Code::MissingRequired: return "missing-required";
    case ParseError::Code::InvalidValue: return "invalid-value";
    case ParseError::Code::DuplicatePortName: return "duplicate-port-name";
    case ParseError::Code::TaskSpecMismatch: return "task-spec-mismatch";
  }
  return "parse-error";
}

std::int64_t PeriodicTaskSpec::period_ns() const {
  return static_cast<std::int64_t>(std::llround(1e9 / frequency_hz));
}

const PortSpec* ComponentDescriptor::find_inport(std::string_view port) const {
  for (const auto& p : inports)
    if (p.name == port) return &p;
  return nullptr;
}

const PortSpec* ComponentDescriptor::find_outport(std::string_view port) const {
  for (const auto& p : outports)
    if (p.name == port) return &p;
  return nullptr;
}

ParseError::ParseError(Code code, std::string field, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + field +
                         (detail.empty() ? "" : " (" + detail + ")")),
      code_(code),
      field_(std::move(field)) {}

NameVerdict validate_name(std::string_view name, bool strict_six) {
  if (name.empty()) return NameVerdict::EmptyName;
  if (name.size() > 6) return strict_six ? NameVerdict::TooLong : NameVerdict::Warning;
  return NameVerdict::Ok;
}

namespace {

[[noreturn]] void fail(ParseError::Code code, std::string field, std::string detail = "") {
  throw ParseError(code, std::move(field), detail);
}

// Strips a namespace prefix; "dr:component" -> "component".
std::string_view local_name(std::string_view tag) {
  auto pos = tag.find(':');
  return pos == std::string_view::npos ? tag : tag.substr(pos + 1);
}

double parse_double(const std::string& text, const std::string& field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ParseError::Code::InvalidValue, field, "not a number: '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ParseError::Code::InvalidValue, field, "not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& field) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(ParseError::Code::InvalidValue, field, "expected true/false, got '" + text + "'");
}

// Attribute map of one element, in document order, rejecting duplicates.
std::vector<std::pair<std::string, std::string>> attributes_of(const pt::ptree& node,
                                                               const std::string& element) {
  std::vector<std::pair<std::string, std::string>> attrs;
  auto attr_node = node.get_child_optional("<xmlattr>");
  if (!attr_node) return attrs;
  std::set<std::string> seen;
  for (const auto& [key, value] : *attr_node) {
    if (!seen.insert(key).second)
      fail(ParseError::Code::InvalidValue, element + "/@" + key, "duplicate attribute");
    attrs.emplace_back(key, value.data());
  }
  return attrs;
}

class AttrReader {
 public:
  AttrReader(const pt::ptree& node, std::string element)
      : element_(std::move(element)), attrs_(attributes_of(node, element_)) {}

  std::optional<std::string> take(std::initializer_list<std::string_view> names) {
    for (auto& [key, value] : attrs_) {
      for (auto n : names) {
        if (key == n && !consumed_.count(key)) {
          consumed_.insert(key);
          return value;
        }
      }
    }
    return std::nullopt;
  }

  std::string require(std::string_view name) {
    if (auto v = take({name})) return *v;
    fail(ParseError::Code::MissingRequired, field_name(name),
         "required attribute of <" + element_ + ">");
  }

  // Root attributes go by their bare names, child attributes are qualified.
  std::string field_name(std::string_view attr) const {
    return element_ == "component" ? std::string(attr) : element_ + "/@" + std::string(attr);
  }

  // Unknown attributes: error in strict mode, warning otherwise. Namespace
  // declarations (xmlns...) are always ignored.
  void finish(const ParseOptions& opts, std::vector<std::string>* warnings) {
    for (auto& [key, value] : attrs_) {
      if (consumed_.count(key) || key.rfind("xmlns", 0) == 0) continue;
      if (opts.mode == ParseMode::Strict)
        fail(ParseError::Code::InvalidValue, element_ + "/@" + key, "unknown attribute");
      if (warnings) warnings->push_back("unknown attribute " + element_ + "/@" + key);
    }
  }

 private:
  std::string element_;
  std::vector<std::pair<std::string, std::string>> attrs_;
  std::set<std::string> consumed_;
};

PortSpec parse_port(const pt::ptree& node, PortDirection dir, const ParseOptions& opts,
                    std::vector<std::string>* warnings) {
  const std::string element(dir == PortDirection::In ? "inport" : "outport");
  AttrReader attrs(node, element);
  PortSpec p;
  p.direction = dir;
  p.name = attrs.require("name");
  if (p.name.empty()) fail(ParseError::Code::MissingRequired, element + "/@name", "empty");

  const std::string iface = attrs.require("interface");
  if (iface == "RTAI.SHM")
    p.interface = PortInterface::SharedMemory;
  else if (iface == "RTAI.Mailbox")
    p.interface = PortInterface::Mailbox;
  else
    fail(ParseError::Code::InvalidValue, element + "/@interface",
         "expected RTAI.SHM or RTAI.Mailbox, got '" + iface + "'");

  const std::string type = attrs.require("type");
  if (type == "Integer")
    p.data_type = PortDataType::Integer;
  else if (type == "Byte")
    p.data_type = PortDataType::Byte;
  else
    fail(ParseError::Code::InvalidValue, element + "/@type",
         "expected Integer or Byte, got '" + type + "'");

  const long long size = parse_int(attrs.require("size"), element + "/@size");
  if (size < 1 || size > 0xffffffffLL)
    fail(ParseError::Code::InvalidValue, element + "/@size", "must be >= 1");
  p.size = static_cast<std::uint32_t>(size);

  attrs.finish(opts, warnings);
  return p;
}

PropertySpec parse_property(const pt::ptree& node, const ParseOptions& opts,
                            std::vector<std::string>* warnings) {
  AttrReader attrs(node, "property");
  PropertySpec p;
  p.name = attrs.require("name");
  if (p.name.empty()) fail(ParseError::Code::MissingRequired, "property/@name", "empty");

  const std::string type = attrs.require("type");
  if (type == "Integer")
    p.type = PropertyType::Integer;
  else if (type == "String")
    p.type = PropertyType::String;
  else if (type == "Float")
    p.type = PropertyType::Float;
  else if (type == "Boolean")
    p.type = PropertyType::Boolean;
  else
    fail(ParseError::Code::InvalidValue, "property/@type", "unknown type '" + type + "'");

  p.value = attrs.require("value");
  const std::string field = "property '" + p.name + "'/@value";
  switch (p.type) {
    case PropertyType::Integer: parse_int(p.value, field); break;
    case PropertyType::Float: parse_double(p.value, field); break;
    case PropertyType::Boolean: parse_bool(p.value, field); break;
    case PropertyType::String: break;
  }

  attrs.finish(opts, warnings);
  return p;
}

PeriodicTaskSpec parse_task(const pt::ptree& node, const ParseOptions& opts,
                            std::vector<std::string>* warnings) {
  AttrReader attrs(node, "periodictask");
  PeriodicTaskSpec t;
  t.frequency_hz = parse_double(attrs.require("frequency"), "periodictask/@frequency");
  if (!(t.frequency_hz > 0.0))
    fail(ParseError::Code::InvalidValue, "periodictask/@frequency", "must be > 0");

  // Accept the historical attribute spelling "runoncup" alongside "runoncpu".
  auto cpu = attrs.take({"runoncpu", "runoncup"});
  if (!cpu)
    fail(ParseError::Code::MissingRequired, "periodictask/@runoncpu",
         "required attribute of <periodictask>");
  const long long cpu_v = parse_int(*cpu, "periodictask/@runoncpu");
  if (cpu_v < 0) fail(ParseError::Code::InvalidValue, "periodictask/@runoncpu", "must be >= 0");
  t.run_on_cpu = static_cast<int>(cpu_v);

  const long long prio = parse_int(attrs.require("priority"), "periodictask/@priority");
  if (prio < 0) fail(ParseError::Code::InvalidValue, "periodictask/@priority", "must be >= 0");
  t.priority = static_cast<int>(prio);

  if (t.period_ns() <= 0)
    fail(ParseError::Code::InvalidValue, "periodictask/@frequency", "period rounds to zero");

  attrs.finish(opts, warnings);
  return t;
}

void append_escaped(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void append_attr(std::string& out, std::string_view key, std::string_view value) {
  out += ' ';
  out += key;
  out += "=\"";
  append_escaped(out, value);
  out += '"';
}

}  // namespace

ComponentDescriptor parse_descriptor(std::string_view xml_text, const ParseOptions& opts,
                                     std::vector<std::string>* warnings) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml_text)};
    pt::read_xml(in, doc, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ParseError::Code::MalformedXml, "document", e.message());
  }

  const pt::ptree* root = nullptr;
  std::string root_tag;
  for (const auto& [key, child] : doc) {
    if (key == "<xmlcomment>") continue;
    if (root) fail(ParseError::Code::MalformedXml, "document", "multiple root elements");
    root_tag = key;
    root = &child;
  }
  if (!root) fail(ParseError::Code::MissingRequired, "component", "no root element");
  if (local_name(root_tag) != "component")
    fail(ParseError::Code::InvalidValue, "component",
         "unexpected root element <" + root_tag + ">");

  ComponentDescriptor d;
  AttrReader attrs(*root, "component");

  d.name = attrs.require("name");
  switch (validate_name(d.name, opts.strict_six)) {
    case NameVerdict::EmptyName: fail(ParseError::Code::MissingRequired, "name", "empty");
    case NameVerdict::TooLong:
      fail(ParseError::Code::InvalidValue, "name",
           "'" + d.name + "' is longer than six characters");
    case NameVerdict::Warning:
      if (warnings)
        warnings->push_back("name '" + d.name + "' is longer than six characters");
      break;
    case NameVerdict::Ok: break;
  }

  d.desc = attrs.take({"desc"}).value_or("");

  const std::string type = attrs.require("type");
  if (type == "periodic")
    d.task_type = TaskType::Periodic;
  else if (type == "aperiodic")
    d.task_type = TaskType::Aperiodic;
  else
    fail(ParseError::Code::InvalidValue, "type",
         "expected periodic or aperiodic, got '" + type + "'");

  if (auto enabled = attrs.take({"enabled"}))
    d.enabled = parse_bool(*enabled, "component/@enabled");

  if (auto usage = attrs.take({"cpuusage"})) {
    d.cpu_usage = parse_double(*usage, "component/@cpuusage");
    if (d.cpu_usage < 0.0 || d.cpu_usage > 1.0)
      fail(ParseError::Code::InvalidValue, "component/@cpuusage", "must be in [0, 1]");
  }

  attrs.finish(opts, warnings);

  if (!root->data().empty())
    fail(ParseError::Code::InvalidValue, "component", "unexpected text content");

  bool have_implementation = false;
  bool have_task = false;
  for (const auto& [key, child] : *root) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    const std::string element(local_name(key));
    if (element == "implementation") {
      if (have_implementation)
        fail(ParseError::Code::InvalidValue, "implementation", "duplicate element");
      have_implementation = true;
      AttrReader impl(child, "implementation");
      d.bincode = impl.require("bincode");
      if (d.bincode.empty())
        fail(ParseError::Code::MissingRequired, "implementation/@bincode", "empty");
      impl.finish(opts, warnings);
    } else if (element == "periodictask") {
      if (have_task) fail(ParseError::Code::InvalidValue, "periodictask", "duplicate element");
      have_task = true;
      d.task = parse_task(child, opts, warnings);
    } else if (element == "inport") {
      d.inports.push_back(parse_port(child, PortDirection::In, opts, warnings));
    } else if (element == "outport") {
      d.outports.push_back(parse_port(child, PortDirection::Out, opts, warnings));
    } else if (element == "property") {
      d.properties.push_back(parse_property(child, opts, warnings));
    } else {
      if (opts.mode == ParseMode::Strict)
        fail(ParseError::Code::InvalidValue, element, "unknown element");
      if (warnings) warnings->push_back("unknown element <" + element + ">");
    }
  }

  if (!have_implementation)
    fail(ParseError::Code::MissingRequired, "implementation", "element is required");

  if (d.task_type == TaskType::Periodic && !d.task)
    fail(ParseError::Code::TaskSpecMismatch, "periodictask",
         "type is periodic but no periodictask element is present");
  if (d.task_type == TaskType::Aperiodic && d.task)
    fail(ParseError::Code::TaskSpecMismatch, "periodictask",
         "type is aperiodic but a periodictask element is present");

  std::set<std::string> port_names;
  for (const auto& p : d.inports)
    if (!port_names.insert(p.name).second) fail(ParseError::Code::DuplicatePortName, p.name);
  for (const auto& p : d.outports)
    if (!port_names.insert(p.name).second) fail(ParseError::Code::DuplicatePortName, p.name);

  return d;
}

std::string serialize_descriptor(const ComponentDescriptor& d) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<dr:component";
  append_attr(out, "name", d.name);
  append_attr(out, "desc", d.desc);
  append_attr(out, "type", to_string(d.task_type));
  append_attr(out, "enabled", d.enabled ? "true" : "false");
  append_attr(out, "cpuusage", format_double(d.cpu_usage));
  out += ">\n";

  out += "  <implementation";
  append_attr(out, "bincode", d.bincode);
  out += "/>\n";

  if (d.task) {
    out += "  <periodictask";
    append_attr(out, "frequency", format_double(d.task->frequency_hz));
    append_attr(out, "runoncpu", std::to_string(d.task->run_on_cpu));
    append_attr(out, "priority", std::to_string(d.task->priority));
    out += "/>\n";
  }

  auto emit_port = [&out](const PortSpec& p) {
    out += p.direction == PortDirection::In ? "  <inport" : "  <outport";
    append_attr(out, "name", p.name);
    append_attr(out, "interface", to_string(p.interface));
    append_attr(out, "type", to_string(p.data_type));
    append_attr(out, "size", std::to_string(p.size));
    out += "/>\n";
  };
  for (const auto& p : d.outports) emit_port(p);
  for (const auto& p : d.inports) emit_port(p);

  for (const auto& p : d.properties) {
    out += "  <property";
    append_attr(out, "name", p.name);
    append_attr(out, "type", to_string(p.type));
    append_attr(out, "value", p.value);
    out += "/>\n";
  }

  out += "</dr:component>\n";
  return out;
}

}  // namespace rtcx
