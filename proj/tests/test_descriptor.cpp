#include "rtcx/descriptor.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace rtcx;

namespace {

ParseError::Code code_of(const std::string& xml, const ParseOptions& opts = {}) {
  try {
    parse_descriptor(xml, opts);
  } catch (const ParseError& e) {
    return e.code();
  }
  FAIL("expected ParseError for: " << xml);
  return ParseError::Code::MalformedXml;
}

// Rebuilds the camera sample with one named field omitted.
std::string camera_without(const std::string& omit) {
  std::string xml = "<dr:component";
  if (omit != "name") xml += " name=\"camera\"";
  if (omit != "type") xml += " type=\"periodic\"";
  xml += " desc=\"sample\" enabled=\"true\" cpuusage=\"0.1\">";

  if (omit != "implementation") {
    xml += "<implementation";
    if (omit != "bincode") xml += " bincode=\"ua.pats.demo.smartcamera.RTComponent\"";
    xml += "/>";
  }
  xml += "<periodictask";
  if (omit != "frequency") xml += " frequency=\"100\"";
  if (omit != "runoncpu") xml += " runoncup=\"0\"";
  if (omit != "priority") xml += " priority=\"2\"";
  xml += "/>";
  xml += "<outport";
  if (omit != "outport/@name") xml += " name=\"images\"";
  if (omit != "outport/@interface") xml += " interface=\"RTAI.SHM\"";
  if (omit != "outport/@type") xml += " type=\"Byte\"";
  if (omit != "outport/@size") xml += " size=\"400\"";
  xml += "/>";
  xml += "<inport";
  if (omit != "inport/@name") xml += " name=\"xysize\"";
  if (omit != "inport/@interface") xml += " interface=\"RTAI.SHM\"";
  if (omit != "inport/@type") xml += " type=\"Integer\"";
  if (omit != "inport/@size") xml += " size=\"400\"";
  xml += "/>";
  xml += "<property";
  if (omit != "property/@name") xml += " name=\"prox00\"";
  if (omit != "property/@type") xml += " type=\"Integer\"";
  if (omit != "property/@value") xml += " value=\"6\"";
  xml += "/>";
  xml += "</dr:component>";
  return xml;
}

}  // namespace

TEST_CASE("camera sample parses to the expected field values") {
  const auto d = parse_descriptor(test::kCameraXml);
  CHECK(d.name == "camera");
  CHECK(d.desc == "this is a smart camera controller");
  CHECK(d.task_type == TaskType::Periodic);
  CHECK(d.enabled);
  CHECK(d.cpu_usage == doctest::Approx(0.1));
  CHECK(d.bincode == "ua.pats.demo.smartcamera.RTComponent");
  REQUIRE(d.task.has_value());
  CHECK(d.task->frequency_hz == 100.0);
  CHECK(d.task->run_on_cpu == 0);
  CHECK(d.task->priority == 2);
  CHECK(d.task->period_ns() == 10'000'000);  // 100 Hz -> 10 ms
  REQUIRE(d.outports.size() == 1);
  CHECK(d.outports[0] == PortSpec{"images", PortDirection::Out, PortInterface::SharedMemory,
                                  PortDataType::Byte, 400});
  REQUIRE(d.inports.size() == 1);
  CHECK(d.inports[0] == PortSpec{"xysize", PortDirection::In, PortInterface::SharedMemory,
                                 PortDataType::Integer, 400});
  REQUIRE(d.properties.size() == 1);
  CHECK(d.properties[0] == PropertySpec{"prox00", PropertyType::Integer, "6"});
}

TEST_CASE("minimal aperiodic descriptor uses the documented defaults") {
  const auto d = parse_descriptor(
      "<component name=\"worker\" type=\"aperiodic\">"
      "<implementation bincode=\"a.b.C\"/></component>");
  CHECK(d.task_type == TaskType::Aperiodic);
  CHECK_FALSE(d.task.has_value());
  CHECK(d.enabled);           // default true
  CHECK(d.cpu_usage == 0.0);  // absent claim
  CHECK(d.desc.empty());
  CHECK(d.inports.empty());
  CHECK(d.outports.empty());
}

TEST_CASE("task element and type attribute must agree") {
  CHECK(code_of("<component name=\"a\" type=\"periodic\">"
                "<implementation bincode=\"x.Y\"/></component>") ==
        ParseError::Code::TaskSpecMismatch);
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\">"
                "<implementation bincode=\"x.Y\"/>"
                "<periodictask frequency=\"10\" runoncpu=\"0\" priority=\"0\"/>"
                "</component>") == ParseError::Code::TaskSpecMismatch);
}

TEST_CASE("port names must be unique across inports and outports") {
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\">"
                "<implementation bincode=\"x.Y\"/>"
                "<outport name=\"p\" interface=\"RTAI.SHM\" type=\"Byte\" size=\"1\"/>"
                "<inport name=\"p\" interface=\"RTAI.SHM\" type=\"Byte\" size=\"1\"/>"
                "</component>") == ParseError::Code::DuplicatePortName);
}

TEST_CASE("invalid values are rejected with the offending field") {
  auto port_xml = [](const std::string& attrs) {
    return "<component name=\"a\" type=\"aperiodic\"><implementation bincode=\"x.Y\"/>"
           "<outport " +
           attrs + "/></component>";
  };
  CHECK(code_of(port_xml("name=\"p\" interface=\"RTAI.SHM\" type=\"Byte\" size=\"0\"")) ==
        ParseError::Code::InvalidValue);
  CHECK(code_of(port_xml("name=\"p\" interface=\"PIPE\" type=\"Byte\" size=\"1\"")) ==
        ParseError::Code::InvalidValue);
  CHECK(code_of(port_xml("name=\"p\" interface=\"RTAI.SHM\" type=\"Short\" size=\"1\"")) ==
        ParseError::Code::InvalidValue);

  CHECK(code_of("<component name=\"a\" type=\"sporadic\">"
                "<implementation bincode=\"x.Y\"/></component>") ==
        ParseError::Code::InvalidValue);
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\" cpuusage=\"1.5\">"
                "<implementation bincode=\"x.Y\"/></component>") ==
        ParseError::Code::InvalidValue);
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\" cpuusage=\"lots\">"
                "<implementation bincode=\"x.Y\"/></component>") ==
        ParseError::Code::InvalidValue);
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\" enabled=\"yes\">"
                "<implementation bincode=\"x.Y\"/></component>") ==
        ParseError::Code::InvalidValue);
  CHECK(code_of("<component name=\"a\" type=\"periodic\">"
                "<implementation bincode=\"x.Y\"/>"
                "<periodictask frequency=\"0\" runoncpu=\"0\" priority=\"0\"/>"
                "</component>") == ParseError::Code::InvalidValue);
  CHECK(code_of("<component name=\"a\" type=\"aperiodic\">"
                "<implementation bincode=\"x.Y\"/>"
                "<property name=\"p\" type=\"Integer\" value=\"six\"/>"
                "</component>") == ParseError::Code::InvalidValue);
}

TEST_CASE("malformed XML is reported as such") {
  CHECK(code_of("<component name=\"a\"") == ParseError::Code::MalformedXml);
  CHECK(code_of("") == ParseError::Code::MissingRequired);  // no root element
}

TEST_CASE("strict mode rejects unknown elements and attributes, lenient warns") {
  const std::string unknown_elem =
      "<component name=\"a\" type=\"aperiodic\"><implementation bincode=\"x.Y\"/>"
      "<watchdog timeout=\"5\"/></component>";
  const std::string unknown_attr =
      "<component name=\"a\" type=\"aperiodic\" color=\"red\">"
      "<implementation bincode=\"x.Y\"/></component>";

  CHECK(code_of(unknown_elem) == ParseError::Code::InvalidValue);
  CHECK(code_of(unknown_attr) == ParseError::Code::InvalidValue);

  std::vector<std::string> warnings;
  ParseOptions lenient{ParseMode::Lenient, false};
  CHECK_NOTHROW(parse_descriptor(unknown_elem, lenient, &warnings));
  CHECK_NOTHROW(parse_descriptor(unknown_attr, lenient, &warnings));
  CHECK(warnings.size() == 2);
}

TEST_CASE("xmlns declarations and namespace prefixes are tolerated") {
  const auto d = parse_descriptor(
      "<dr:component xmlns:dr=\"urn:example\" name=\"a\" type=\"aperiodic\">"
      "<implementation bincode=\"x.Y\"/></dr:component>");
  CHECK(d.name == "a");
  const auto d2 = parse_descriptor(
      "<other:component name=\"b\" type=\"aperiodic\">"
      "<implementation bincode=\"x.Y\"/></other:component>");
  CHECK(d2.name == "b");
}

TEST_CASE("runoncup and runoncpu are both accepted, serializer emits runoncpu") {
  const auto d = parse_descriptor(test::kCameraXml);
  const auto xml = serialize_descriptor(d);
  CHECK(xml.find("runoncpu=") != std::string::npos);
  CHECK(xml.find("runoncup=") == std::string::npos);

  const auto corrected = parse_descriptor(
      "<component name=\"a\" type=\"periodic\">"
      "<implementation bincode=\"x.Y\"/>"
      "<periodictask frequency=\"10\" runoncpu=\"3\" priority=\"1\"/></component>");
  CHECK(corrected.task->run_on_cpu == 3);
}

TEST_CASE("rejection completeness: every removed required field is named") {
  const std::vector<std::pair<std::string, std::string>> required = {
      {"name", "name"},
      {"type", "type"},
      {"implementation", "implementation"},
      {"bincode", "implementation/@bincode"},
      {"frequency", "periodictask/@frequency"},
      {"runoncpu", "periodictask/@runoncpu"},
      {"priority", "periodictask/@priority"},
      {"outport/@name", "outport/@name"},
      {"outport/@interface", "outport/@interface"},
      {"outport/@type", "outport/@type"},
      {"outport/@size", "outport/@size"},
      {"inport/@name", "inport/@name"},
      {"inport/@interface", "inport/@interface"},
      {"inport/@type", "inport/@type"},
      {"inport/@size", "inport/@size"},
      {"property/@name", "property/@name"},
      {"property/@type", "property/@type"},
      {"property/@value", "property/@value"},
  };
  for (const auto& [omit, expected_field] : required) {
    CAPTURE(omit);
    try {
      parse_descriptor(camera_without(omit));
      FAIL("parse accepted a sample missing " << omit);
    } catch (const ParseError& e) {
      CHECK(e.code() == ParseError::Code::MissingRequired);
      CHECK(e.field() == expected_field);
    }
  }
}

TEST_CASE("validate_name enforces the six character rule") {
  CHECK(validate_name("camera", true) == NameVerdict::Ok);
  CHECK(validate_name("", false) == NameVerdict::EmptyName);
  CHECK(validate_name("", true) == NameVerdict::EmptyName);
  CHECK(validate_name("calculation", false) == NameVerdict::Warning);
  CHECK(validate_name("calculation", true) == NameVerdict::TooLong);

  // The parser maps the verdicts onto errors/warnings.
  std::vector<std::string> warnings;
  const std::string xml =
      "<component name=\"calculation\" type=\"aperiodic\">"
      "<implementation bincode=\"x.Y\"/></component>";
  CHECK_NOTHROW(parse_descriptor(xml, {}, &warnings));
  CHECK(warnings.size() == 1);
  CHECK(code_of(xml, ParseOptions{ParseMode::Strict, true}) == ParseError::Code::InvalidValue);
}

TEST_CASE("round-trip: camera, minimal, and property order") {
  const auto camera = parse_descriptor(test::kCameraXml);
  CHECK(parse_descriptor(serialize_descriptor(camera)) == camera);

  const auto minimal = test::minimal_aperiodic();
  CHECK(parse_descriptor(serialize_descriptor(minimal)) == minimal);

  ComponentDescriptor d = test::minimal_aperiodic("props");
  d.properties = {{"zeta", PropertyType::String, "1"},
                  {"alpha", PropertyType::String, "2"},
                  {"mid", PropertyType::String, "3"}};
  const auto back = parse_descriptor(serialize_descriptor(d));
  REQUIRE(back.properties.size() == 3);
  CHECK(back.properties[0].name == "zeta");
  CHECK(back.properties[1].name == "alpha");
  CHECK(back.properties[2].name == "mid");
}

TEST_CASE("round-trip property holds for generated descriptors") {
  test::DescriptorGen gen(20260809);
  for (int i = 0; i < 1000; ++i) {
    const auto d = gen.next();
    CAPTURE(i);
    const auto xml = serialize_descriptor(d);
    CAPTURE(xml);
    const auto back = parse_descriptor(xml);
    REQUIRE(back == d);
  }
}
