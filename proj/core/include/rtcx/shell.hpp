#pragma once

#include "rtcx/executive.hpp"

#include <iosfwd>

namespace rtcx {

/// Interactive operator shell. Commands:
///   load <file>            install a descriptor file
///   enable|disable|start|stop|uninstall|suspend|resume <name>
///   set <name> <property> <value...>
///   status [name]          lifecycle state, bindings, properties
///   stats <name>           latency summary of an active task
///   quit
/// Each command maps 1:1 onto an executive operation; resulting state
/// changes are printed. Errors are printed with their machine-readable code
/// and the shell keeps running. Returns 0 after `quit`, otherwise the last
/// command's status (nonzero after a failure) when input ends.
int run_shell(Executive& exec, std::istream& in, std::ostream& out,
              const ParseOptions& parse_opts = {});

}  // namespace rtcx
