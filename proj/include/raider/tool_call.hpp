#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace raider {

/// A `call_tool{...}` expression found in an assistant message.
///
/// `begin`/`end` delimit the expression in the source text. A call whose
/// body could not be parsed keeps `malformed = true` and a reason in `error`;
/// the flow manager answers it with an unsuccessful-call warning.
struct ToolCall {
  std::string tool;
  std::vector<std::string> args;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool malformed = false;
  std::string error;

  std::string source;  // exact matched text
};

}  // namespace raider
