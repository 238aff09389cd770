#pragma once

#include "codec/mj.h"
#include "codec/sketch.h"

namespace codec {

// Type given to expressions whose static type cannot be recovered (results of
// calls, field reads, unknown identifiers).
inline constexpr std::string_view kObjectType = "Object";

// Maps a parsed method to its sketch: keeps API calls (with receiver and
// argument types resolved from declarations in the method, its formals and
// the owner's fields), control shape and header types; drops variables,
// literals and arithmetic. Control statements that contain no call at all
// become skip. A hole body decompiles to skip.
SketchAst decompile(const MethodAst& method, const ClassUnit* owner = nullptr);

}  // namespace codec
