#pragma once

#include <string>
#include <string_view>

namespace inlinerec {

// Returns a copy of C source with comments and string/char literals blanked to
// spaces. Newlines are kept, so byte offsets and line numbers are unchanged.
// With mask_preprocessor, directive lines (including backslash continuations)
// are blanked too.
std::string mask_c_noncode(std::string_view src, bool mask_preprocessor = true);

} // namespace inlinerec
