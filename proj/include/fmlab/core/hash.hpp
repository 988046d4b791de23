#pragma once

#include <string>
#include <string_view>

namespace fmlab {

// SHA-1 of "blob <size>\0<content>", hex encoded (what `git hash-object`
// prints for the same bytes).
std::string git_blob_sha1(std::string_view content);

}  // namespace fmlab
