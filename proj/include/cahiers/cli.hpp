#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cahiers {

// Full command-line front end: routes {weil eval, jet prolong, el derive,
// el check, jacobi derive, bicomplex verify, perturb expand}. Returns the
// process exit code: 0 success, 1 check failure, 2 usage or input error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cahiers
