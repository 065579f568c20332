#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace banditservo
{
struct SelftestOptions
{
  bool list = false;                // print invariant names, run nothing
  std::vector<std::string> inject;  // fault hooks; the touched invariant must then fail
};

std::vector<std::string> selftest_invariant_names();

// Runs the embedded invariant suite, one "ok"/"FAIL" line per invariant.
// Returns 0 when everything holds, 1 when an invariant fails, 2 on an
// unknown inject name.
int selftest(const SelftestOptions& options, std::ostream& out);
}
