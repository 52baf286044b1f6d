#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "icftl/instrument.hpp"
#include "icftl/miniproc.hpp"
#include "icftl/specs.hpp"

namespace icftl::testkit {

struct GenConfig {
    std::uint64_t seed = 0;
    int maxProcs = 4;
    int maxStmtsPerProc = 12;
    int maxBlockDepth = 2;
    int loopMax = 3;
    bool allowRecursion = false;  // recursion is only built, never executed
    bool allowLoops = true;
};

// Deterministic random system: always parses and links, the first procedure
// takes no arguments, every variable is initialized before use on every
// path, and (without the recursion flag) execution stays within int64
// arithmetic.
miniproc::SystemOfProcedures gen_program(const GenConfig& config);

// Random specification over variables actually written somewhere in the
// system; produced as surface text and run through parse_spec.
specs::Specification gen_spec(const miniproc::SystemOfProcedures& system, std::uint64_t seed);

// Independent relevance oracle: enumerates backward paths over a marker-free
// skeleton built directly from the AST (branch fan-in at joins, loop bodies
// walked once, call-site renaming, repeated-configuration cut) and counts
// per-state contributions with a gen/kill scan along each path prefix.
instrument::MultiplicityMultiset oracle_relevance(const miniproc::ProgramPoint& seedPoint,
                                                  const miniproc::SystemOfProcedures& system);

// Direct recursive evaluation without traces; returns the entry
// activation's final variable values. Assumes in-range arithmetic.
std::map<std::string, std::int64_t> reference_eval(const miniproc::SystemOfProcedures& system,
                                                   const std::string& entry,
                                                   const std::vector<std::int64_t>& args);

}  // namespace icftl::testkit
