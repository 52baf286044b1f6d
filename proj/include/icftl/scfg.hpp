#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "icftl/miniproc.hpp"

namespace icftl::scfg {

enum class StateKind {
    Entry,       // procedure entry; writes the parameters
    Assign,
    ForHeader,   // writes the loop variable once per iteration
    IfHeader,    // reads the condition variables
    ElseMarker,  // the `else:` line
    EndFor,
    EndIf,
    Call,
    Exit,        // distinguished sink, no program point
};

// A program point plus the <written, read, called> triple of its statement.
// Else/end markers carry empty triples and are transparent to dataflow.
struct SymbolicState {
    StateKind kind = StateKind::Assign;
    miniproc::ProgramPoint point;
    std::set<std::string> written;
    std::set<std::string> read;
    std::set<std::string> called;
    const miniproc::Statement* stmt = nullptr;  // null for Entry/Exit and markers
    int id = -1;

    bool is_entry() const { return kind == StateKind::Entry; }
    bool is_exit() const { return kind == StateKind::Exit; }
    // True for states the interpreter records in every trace; the if/else/end
    // marker events are kept only when marker recording is requested.
    bool always_recorded() const {
        return kind == StateKind::Entry || kind == StateKind::Assign ||
               kind == StateKind::ForHeader || kind == StateKind::Call;
    }
};

// Per-procedure symbolic control-flow graph. `incomingStar` holds the
// backward-traversal predecessors of each vertex: branch fan-in at endIf
// joins, and loops shaped so each body is walked exactly once backward
// (loop headers reach the pre-loop state, end markers the last body state).
struct Scfg {
    std::string procName;
    const miniproc::Procedure* procedure = nullptr;
    std::vector<SymbolicState> vertices;  // [entryId] first, [exitId] last
    std::vector<std::vector<int>> successors;
    std::vector<std::vector<int>> incomingStar;
    int entryId = 0;
    int exitId = 0;

    const SymbolicState& entry() const { return vertices[static_cast<std::size_t>(entryId)]; }
    const SymbolicState* state_at_line(int line) const;
};

Scfg build_scfg(const miniproc::Procedure& proc);

// Backward-traversal predecessors of `state`; empty for the entry state.
std::vector<const SymbolicState*> incoming_star(const SymbolicState& state, const Scfg& graph);

// Graphviz digraph with one node per symbolic state, deterministically
// ordered by (line, ordinal) with the exit sink last.
std::string export_dot(const Scfg& graph);

// All SCFGs of a linked system, with point resolution across procedures.
struct ScfgIndex {
    std::map<std::string, Scfg> byProc;

    static ScfgIndex build(const miniproc::SystemOfProcedures& system);

    const Scfg& at(const std::string& proc) const;  // throws LinkError
    const SymbolicState* resolve(const std::string& proc, int line) const;
};

}  // namespace icftl::scfg
