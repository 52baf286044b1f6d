#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "icftl/runtime.hpp"
#include "icftl/scfg.hpp"
#include "icftl/specs.hpp"

namespace icftl::monitor {

// Position of a concrete state in a trace.
struct BoundState {
    std::size_t run = 0;
    std::size_t index = 0;

    bool operator==(const BoundState&) const = default;
};

// One assignment of the specification's quantified variables to concrete
// states; states[i] belongs to quantifiers[i].
struct Binding {
    std::vector<BoundState> states;

    const runtime::TraceEvent& event(const runtime::IotaTrace& trace, std::size_t i) const {
        return trace.runs[states[i].run].events[states[i].index];
    }
};

struct EvalResult {
    bool resolved = false;
    std::int64_t value = 0;
};

struct AtomOutcome {
    bool resolved = false;  // false when a next-change never happens
    bool value = false;     // unresolved atoms count as false
};

struct BindingVerdict {
    Binding binding;
    bool value = false;
    std::vector<AtomOutcome> atoms;  // parallel to Specification::atoms
};

struct VerdictMap {
    std::vector<BindingVerdict> entries;

    bool all_satisfied() const;
};

// Sorted per-(procedure, variable) index of the trace's write events, used
// to resolve next-change expressions without rescanning.
class TraceIndex {
public:
    static TraceIndex build(const runtime::IotaTrace& trace, const scfg::ScfgIndex& scfgs);

    // Value of the earliest change of `var` in a run labeled `proc` with a
    // timestamp strictly greater than `after`.
    EvalResult next_change(const std::string& proc, const std::string& var,
                           runtime::Timestamp after) const;

private:
    std::map<std::pair<std::string, std::string>,
             std::vector<std::pair<runtime::Timestamp, std::int64_t>>>
        writes_;
};

// Cross product over quantifiers of the concrete states whose symbolic
// state writes the quantified variable, in trace order. Entry events never
// match. Events at lines with no corresponding statement raise MissingValue.
std::vector<Binding> enumerate_bindings(const runtime::IotaTrace& trace,
                                        const specs::Specification& spec,
                                        const scfg::ScfgIndex& scfgs);

EvalResult eval_expression(const runtime::IotaTrace& trace, const specs::Specification& spec,
                           const Binding& binding, const specs::Expression& expr,
                           const TraceIndex& index);

VerdictMap check(const runtime::IotaTrace& trace, const specs::Specification& spec,
                 const scfg::ScfgIndex& scfgs);

// "q=g:18@2.7" fragments joined with spaces, for CLI output and stable
// binding identity across filtered and unfiltered traces.
std::string binding_signature(const runtime::IotaTrace& trace,
                              const specs::Specification& spec, const Binding& binding);

}  // namespace icftl::monitor
