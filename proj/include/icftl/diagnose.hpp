#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "icftl/instrument.hpp"
#include "icftl/monitor.hpp"
#include "icftl/runtime.hpp"

namespace icftl::diagnose {

// Filtered trace whose events carry the multiplicity of their symbolic
// state in the expression's instrumentation multiset.
struct AnnotatedFSlice {
    runtime::FSlice slice;
    std::vector<std::vector<std::int64_t>> multiplicity;  // [run][event]
};

struct DiagnosisEntry {
    monitor::Binding binding;
    int atomIndex = 0;
    int slot = 0;
    std::string expressionText;
    std::shared_ptr<const AnnotatedFSlice> slice;  // shared across bindings
};

// Map from (falsified binding, expression of a falsifying atom) to the
// annotated slice explaining how the expression's value was computed.
struct Diagnosis {
    std::vector<DiagnosisEntry> entries;
};

// Indices of the atoms whose falsity contributes to the binding's negative
// verdict: false atoms for which some flip of other false atoms to true
// makes this atom's own flip change the body's value. For conjunctions this
// is every false atom. Throws InvariantViolation on a satisfied binding.
std::set<int> falsifying_atoms(const monitor::BindingVerdict& verdict,
                               const specs::Specification& spec);

Diagnosis build_diagnosis(const specs::Specification& spec, const runtime::IotaTrace& trace,
                          const instrument::InstrumentationPlan& plan,
                          const scfg::ScfgIndex& scfgs);

// The diagnosis set of program points. The static view includes every point
// of the involved expressions' instrumentation sets (also statically
// relevant points never executed, such as untaken branches); the
// executed-only view keeps just the points present in the slices.
std::set<miniproc::ProgramPoint> diagnosis_points(const Diagnosis& diag,
                                                  const instrument::InstrumentationPlan& plan,
                                                  bool executedOnly = false);

std::string write_diagnosis_json(const Diagnosis& diag, const runtime::IotaTrace& trace,
                                 const specs::Specification& spec);

}  // namespace icftl::diagnose
