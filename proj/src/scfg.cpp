#include "icftl/scfg.hpp"

#include <algorithm>

#include "icftl/errors.hpp"

namespace icftl::scfg {

using miniproc::AssignStmt;
using miniproc::CallStmt;
using miniproc::ForInStmt;
using miniproc::IfElseStmt;
using miniproc::ProgramPoint;
using miniproc::Statement;

const SymbolicState* Scfg::state_at_line(int line) const {
    for (const SymbolicState& v : vertices)
        if (!v.is_exit() && v.point.line == line) return &v;
    return nullptr;
}

namespace {

class Builder {
public:
    explicit Builder(const miniproc::Procedure& proc) : proc_(proc) {
        graph_.procName = proc.name;
        graph_.procedure = &proc;
    }

    Scfg build() {
        SymbolicState entry;
        entry.kind = StateKind::Entry;
        entry.point = ProgramPoint{proc_.name, proc_.defLine, 0};
        entry.written.insert(proc_.params.begin(), proc_.params.end());
        graph_.entryId = add(std::move(entry), {});

        int last = build_block(proc_.body, graph_.entryId);

        SymbolicState exitState;
        exitState.kind = StateKind::Exit;
        exitState.point = ProgramPoint{proc_.name, 0, 0};
        // The exit sink is never traversed backward from.
        graph_.exitId = add(std::move(exitState), {});
        edge(last, graph_.exitId);
        return std::move(graph_);
    }

private:
    const miniproc::Procedure& proc_;
    Scfg graph_;

    int add(SymbolicState state, std::vector<int> incoming) {
        state.id = static_cast<int>(graph_.vertices.size());
        graph_.vertices.push_back(std::move(state));
        graph_.successors.emplace_back();
        graph_.incomingStar.push_back(std::move(incoming));
        return graph_.vertices.back().id;
    }

    void edge(int from, int to) {
        auto& succ = graph_.successors[static_cast<std::size_t>(from)];
        if (std::find(succ.begin(), succ.end(), to) == succ.end()) succ.push_back(to);
    }

    SymbolicState make(StateKind kind, const Statement& s) {
        SymbolicState v;
        v.kind = kind;
        v.point = s.point;
        v.stmt = &s;
        return v;
    }

    // Appends the vertices of a statement block. `pred` is the unique state
    // control falls through from; returns the block's final state (which is
    // `pred` itself for an empty block).
    int build_block(const std::vector<Statement>& body, int pred) {
        int cur = pred;
        for (const Statement& s : body) cur = build_statement(s, cur);
        return cur;
    }

    int build_statement(const Statement& s, int pred) {
        if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
            SymbolicState v = make(StateKind::Assign, s);
            v.written.insert(a->target);
            v.read = miniproc::vars_of(*a->value);
            int id = add(std::move(v), {pred});
            edge(pred, id);
            return id;
        }
        if (const auto* call = std::get_if<CallStmt>(&s.node)) {
            SymbolicState v = make(StateKind::Call, s);
            v.called.insert(call->callee);
            for (const auto& arg : call->args)
                if (const auto* name = std::get_if<std::string>(&arg)) v.read.insert(*name);
            int id = add(std::move(v), {pred});
            edge(pred, id);
            return id;
        }
        if (const auto* loop = std::get_if<ForInStmt>(&s.node)) {
            SymbolicState header = make(StateKind::ForHeader, s);
            header.written.insert(loop->loopVar);
            // The back edge from the body is excluded from the header's
            // incoming star so each body is walked once backward.
            int headerId = add(std::move(header), {pred});
            edge(pred, headerId);

            int bodyLast = build_block(loop->body, headerId);
            if (bodyLast != headerId) edge(bodyLast, headerId);

            SymbolicState endFor = make(StateKind::EndFor, s);
            endFor.point = ProgramPoint{proc_.name, loop->endLine, 0};
            int endId = add(std::move(endFor), {bodyLast});
            edge(headerId, endId);
            return endId;
        }
        const auto& cond = std::get<IfElseStmt>(s.node);
        SymbolicState header = make(StateKind::IfHeader, s);
        header.read = miniproc::vars_of(*cond.cond);
        int headerId = add(std::move(header), {pred});
        edge(pred, headerId);

        int thenLast = build_block(cond.thenBody, headerId);
        int elseLast = headerId;
        if (cond.elseBody) {
            SymbolicState elseMarker = make(StateKind::ElseMarker, s);
            elseMarker.point = ProgramPoint{proc_.name, cond.elseLine, 0};
            int elseId = add(std::move(elseMarker), {headerId});
            edge(headerId, elseId);
            elseLast = build_block(*cond.elseBody, elseId);
        }

        SymbolicState endIf = make(StateKind::EndIf, s);
        endIf.point = ProgramPoint{proc_.name, cond.endLine, 0};
        std::vector<int> star{thenLast};
        if (elseLast != thenLast) star.push_back(elseLast);
        int endId = add(std::move(endIf), star);
        edge(thenLast, endId);
        edge(elseLast, endId);
        return endId;
    }
};

}  // namespace

Scfg build_scfg(const miniproc::Procedure& proc) { return Builder(proc).build(); }

std::vector<const SymbolicState*> incoming_star(const SymbolicState& state, const Scfg& graph) {
    std::vector<const SymbolicState*> out;
    for (int id : graph.incomingStar[static_cast<std::size_t>(state.id)])
        out.push_back(&graph.vertices[static_cast<std::size_t>(id)]);
    return out;
}

namespace {

std::string join_set(const std::set<std::string>& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& v : s) {
        if (!first) out += ",";
        out += v;
        first = false;
    }
    return out + "}";
}

std::string node_label(const SymbolicState& v) {
    if (v.is_exit()) return "\xce\xb5";  // ε
    return "\xcf\x83" + std::to_string(v.point.line) +  // σ<line>
           (v.point.ordinal ? "." + std::to_string(v.point.ordinal) : "") +
           " W=" + join_set(v.written) + " R=" + join_set(v.read) +
           " C=" + join_set(v.called);
}

}  // namespace

std::string export_dot(const Scfg& graph) {
    // Nodes ordered by (line, ordinal) with the exit sink last.
    std::vector<const SymbolicState*> order;
    for (const SymbolicState& v : graph.vertices)
        if (!v.is_exit()) order.push_back(&v);
    std::sort(order.begin(), order.end(), [](const SymbolicState* a, const SymbolicState* b) {
        return std::pair(a->point.line, a->point.ordinal) <
               std::pair(b->point.line, b->point.ordinal);
    });
    order.push_back(&graph.vertices[static_cast<std::size_t>(graph.exitId)]);

    std::vector<int> position(graph.vertices.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i)
        position[static_cast<std::size_t>(order[i]->id)] = static_cast<int>(i);

    std::string out = "digraph \"" + graph.procName + "\" {\n";
    for (std::size_t i = 0; i < order.size(); ++i)
        out += "  n" + std::to_string(i) + " [label=\"" + node_label(*order[i]) + "\"];\n";
    std::vector<std::pair<int, int>> edges;
    for (std::size_t from = 0; from < graph.successors.size(); ++from)
        for (int to : graph.successors[from])
            edges.emplace_back(position[from], position[static_cast<std::size_t>(to)]);
    std::sort(edges.begin(), edges.end());
    for (const auto& [from, to] : edges)
        out += "  n" + std::to_string(from) + " -> n" + std::to_string(to) + ";\n";
    out += "}\n";
    return out;
}

ScfgIndex ScfgIndex::build(const miniproc::SystemOfProcedures& system) {
    ScfgIndex index;
    for (const auto& [name, proc] : system.procedures)
        index.byProc.emplace(name, build_scfg(proc));
    return index;
}

const Scfg& ScfgIndex::at(const std::string& proc) const {
    auto it = byProc.find(proc);
    if (it == byProc.end()) throw LinkError("no procedure named '" + proc + "'");
    return it->second;
}

const SymbolicState* ScfgIndex::resolve(const std::string& proc, int line) const {
    auto it = byProc.find(proc);
    if (it == byProc.end()) return nullptr;
    return it->second.state_at_line(line);
}

}  // namespace icftl::scfg
