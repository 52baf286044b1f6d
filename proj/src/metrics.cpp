#include "icftl/metrics.hpp"

#include <deque>
#include <map>

#include "json.hpp"

#include "icftl/errors.hpp"

namespace icftl::metrics {

using miniproc::ProgramPoint;
using miniproc::Statement;
using miniproc::SystemOfProcedures;

namespace {

void collect_callees(const std::vector<Statement>& body, std::set<std::string>& out) {
    for (const Statement& s : body) {
        if (const auto* call = std::get_if<miniproc::CallStmt>(&s.node)) {
            out.insert(call->callee);
        } else if (const auto* loop = std::get_if<miniproc::ForInStmt>(&s.node)) {
            collect_callees(loop->body, out);
        } else if (const auto* cond = std::get_if<miniproc::IfElseStmt>(&s.node)) {
            collect_callees(cond->thenBody, out);
            if (cond->elseBody) collect_callees(*cond->elseBody, out);
        }
    }
}

// BFS over the reversed call graph: distance grows from the violation
// procedure towards its callers.
std::map<std::string, int> caller_distances(const std::string& violationProc,
                                            const SystemOfProcedures& system) {
    std::map<std::string, std::set<std::string>> callersOf;
    for (const auto& [name, proc] : system.procedures) {
        std::set<std::string> callees;
        collect_callees(proc.body, callees);
        for (const std::string& callee : callees) callersOf[callee].insert(name);
    }
    std::map<std::string, int> dist;
    if (!system.find(violationProc)) return dist;
    dist[violationProc] = 0;
    std::deque<std::string> queue{violationProc};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        for (const std::string& caller : callersOf[cur]) {
            if (dist.count(caller)) continue;
            dist[caller] = dist[cur] + 1;
            queue.push_back(caller);
        }
    }
    return dist;
}

}  // namespace

Proximity proximity_of(const ProgramPoint& point, const std::string& violationProc,
                       const SystemOfProcedures& system) {
    auto dist = caller_distances(violationProc, system);
    auto it = dist.find(point.procedure);
    return it == dist.end() ? Proximity::inf() : Proximity::at(it->second);
}

Proximity proximity_of(const ProgramPoint& point, const std::vector<std::string>& violationProcs,
                       const SystemOfProcedures& system) {
    Proximity best = Proximity::inf();
    for (const std::string& proc : violationProcs) {
        Proximity p = proximity_of(point, proc, system);
        if (p <= best) best = p;
    }
    return best;
}

LevelStats precision_recall(const std::set<ProgramPoint>& predicted,
                            const std::vector<GroundTruthEntry>& groundTruth, Proximity level,
                            const std::vector<std::string>& violationProcs,
                            const SystemOfProcedures& system) {
    std::set<ProgramPoint> gtAtLevel;
    for (const GroundTruthEntry& e : groundTruth)
        if (e.proximity <= level) gtAtLevel.insert(e.point);

    std::set<ProgramPoint> predictedAtLevel;
    for (const ProgramPoint& p : predicted)
        if (proximity_of(p, violationProcs, system) <= level) predictedAtLevel.insert(p);

    LevelStats stats;
    for (const ProgramPoint& p : predictedAtLevel)
        gtAtLevel.count(p) ? ++stats.tp : ++stats.fp;
    for (const ProgramPoint& p : gtAtLevel)
        if (!predictedAtLevel.count(p)) ++stats.fn;
    stats.precision =
        stats.tp + stats.fp == 0 ? 1.0 : static_cast<double>(stats.tp) / (stats.tp + stats.fp);
    stats.recall =
        stats.tp + stats.fn == 0 ? 1.0 : static_cast<double>(stats.tp) / (stats.tp + stats.fn);
    return stats;
}

std::pair<double, double> complexity_reduction_counts(std::int64_t points, std::int64_t sloc,
                                                      std::int64_t touchedFunctions,
                                                      std::int64_t functions) {
    if (sloc <= 0 || functions <= 0)
        throw InvariantViolation("complexity reduction needs nonzero SLOC and function counts");
    return {1.0 - static_cast<double>(points) / static_cast<double>(sloc),
            1.0 - static_cast<double>(touchedFunctions) / static_cast<double>(functions)};
}

std::pair<double, double> complexity_reduction(const std::set<ProgramPoint>& points,
                                               const SystemOfProcedures& system) {
    std::set<std::string> touched;
    for (const ProgramPoint& p : points) touched.insert(p.procedure);
    return complexity_reduction_counts(
        static_cast<std::int64_t>(points.size()), miniproc::statement_count(system),
        static_cast<std::int64_t>(touched.size()),
        static_cast<std::int64_t>(system.procedures.size()));
}

std::vector<GroundTruthEntry> read_gt_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, std::string("invalid ground truth: ") + e.what());
    }
    std::vector<GroundTruthEntry> out;
    try {
        for (const auto& item : doc) {
            GroundTruthEntry entry;
            entry.point = ProgramPoint{item.at("proc").get<std::string>(),
                                       item.at("line").get<int>(), 0};
            const auto& prox = item.at("proximity");
            if (prox.is_string()) {
                if (prox.get<std::string>() != "inf")
                    throw FormatError(1, "proximity must be an integer or \"inf\"");
                entry.proximity = Proximity::inf();
            } else {
                entry.proximity = Proximity::at(prox.get<int>());
            }
            out.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, std::string("invalid ground truth: ") + e.what());
    }
    return out;
}

std::string write_gt_json(const std::vector<GroundTruthEntry>& entries) {
    nlohmann::json out = nlohmann::json::array();
    for (const GroundTruthEntry& e : entries) {
        nlohmann::json item = {{"proc", e.point.procedure}, {"line", e.point.line}};
        if (e.proximity.infinite)
            item["proximity"] = "inf";
        else
            item["proximity"] = e.proximity.value;
        out.push_back(item);
    }
    return out.dump(2) + "\n";
}

}  // namespace icftl::metrics
