#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tbsim/taskgraph.hpp"

namespace tbsim {

// ordered_json keeps insertion order, so records serialize exactly as
// documented in the header ("kind" first) and output is byte-stable.
using json = nlohmann::ordered_json;

void save_dag(const TaskGraph& g, std::ostream& out) {
    json meta;
    meta["kind"] = "meta";
    meta["name"] = g.name;
    meta["version"] = 1;
    out << meta.dump() << '\n';
    for (const auto& h : g.handles) {
        json rec;
        rec["kind"] = "handle";
        rec["id"] = h.id;
        rec["bytes"] = h.bytes;
        out << rec.dump() << '\n';
    }
    for (const auto& t : g.tasks) {
        json rec;
        rec["kind"] = "task";
        rec["id"] = t.id;
        rec["type"] = t.type;
        rec["deps"] = t.deps;
        rec["inputs"] = t.inputs;
        rec["outputs"] = t.outputs;
        out << rec.dump() << '\n';
    }
}

void save_dag_file(const TaskGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_dag(g, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::int64_t get_int(const json& rec, const char* field, int line) {
    auto it = rec.find(field);
    if (it == rec.end()) fail(line, std::string("missing field \"") + field + "\"");
    if (!it->is_number_integer())
        fail(line, std::string("field \"") + field + "\" must be an integer");
    return it->get<std::int64_t>();
}

std::string get_str(const json& rec, const char* field, int line) {
    auto it = rec.find(field);
    if (it == rec.end()) fail(line, std::string("missing field \"") + field + "\"");
    if (!it->is_string())
        fail(line, std::string("field \"") + field + "\" must be a string");
    return it->get<std::string>();
}

std::vector<std::int64_t> get_int_array(const json& rec, const char* field,
                                        int line) {
    auto it = rec.find(field);
    if (it == rec.end()) fail(line, std::string("missing field \"") + field + "\"");
    if (!it->is_array())
        fail(line, std::string("field \"") + field + "\" must be an array");
    std::vector<std::int64_t> out;
    for (const auto& v : *it) {
        if (!v.is_number_integer())
            fail(line, std::string("field \"") + field + "\" must hold integers");
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

}  // namespace

TaskGraph load_dag(std::istream& in) {
    TaskGraph g;
    std::string line;
    int lineno = 0;
    bool seen_meta = false;
    while (std::getline(in, line)) {
        lineno += 1;
        if (line.empty()) fail(lineno, "empty line");
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(lineno, std::string("bad JSON: ") + e.what());
        }
        if (!rec.is_object()) fail(lineno, "record is not an object");
        std::string kind = get_str(rec, "kind", lineno);
        if (kind == "meta") {
            if (seen_meta) fail(lineno, "duplicate meta record");
            if (lineno != 1) fail(lineno, "meta record must come first");
            seen_meta = true;
            g.name = get_str(rec, "name", lineno);
            if (get_int(rec, "version", lineno) != 1)
                fail(lineno, "unsupported version");
        } else if (kind == "handle") {
            if (!seen_meta) fail(lineno, "record before meta");
            DataHandle h;
            h.id = get_int(rec, "id", lineno);
            h.bytes = get_int(rec, "bytes", lineno);
            g.handles.push_back(h);
        } else if (kind == "task") {
            if (!seen_meta) fail(lineno, "record before meta");
            TaskNode t;
            t.id = get_int(rec, "id", lineno);
            t.type = get_str(rec, "type", lineno);
            t.deps = get_int_array(rec, "deps", lineno);
            t.inputs = get_int_array(rec, "inputs", lineno);
            t.outputs = get_int_array(rec, "outputs", lineno);
            g.tasks.push_back(std::move(t));
        } else {
            fail(lineno, "unknown record kind \"" + kind + "\"");
        }
    }
    if (!seen_meta) throw std::runtime_error("missing meta record");

    auto violations = validate(g);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid graph:";
        for (const auto& v : violations) msg << "\n  " << v.message;
        throw std::runtime_error(msg.str());
    }
    return g;
}

TaskGraph load_dag_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_dag(in);
}

}  // namespace tbsim
