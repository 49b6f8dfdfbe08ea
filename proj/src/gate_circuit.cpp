#include "fluidrank/gate_circuit.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/json_fields.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fluidrank {

namespace jf = json_fields;
using nlohmann::json;

const char* to_string(GateKind kind) {
    switch (kind) {
    case GateKind::Not: return "NOT";
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    }
    return "?";
}

std::string input_name(int index) { return std::string(1, static_cast<char>('A' + index)); }

namespace {

bool is_constant(const std::string& ref) { return ref == kConstLow || ref == kConstHigh; }

std::size_t expected_fan_in(GateKind kind) { return kind == GateKind::Not ? 1 : 2; }

} // namespace

void check_circuit(const GateCircuit& c) {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "gate circuit: " + what); };
    std::set<std::string> defined;
    for (const auto& in : c.inputs) {
        if (in.empty() || is_constant(in)) bad("invalid input name '" + in + "'");
        if (!defined.insert(in).second) bad("duplicate name '" + in + "'");
    }
    for (const auto& g : c.gates) {
        if (g.inputs.size() != expected_fan_in(g.kind)) {
            bad("gate '" + g.id + "' (" + to_string(g.kind) + ") has fan-in " + std::to_string(g.inputs.size()));
        }
        for (const auto& ref : g.inputs) {
            if (!is_constant(ref) && !defined.count(ref)) {
                bad("gate '" + g.id + "' input '" + ref + "' is not a port or an earlier gate");
            }
        }
        if (g.id.empty() || is_constant(g.id)) bad("invalid gate id '" + g.id + "'");
        if (!defined.insert(g.id).second) bad("duplicate name '" + g.id + "'");
    }
    std::set<std::string> output_names;
    for (const auto& o : c.outputs) {
        if (!output_names.insert(o.name).second) bad("duplicate output '" + o.name + "'");
        if (!is_constant(o.ref) && !defined.count(o.ref)) bad("output '" + o.name + "' references unknown '" + o.ref + "'");
    }
}

Bits evaluate_logic(const GateCircuit& c, const Bits& code) {
    if (code.size() != c.inputs.size()) {
        throw Error(ErrorCode::WidthMismatch, "code has " + std::to_string(code.size()) + " bits but the circuit has " +
                                                  std::to_string(c.inputs.size()) + " inputs");
    }
    check_circuit(c);
    std::map<std::string, bool> value{{kConstLow, false}, {kConstHigh, true}};
    for (std::size_t i = 0; i < code.size(); ++i) value[c.inputs[i]] = code[i];
    for (const auto& g : c.gates) {
        switch (g.kind) {
        case GateKind::Not: value[g.id] = !value.at(g.inputs[0]); break;
        case GateKind::And: value[g.id] = value.at(g.inputs[0]) && value.at(g.inputs[1]); break;
        case GateKind::Or: value[g.id] = value.at(g.inputs[0]) || value.at(g.inputs[1]); break;
        }
    }
    Bits out;
    out.reserve(c.outputs.size());
    for (const auto& o : c.outputs) out.push_back(value.at(o.ref));
    return out;
}

unsigned code_value(const Bits& code) {
    unsigned v = 0;
    for (bool b : code) v = (v << 1) | (b ? 1u : 0u);
    return v;
}

Bits code_bits(unsigned value, int width) {
    Bits bits(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) bits[static_cast<std::size_t>(i)] = ((value >> (width - 1 - i)) & 1u) != 0;
    return bits;
}

void check_truth_table(const TruthTable& t) {
    if (t.n_inputs < kMinLogicInputs || t.n_inputs > kMaxLogicInputs) {
        throw Error(ErrorCode::UnsupportedWidth, "truth tables support 2 to 4 inputs (got " + std::to_string(t.n_inputs) + ")");
    }
    const std::size_t expected = std::size_t{1} << t.n_inputs;
    if (t.rows.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "truth table needs exactly " + std::to_string(expected) + " rows");
    }
    const auto width = t.rows.front().size();
    if (width == 0) throw Error(ErrorCode::InvalidArgument, "truth table needs at least one output");
    for (const auto& row : t.rows) {
        if (row.size() != width) throw Error(ErrorCode::InvalidArgument, "truth table rows differ in width");
    }
    if (!t.output_names.empty() && t.output_names.size() != width) {
        throw Error(ErrorCode::InvalidArgument, "truth table output_names must match the output width");
    }
}

TruthTable demux_truth_table(int n_inputs) {
    if (n_inputs < kMinLogicInputs || n_inputs > kMaxLogicInputs) {
        throw Error(ErrorCode::UnsupportedWidth,
                    "demultiplexer width must be between 2 and 4 inputs (got " + std::to_string(n_inputs) + ")");
    }
    TruthTable t;
    t.n_inputs = n_inputs;
    const std::size_t size = std::size_t{1} << n_inputs;
    for (std::size_t code = 0; code < size; ++code) {
        Bits row(size, false);
        row[code] = true;
        t.rows.push_back(std::move(row));
        t.output_names.push_back("S" + std::to_string(code));
    }
    return t;
}

namespace {

/// Appends a balanced tree of two-input gates over `operands` and returns the
/// reference of its root. The root gets `name`, inner gates `name.k`.
std::string build_tree(GateCircuit& c, GateKind kind, const std::vector<std::string>& operands,
                       const std::string& name) {
    int counter = 0;
    auto rec = [&](auto& self, std::size_t lo, std::size_t hi, bool root) -> std::string {
        if (hi - lo == 1) return operands[lo];
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        auto left = self(self, lo, mid, false);
        auto right = self(self, mid, hi, false);
        std::string id = root ? name : name + "." + std::to_string(counter++);
        c.gates.push_back(Gate{id, kind, {left, right}});
        return id;
    };
    return rec(rec, 0, operands.size(), true);
}

} // namespace

GateCircuit synthesize(const TruthTable& t) {
    check_truth_table(t);
    GateCircuit c;
    for (int i = 0; i < t.n_inputs; ++i) c.inputs.push_back(input_name(i));

    const std::size_t rows = t.rows.size();
    const auto width = static_cast<std::size_t>(t.n_outputs());
    std::vector<bool> used(rows, false);
    for (std::size_t code = 0; code < rows; ++code) {
        for (std::size_t o = 0; o < width; ++o) used[code] = used[code] || t.rows[code][o];
    }

    // Shared inverters, only for inputs some used minterm complements.
    std::vector<bool> needs_not(static_cast<std::size_t>(t.n_inputs), false);
    for (std::size_t code = 0; code < rows; ++code) {
        if (!used[code]) continue;
        auto bits = code_bits(static_cast<unsigned>(code), t.n_inputs);
        for (std::size_t i = 0; i < bits.size(); ++i) needs_not[i] = needs_not[i] || !bits[i];
    }
    for (int i = 0; i < t.n_inputs; ++i) {
        if (needs_not[static_cast<std::size_t>(i)]) c.gates.push_back(Gate{"n" + input_name(i), GateKind::Not, {input_name(i)}});
    }

    std::vector<std::string> minterm(rows);
    for (std::size_t code = 0; code < rows; ++code) {
        if (!used[code]) continue;
        auto bits = code_bits(static_cast<unsigned>(code), t.n_inputs);
        std::vector<std::string> literals;
        for (int i = 0; i < t.n_inputs; ++i) {
            literals.push_back(bits[static_cast<std::size_t>(i)] ? input_name(i) : "n" + input_name(i));
        }
        minterm[code] = build_tree(c, GateKind::And, literals, "m" + std::to_string(code));
    }

    for (std::size_t o = 0; o < width; ++o) {
        std::string name = t.output_names.empty() ? "Y" + std::to_string(o) : t.output_names[o];
        std::vector<std::string> terms;
        for (std::size_t code = 0; code < rows; ++code) {
            if (t.rows[code][o]) terms.push_back(minterm[code]);
        }
        std::string ref = terms.empty() ? std::string(kConstLow) : build_tree(c, GateKind::Or, terms, "or_" + name);
        c.outputs.push_back(OutputPort{name, ref});
    }
    return c;
}

GateCircuit synth_demux(int n_inputs) { return synthesize(demux_truth_table(n_inputs)); }

int logic_depth(const GateCircuit& c) {
    check_circuit(c);
    std::map<std::string, int> depth;
    auto depth_of = [&](const std::string& ref) {
        auto it = depth.find(ref);
        return it == depth.end() ? 0 : it->second;
    };
    for (const auto& g : c.gates) {
        int d = 0;
        for (const auto& in : g.inputs) d = std::max(d, depth_of(in));
        depth[g.id] = d + 1;
    }
    int longest = 0;
    for (const auto& o : c.outputs) longest = std::max(longest, depth_of(o.ref));
    return longest;
}

double propagation_delay_estimate(const GateCircuit& c, const ValveParams& v) {
    if (!(v.open_flow.slm > 0.0)) throw Error(ErrorCode::InvalidArgument, "open_flow must be > 0");
    return logic_depth(c) * (v.snap_fill_volume.ml / slm_to_ml_per_s(v.open_flow));
}

json to_json(const GateCircuit& c) {
    json gates = json::array();
    for (const auto& g : c.gates) gates.push_back(json{{"id", g.id}, {"kind", to_string(g.kind)}, {"inputs", g.inputs}});
    json outputs = json::array();
    for (const auto& o : c.outputs) outputs.push_back(json{{"name", o.name}, {"ref", o.ref}});
    return json{{"inputs", c.inputs}, {"gates", gates}, {"outputs", outputs}};
}

namespace {

std::vector<std::string> string_list(const json& j, const std::string& key, const std::string& path) {
    const auto& arr = jf::array(j, key, path);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) jf::fail(jf::index(jf::join(path, key), i), "expected a string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

} // namespace

GateCircuit gate_circuit_from_json(const json& j) {
    GateCircuit c;
    c.inputs = string_list(j, "inputs", "");
    const auto& gates = jf::array(j, "gates", "");
    for (std::size_t i = 0; i < gates.size(); ++i) {
        auto path = jf::index("gates", i);
        Gate g;
        g.id = jf::string(gates[i], "id", path);
        auto kind = jf::string(gates[i], "kind", path);
        if (kind == "NOT") g.kind = GateKind::Not;
        else if (kind == "AND") g.kind = GateKind::And;
        else if (kind == "OR") g.kind = GateKind::Or;
        else jf::fail(jf::join(path, "kind"), "unknown gate kind '" + kind + "'");
        g.inputs = string_list(gates[i], "inputs", path);
        c.gates.push_back(std::move(g));
    }
    const auto& outputs = jf::array(j, "outputs", "");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        auto path = jf::index("outputs", i);
        c.outputs.push_back(OutputPort{jf::string(outputs[i], "name", path), jf::string(outputs[i], "ref", path)});
    }
    check_circuit(c);
    return c;
}

json to_json(const TruthTable& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (bool b : row) r.push_back(b ? 1 : 0);
        rows.push_back(std::move(r));
    }
    json out{{"n_inputs", t.n_inputs}, {"outputs", rows}};
    if (!t.output_names.empty()) out["output_names"] = t.output_names;
    return out;
}

TruthTable truth_table_from_json(const json& j) {
    TruthTable t;
    t.n_inputs = static_cast<int>(jf::integer(j, "n_inputs", ""));
    const auto& rows = jf::array(j, "outputs", "");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto path = jf::index("outputs", i);
        if (!rows[i].is_array()) jf::fail(path, "expected an array of output bits");
        Bits row;
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            const auto& b = rows[i][k];
            if (b.is_boolean()) row.push_back(b.get<bool>());
            else if (b.is_number_integer() && (b.get<int>() == 0 || b.get<int>() == 1)) row.push_back(b.get<int>() == 1);
            else jf::fail(jf::index(path, k), "expected 0, 1, true or false");
        }
        t.rows.push_back(std::move(row));
    }
    if (j.contains("output_names")) t.output_names = string_list(j, "output_names", "");
    check_truth_table(t);
    return t;
}

} // namespace fluidrank
