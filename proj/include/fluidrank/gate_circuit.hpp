#pragma once

#include "fluidrank/valve.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fluidrank {

enum class GateKind { Not, And, Or };

const char* to_string(GateKind kind);

/// Signal references are port names, gate ids, or the constants "#0" / "#1".
inline constexpr const char* kConstLow = "#0";
inline constexpr const char* kConstHigh = "#1";

struct Gate {
    std::string id;
    GateKind kind = GateKind::Not;
    std::vector<std::string> inputs;

    bool operator==(const Gate&) const = default;
};

struct OutputPort {
    std::string name;
    std::string ref;

    bool operator==(const OutputPort&) const = default;
};

/// Combinational circuit of NOT and two-input AND/OR gates. Gates are stored in
/// topological order: every gate input is a port, a constant or an earlier gate.
struct GateCircuit {
    std::vector<std::string> inputs;
    std::vector<Gate> gates;
    std::vector<OutputPort> outputs;

    bool operator==(const GateCircuit&) const = default;
};

/// Throws Error(InvalidArgument) on duplicate names, forward or dangling
/// references, or wrong fan-in.
void check_circuit(const GateCircuit& c);

using Bits = std::vector<bool>;

/// `code[0]` drives the first input. Throws Error(WidthMismatch) when the
/// code width differs from the input count.
Bits evaluate_logic(const GateCircuit& c, const Bits& code);

/// Input code as an integer, first bit most significant.
unsigned code_value(const Bits& code);
Bits code_bits(unsigned value, int width);

/// Complete truth table, rows indexed by code value.
struct TruthTable {
    int n_inputs = 0;
    std::vector<Bits> rows;
    std::vector<std::string> output_names;

    int n_outputs() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

inline constexpr int kMinLogicInputs = 2;
inline constexpr int kMaxLogicInputs = 4;

void check_truth_table(const TruthTable& t);
TruthTable demux_truth_table(int n_inputs);

/// Sum-of-products synthesis: shared input inverters, one balanced AND tree per
/// used minterm, one balanced OR tree per output. No minimization.
GateCircuit synthesize(const TruthTable& t);

/// One-hot decoder over n_inputs; output Sk is the minterm of code k.
/// Throws Error(UnsupportedWidth) outside [2, 4].
GateCircuit synth_demux(int n_inputs);

/// Longest input-to-output path, counted in gates.
int logic_depth(const GateCircuit& c);

/// Lower bound on settling time: depth times the time one valve's snap volume
/// takes to fill at open flow.
double propagation_delay_estimate(const GateCircuit& c, const ValveParams& v);

std::string input_name(int index);

nlohmann::json to_json(const GateCircuit& c);
GateCircuit gate_circuit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TruthTable& t);
TruthTable truth_table_from_json(const nlohmann::json& j);

} // namespace fluidrank
