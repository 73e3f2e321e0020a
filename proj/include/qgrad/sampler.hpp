#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "qgrad/grid.hpp"
#include "qgrad/oracle.hpp"
#include "qgrad/rng.hpp"

namespace qgrad {

using LatticeSpec = std::variant<GridSpec, SqSpec>;

int lattice_axes(const LatticeSpec& spec);
std::int64_t lattice_axis_len(const LatticeSpec& spec);
std::int64_t lattice_size(const LatticeSpec& spec);
std::int64_t lattice_min_label(const LatticeSpec& spec);
double lattice_axis_value(const LatticeSpec& spec, std::int64_t label);

/// Reads the optional amplitude-cap override from QGRAD_AMPLITUDE_CAP;
/// defaults to 2^24 amplitudes (~512 MB of complex doubles at the extreme).
std::int64_t default_amplitude_cap();

/// A real phase per lattice point, in units of 2*pi (the exponent multiplier
/// of 2*pi*i). Evaluated lazily so large lattices never store a second array.
struct PhaseField {
    LatticeSpec spec;
    std::function<double(std::span<const double>)> phase;
};

struct StateVector {
    LatticeSpec spec;
    std::vector<Complex> amps;

    int axes() const { return lattice_axes(spec); }
    std::int64_t axis_len() const { return lattice_axis_len(spec); }
    double norm() const;
};

struct MeasurementOutcome {
    std::vector<std::int64_t> labels;
    std::vector<double> values;
};

/// amp(x) = e^(2*pi*i*phase(x)) / sqrt(size). Throws ResourceError when the
/// lattice exceeds the amplitude cap.
StateVector build_state(const PhaseField& field, std::int64_t amplitude_cap = default_amplitude_cap());

/// Per-axis inverse QFT of the dyadic lattice: the inverse of
/// |x> -> 2^(-n/2) sum_k e^(2*pi*i*2^n*x*k) |k>, realized as a power-of-two
/// DFT conjugated with diagonal phase corrections. Dyadic lattices only.
StateVector inverse_qft_axiswise(const StateVector& state);
StateVector forward_qft_axiswise(const StateVector& state);

/// In-place 1-D transforms used by the axiswise versions; buf.size() = 2^n.
void inverse_qft_gn_1d(std::span<Complex> buf);
void forward_qft_gn_1d(std::span<Complex> buf);

/// Born-rule sample of a joint label; deterministic given the rng state.
MeasurementOutcome sample_outcome(const StateVector& state, Rng& rng);

/// Inverse length-q unitary DFT with kernel matching e^(2*pi*i*k*b/q) on
/// symmetric residues; a pure mode of frequency b concentrates on label b.
std::vector<Complex> zq_transform_axis(std::span<const Complex> phases, std::int64_t q);

/// Per-axis inverse modular DFT of a full q^d state. Modular lattices only.
StateVector inverse_zq_axiswise(const StateVector& state);

struct JordanSample {
    std::vector<std::int64_t> median_labels;
    std::vector<MeasurementOutcome> outcomes;
};

/// build_state -> inverse QFT -> T Born samples; the per-axis median of the
/// decoded values (lower middle for even T) is the returned label. The
/// transformed state is prepared once; each repetition still counts as one
/// superposition oracle application in the ledger.
JordanSample jordan_sample(const PhaseField& field, int repetitions, Rng& rng,
                           QueryLedger* ledger = nullptr,
                           std::int64_t amplitude_cap = default_amplitude_cap());

} // namespace qgrad
