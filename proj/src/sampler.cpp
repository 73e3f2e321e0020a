#include "qgrad/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "qgrad/errors.hpp"

namespace qgrad {
namespace {

void unitary_fft_pow2(std::span<Complex> buf, int sign) {
    const std::size_t n = buf.size();
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[i], buf[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * M_PI / static_cast<double>(len);
        const Complex wlen = std::polar(1.0, angle);
        for (std::size_t i = 0; i < n; i += len) {
            Complex w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = buf[i + k];
                const Complex v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Complex& c : buf) c *= scale;
}

/// The dyadic-lattice QFT kernel exp(sign*2*pi*i*2^n*v(p)v(r)) factors as
/// diagonal phases around a plain DFT:
///   2^n v(p) v(r) = pr/L - (p+r)mu/(2L) + mu^2/(4L),  mu = L-1,
/// with p, r the axis offsets. `sign=-1` gives the inverse transform.
void qft_gn_1d(std::span<Complex> buf, int sign) {
    const std::size_t L = buf.size();
    if (L < 2 || (L & (L - 1)) != 0)
        throw ParameterError("dyadic QFT needs a power-of-two axis length");
    const double mu = static_cast<double>(L - 1);
    const double half = sign * 2.0 * M_PI * mu / (2.0 * static_cast<double>(L));
    for (std::size_t r = 0; r < L; ++r) buf[r] *= std::polar(1.0, -half * static_cast<double>(r));
    unitary_fft_pow2(buf, sign);
    const Complex global = std::polar(1.0, sign * 2.0 * M_PI * mu * mu / (4.0 * static_cast<double>(L)));
    for (std::size_t p = 0; p < L; ++p)
        buf[p] *= global * std::polar(1.0, -half * static_cast<double>(p));
}

void apply_axiswise(StateVector& state, void (*transform)(std::span<Complex>)) {
    const std::int64_t L = state.axis_len();
    const int d = state.axes();
    const std::int64_t total = static_cast<std::int64_t>(state.amps.size());
    std::vector<Complex> scratch(static_cast<std::size_t>(L));
    // axis `ax` has stride L^(d-1-ax) in the row-major layout
    std::int64_t stride = 1;
    for (int ax = d - 1; ax >= 0; --ax) {
        const std::int64_t block = stride * L;
        for (std::int64_t base = 0; base < total; base += block) {
            for (std::int64_t off = 0; off < stride; ++off) {
                Complex* first = state.amps.data() + base + off;
                if (stride == 1) {
                    transform(std::span<Complex>(first, static_cast<std::size_t>(L)));
                } else {
                    for (std::int64_t i = 0; i < L; ++i) scratch[static_cast<std::size_t>(i)] = first[i * stride];
                    transform(std::span<Complex>(scratch));
                    for (std::int64_t i = 0; i < L; ++i) first[i * stride] = scratch[static_cast<std::size_t>(i)];
                }
            }
        }
        stride = block;
    }
}

} // namespace

int lattice_axes(const LatticeSpec& spec) {
    return std::visit([](const auto& s) { return s.d; }, spec);
}

std::int64_t lattice_axis_len(const LatticeSpec& spec) {
    if (const auto* g = std::get_if<GridSpec>(&spec)) return g->labels_per_axis();
    return std::get<SqSpec>(spec).q;
}

std::int64_t lattice_size(const LatticeSpec& spec) {
    const std::int64_t per_axis = lattice_axis_len(spec);
    std::int64_t total = 1;
    for (int i = 0; i < lattice_axes(spec); ++i) {
        if (total > (std::int64_t{1} << 62) / per_axis)
            throw ResourceError("lattice size overflows 63 bits");
        total *= per_axis;
    }
    return total;
}

std::int64_t lattice_min_label(const LatticeSpec& spec) {
    if (const auto* g = std::get_if<GridSpec>(&spec)) return g->min_label();
    return -std::get<SqSpec>(spec).half();
}

double lattice_axis_value(const LatticeSpec& spec, std::int64_t label) {
    if (const auto* g = std::get_if<GridSpec>(&spec)) return label_to_value(*g, label);
    return sq_value(std::get<SqSpec>(spec), label);
}

std::int64_t default_amplitude_cap() {
    static const std::int64_t cap = [] {
        if (const char* env = std::getenv("QGRAD_AMPLITUDE_CAP")) {
            const std::int64_t v = std::atoll(env);
            if (v > 0) return v;
        }
        return std::int64_t{1} << 24;
    }();
    return cap;
}

double StateVector::norm() const {
    double acc = 0.0;
    for (const Complex& c : amps) acc += std::norm(c);
    return std::sqrt(acc);
}

StateVector build_state(const PhaseField& field, std::int64_t amplitude_cap) {
    const std::int64_t total = lattice_size(field.spec);
    if (total > amplitude_cap)
        throw ResourceError("lattice of " + std::to_string(total) +
                            " amplitudes exceeds the cap of " + std::to_string(amplitude_cap) +
                            "; shrink n or d, or raise QGRAD_AMPLITUDE_CAP");
    const int d = lattice_axes(field.spec);
    const std::int64_t L = lattice_axis_len(field.spec);
    const std::int64_t lo = lattice_min_label(field.spec);

    StateVector state{field.spec, {}};
    state.amps.resize(static_cast<std::size_t>(total));
    const double scale = 1.0 / std::sqrt(static_cast<double>(total));

    std::vector<std::int64_t> labels(static_cast<std::size_t>(d), lo);
    std::vector<double> values(static_cast<std::size_t>(d));
    std::vector<double> axis_values(static_cast<std::size_t>(L));
    for (std::int64_t k = 0; k < L; ++k)
        axis_values[static_cast<std::size_t>(k)] = lattice_axis_value(field.spec, lo + k);
    for (int i = 0; i < d; ++i) values[static_cast<std::size_t>(i)] = axis_values[0];

    for (std::int64_t flat = 0; flat < total; ++flat) {
        const double ph = field.phase(values);
        if (!std::isfinite(ph)) throw ParameterError("phase field produced a non-finite value");
        state.amps[static_cast<std::size_t>(flat)] =
            std::polar(scale, 2.0 * M_PI * ph);
        // odometer over labels, last axis fastest
        for (int ax = d - 1; ax >= 0; --ax) {
            auto& lab = labels[static_cast<std::size_t>(ax)];
            if (++lab <= lo + L - 1) {
                values[static_cast<std::size_t>(ax)] = axis_values[static_cast<std::size_t>(lab - lo)];
                break;
            }
            lab = lo;
            values[static_cast<std::size_t>(ax)] = axis_values[0];
        }
    }
    return state;
}

void inverse_qft_gn_1d(std::span<Complex> buf) { qft_gn_1d(buf, -1); }
void forward_qft_gn_1d(std::span<Complex> buf) { qft_gn_1d(buf, +1); }

StateVector inverse_qft_axiswise(const StateVector& state) {
    if (!std::holds_alternative<GridSpec>(state.spec))
        throw ParameterError("axiswise QFT applies to dyadic lattices; modular lattices use zq_transform_axis");
    StateVector out = state;
    apply_axiswise(out, &inverse_qft_gn_1d);
    return out;
}

StateVector forward_qft_axiswise(const StateVector& state) {
    if (!std::holds_alternative<GridSpec>(state.spec))
        throw ParameterError("axiswise QFT applies to dyadic lattices; modular lattices use zq_transform_axis");
    StateVector out = state;
    apply_axiswise(out, &forward_qft_gn_1d);
    return out;
}

MeasurementOutcome sample_outcome(const StateVector& state, Rng& rng) {
    const std::size_t total = state.amps.size();
    double mass = 0.0;
    for (const Complex& c : state.amps) mass += std::norm(c);
    if (!(mass > 0.0)) throw ParameterError("cannot sample a zero state");
    const double u = rng.uniform() * mass;
    double acc = 0.0;
    std::size_t chosen = total - 1;
    for (std::size_t i = 0; i < total; ++i) {
        acc += std::norm(state.amps[i]);
        if (u < acc) { chosen = i; break; }
    }
    const int d = state.axes();
    const std::int64_t L = state.axis_len();
    const std::int64_t lo = lattice_min_label(state.spec);
    MeasurementOutcome out;
    out.labels.resize(static_cast<std::size_t>(d));
    out.values.resize(static_cast<std::size_t>(d));
    std::int64_t rest = static_cast<std::int64_t>(chosen);
    for (int ax = d - 1; ax >= 0; --ax) {
        out.labels[static_cast<std::size_t>(ax)] = lo + rest % L;
        rest /= L;
        out.values[static_cast<std::size_t>(ax)] =
            lattice_axis_value(state.spec, out.labels[static_cast<std::size_t>(ax)]);
    }
    return out;
}

std::vector<Complex> zq_transform_axis(std::span<const Complex> phases, std::int64_t q) {
    if (static_cast<std::int64_t>(phases.size()) != q)
        throw ParameterError("zq transform input length must equal q");
    if (q <= 2 || !is_prime(q)) throw ParameterError("zq transform needs an odd prime q");
    const std::int64_t h = (q - 1) / 2;
    std::vector<Complex> out(static_cast<std::size_t>(q));
    const double scale = 1.0 / std::sqrt(static_cast<double>(q));
    for (std::int64_t b = -h; b <= h; ++b) {
        Complex acc{0.0, 0.0};
        for (std::int64_t k = -h; k <= h; ++k) {
            const std::int64_t phase_mod = ((k * b) % q + q) % q;
            acc += phases[static_cast<std::size_t>(k + h)] *
                   std::polar(1.0, -2.0 * M_PI * static_cast<double>(phase_mod) / static_cast<double>(q));
        }
        out[static_cast<std::size_t>(b + h)] = scale * acc;
    }
    return out;
}

StateVector inverse_zq_axiswise(const StateVector& state) {
    const auto* sq = std::get_if<SqSpec>(&state.spec);
    if (!sq) throw ParameterError("modular axiswise transform applies to modular lattices only");
    const std::int64_t q = sq->q;
    const int d = sq->d;
    const std::int64_t total = static_cast<std::int64_t>(state.amps.size());
    StateVector out = state;
    std::vector<Complex> gather(static_cast<std::size_t>(q));
    std::int64_t stride = 1;
    for (int ax = d - 1; ax >= 0; --ax) {
        const std::int64_t block = stride * q;
        for (std::int64_t base = 0; base < total; base += block) {
            for (std::int64_t off = 0; off < stride; ++off) {
                Complex* first = out.amps.data() + base + off;
                for (std::int64_t i = 0; i < q; ++i) gather[static_cast<std::size_t>(i)] = first[i * stride];
                const auto transformed = zq_transform_axis(gather, q);
                for (std::int64_t i = 0; i < q; ++i) first[i * stride] = transformed[static_cast<std::size_t>(i)];
            }
        }
        stride = block;
    }
    return out;
}

JordanSample jordan_sample(const PhaseField& field, int repetitions, Rng& rng,
                           QueryLedger* ledger, std::int64_t amplitude_cap) {
    if (repetitions < 1) throw ParameterError("repetition count must be >= 1");
    const StateVector transformed = inverse_qft_axiswise(build_state(field, amplitude_cap));
    JordanSample result;
    result.outcomes.reserve(static_cast<std::size_t>(repetitions));
    for (int t = 0; t < repetitions; ++t) {
        result.outcomes.push_back(sample_outcome(transformed, rng));
        if (ledger) ledger->add_simulated_calls(1);
    }
    const int d = transformed.axes();
    result.median_labels.resize(static_cast<std::size_t>(d));
    std::vector<std::int64_t> column(static_cast<std::size_t>(repetitions));
    for (int ax = 0; ax < d; ++ax) {
        for (int t = 0; t < repetitions; ++t)
            column[static_cast<std::size_t>(t)] = result.outcomes[static_cast<std::size_t>(t)]
                                                      .labels[static_cast<std::size_t>(ax)];
        std::sort(column.begin(), column.end());
        // lower middle for even counts; axis values are monotone in the label
        result.median_labels[static_cast<std::size_t>(ax)] =
            column[static_cast<std::size_t>((repetitions - 1) / 2)];
    }
    return result;
}

} // namespace qgrad
