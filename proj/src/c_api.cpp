#include "chemsical/chemsical.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "chemsical/builder.hpp"
#include "chemsical/channel.hpp"
#include "chemsical/crn_lang.hpp"
#include "chemsical/eval.hpp"
#include "chemsical/ode.hpp"
#include "chemsical/ssa.hpp"

struct cs_document {
    chemsical::NetworkDocument doc;
};

struct cs_trajectory {
    std::variant<chemsical::Trajectory, chemsical::DiscreteTrajectory> data;
    std::vector<std::string> names;
};

namespace {

using namespace chemsical;

thread_local std::string last_error;

cs_status fail(cs_status code, const std::string& msg) {
    last_error = msg;
    return code;
}

// Runs fn and maps exceptions to status codes.
template <typename Fn>
cs_status guarded(Fn&& fn) {
    try {
        fn();
        return CS_OK;
    } catch (const ParseError& e) {
        return fail(CS_ERR_PARSE, e.what());
    } catch (const IntegrationError& e) {
        return fail(CS_ERR_INTEGRATION, e.what());
    } catch (const ContractViolation& e) {
        return fail(CS_ERR_CONTRACT, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(CS_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(CS_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(CS_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(CS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CS_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void* p, const char* what) {
    if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

ChemSICalParams to_params(const cs_chemsical_params& c) {
    ChemSICalParams p;
    p.thresholds = {c.tau1, c.tau2_0, c.tau2_1};
    std::array<double, 7> k{};
    std::copy(std::begin(c.kappa), std::end(c.kappa), k.begin());
    p.rrc = RrcSet::from_values(k);
    p.stage2_pool = c.stage2_pool;
    p.input_count = c.input_count;
    p.n_max = c.n_max;
    if (c.adaptation != CS_ADAPT_CATALYTIC && c.adaptation != CS_ADAPT_CONSUMING)
        throw std::invalid_argument("unknown adaptation strategy");
    if (c.translation != CS_TRANSLATE_COPY && c.translation != CS_TRANSLATE_TRANSFER)
        throw std::invalid_argument("unknown translation strategy");
    p.adaptation = c.adaptation == CS_ADAPT_CATALYTIC ? AdaptationStrategy::catalytic : AdaptationStrategy::consuming;
    p.translation = c.translation == CS_TRANSLATE_COPY ? TranslationStrategy::copy : TranslationStrategy::transfer;
    return p;
}

ChannelParams to_channel(const cs_channel_params& c) {
    ChannelParams p;
    p.d1 = c.d1;
    p.d2 = c.d2;
    p.radius = c.radius;
    p.diffusion = c.diffusion;
    p.n_tx = c.n_tx;
    return p;
}

OdeOptions to_ode(const cs_ode_options& o) {
    OdeOptions r;
    r.t_end = o.t_end;
    r.sample_count = o.sample_count;
    r.rel_tol = o.rel_tol;
    r.abs_tol = o.abs_tol;
    r.steady_state_epsilon = o.steady_state_epsilon;
    return r;
}

SsaOptions to_ssa(const cs_ssa_options& o) {
    SsaOptions r;
    r.t_end = o.t_end;
    switch (o.record_mode) {
        case CS_RECORD_FINAL: r.record = RecordMode::final_state; break;
        case CS_RECORD_GRID: r.record = RecordMode::sampled_grid; break;
        case CS_RECORD_EVENTS: r.record = RecordMode::event_log; break;
        default: throw std::invalid_argument("unknown record mode");
    }
    r.sample_count = o.sample_count;
    r.max_events = o.max_events;
    r.aggregate_pools = o.aggregate_pools != 0;
    return r;
}

ScenarioSignal scenario_of(const cs_scenario& s) {
    return scenario_signal(to_channel(s.channel), s.channel.t_sample);
}

CsvHeader header_of(const cs_scenario& s) {
    return {s.provenance ? s.provenance : "", s.timestamp != 0};
}

EvalSettings settings_of(const cs_scenario& s) {
    EvalSettings e;
    e.signal = scenario_of(s);
    e.n_max = s.chem.n_max;
    e.stride = s.stride;
    e.n_traj = s.n_traj;
    e.base_seed = s.base_seed;
    e.ssa.t_end = s.t_end;
    e.workers = s.workers;
    return e;
}

template <typename Amount>
std::vector<std::string> names_of(const BasicTrajectory<Amount>& t) {
    std::vector<std::string> out;
    for (const auto& s : t.species) out.push_back(s.name());
    return out;
}

}  // namespace

extern "C" {

const char* cs_last_error(void) { return last_error.c_str(); }

void cs_string_free(char* s) { delete[] s; }

const char* cs_version(void) { return "1.0.0"; }

cs_status cs_document_parse(const char* text, cs_document** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new cs_document{parse_network(text)};
    });
}

cs_status cs_document_read_file(const char* path, cs_document** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        std::ifstream in(path);
        if (!in) {
            last_error = std::string("cannot open '") + path + "'";
            throw std::ios_base::failure(last_error);
        }
        *out = new cs_document{read_network_file(path)};
    });
}

void cs_document_free(cs_document* doc) { delete doc; }

cs_status cs_document_serialize(const cs_document* doc, char** out) {
    return guarded([&] {
        require(doc, "document");
        require(out, "out");
        *out = dup_string(serialize_network(doc->doc));
    });
}

cs_status cs_document_check(const cs_document* doc, int* valid, char** report) {
    return guarded([&] {
        require(doc, "document");
        require(valid, "valid");
        require(report, "report");
        const auto& net = doc->doc.network;
        std::ostringstream os;
        const auto violations = validate_network(net);
        os << "species: " << net.species().size() << "\nreactions: " << net.reactions().size() << "\n";
        if (violations.empty()) {
            os << "valid: yes\n";
        } else {
            os << "valid: no\n";
            for (const auto& v : violations) {
                if (v.reaction) os << "  reaction " << *v.reaction + 1 << ": ";
                else os << "  network: ";
                os << v.message << "\n";
            }
        }
        *valid = violations.empty() ? 1 : 0;
        if (violations.empty()) {
            const auto laws = conservation_laws(net);
            os << "conservation laws: " << laws.size() << "\n";
            for (const auto& w : laws) {
                os << "  ";
                bool first = true;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (w[i] == 0) continue;
                    const auto mag = w[i] < 0 ? -w[i] : w[i];
                    if (!first) os << (w[i] < 0 ? " - " : " + ");
                    else if (w[i] < 0) os << "-";
                    if (mag != 1) os << mag << " ";
                    os << net.species()[i].name();
                    first = false;
                }
                std::int64_t total = 0;
                bool known = true;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (w[i] == 0) continue;
                    if (!doc->doc.initial.contains(net.species()[i])) known = false;
                    else total += w[i] * static_cast<std::int64_t>(doc->doc.initial.amount(net.species()[i]));
                }
                if (known) os << " = " << total;
                os << "\n";
            }
        }
        *report = dup_string(os.str());
    });
}

cs_status cs_document_set_initial(cs_document* doc, const char* species, uint64_t amount) {
    return guarded([&] {
        require(doc, "document");
        require(species, "species");
        const SpeciesId id{species};
        if (!doc->doc.network.index_of(id))
            throw std::invalid_argument(std::string("unknown species '") + species + "'");
        doc->doc.initial.set(id, amount);
    });
}

void cs_chemsical_params_default(cs_chemsical_params* p) {
    if (!p) return;
    const ChemSICalParams d;
    p->tau1 = d.thresholds.tau1;
    p->tau2_0 = d.thresholds.tau2_0;
    p->tau2_1 = d.thresholds.tau2_1;
    const auto k = d.rrc.values();
    std::copy(k.begin(), k.end(), p->kappa);
    p->stage2_pool = d.stage2_pool;
    p->input_count = d.input_count;
    p->n_max = d.n_max;
    p->adaptation = CS_ADAPT_CATALYTIC;
    p->translation = d.translation == TranslationStrategy::copy ? CS_TRANSLATE_COPY : CS_TRANSLATE_TRANSFER;
}

cs_status cs_rrc_preset(int index, double kappa[7]) {
    return guarded([&] {
        require(kappa, "kappa");
        const auto k = RrcSet::preset(index).values();
        std::copy(k.begin(), k.end(), kappa);
    });
}

cs_status cs_chemsical_build(const cs_chemsical_params* p, cs_document** out) {
    return guarded([&] {
        require(p, "params");
        require(out, "out");
        *out = new cs_document{build_chemsical(to_params(*p))};
    });
}

void cs_ode_options_default(cs_ode_options* o) {
    if (!o) return;
    const OdeOptions d;
    *o = {d.t_end, d.sample_count, d.rel_tol, d.abs_tol, d.steady_state_epsilon};
}

void cs_ssa_options_default(cs_ssa_options* o) {
    if (!o) return;
    const SsaOptions d;
    *o = {d.t_end, CS_RECORD_FINAL, d.sample_count, d.max_events, d.aggregate_pools ? 1 : 0};
}

cs_status cs_simulate_ode(const cs_document* doc, const cs_ode_options* o, cs_trajectory** out) {
    return guarded([&] {
        require(doc, "document");
        require(o, "options");
        require(out, "out");
        auto traj = simulate_ode(doc->doc.network, to_continuous(doc->doc.initial), to_ode(*o));
        auto names = names_of(traj);
        *out = new cs_trajectory{std::move(traj), std::move(names)};
    });
}

cs_status cs_simulate_ssa(const cs_document* doc, const cs_ssa_options* o, uint64_t base_seed,
                          uint64_t stream_index, cs_trajectory** out) {
    return guarded([&] {
        require(doc, "document");
        require(o, "options");
        require(out, "out");
        auto traj = simulate_ssa(doc->doc.network, doc->doc.initial, RandomSeed{base_seed, stream_index}, to_ssa(*o));
        auto names = names_of(traj);
        *out = new cs_trajectory{std::move(traj), std::move(names)};
    });
}

void cs_trajectory_free(cs_trajectory* traj) { delete traj; }

size_t cs_trajectory_rows(const cs_trajectory* traj) {
    if (!traj) return 0;
    return std::visit([](const auto& t) { return t.size(); }, traj->data);
}

size_t cs_trajectory_species_count(const cs_trajectory* traj) { return traj ? traj->names.size() : 0; }

const char* cs_trajectory_species_name(const cs_trajectory* traj, size_t i) {
    if (!traj || i >= traj->names.size()) return nullptr;
    return traj->names[i].c_str();
}

cs_status cs_trajectory_value(const cs_trajectory* traj, size_t row, size_t col, double* out) {
    return guarded([&] {
        require(traj, "trajectory");
        require(out, "out");
        std::visit(
            [&](const auto& t) {
                if (row >= t.states.size() || col >= t.species.size())
                    throw std::invalid_argument("trajectory index out of range");
                *out = static_cast<double>(t.states[row][col]);
            },
            traj->data);
    });
}

cs_status cs_trajectory_time(const cs_trajectory* traj, size_t row, double* out) {
    return guarded([&] {
        require(traj, "trajectory");
        require(out, "out");
        std::visit(
            [&](const auto& t) {
                if (row >= t.times.size()) throw std::invalid_argument("trajectory index out of range");
                *out = t.times[row];
            },
            traj->data);
    });
}

const char* cs_trajectory_stop_reason(const cs_trajectory* traj) {
    if (!traj) return nullptr;
    const auto reason = std::visit([](const auto& t) { return t.reason; }, traj->data);
    switch (reason) {
        case StopReason::t_end: return "t_end";
        case StopReason::steady_state: return "steady_state";
        case StopReason::absorbing: return "absorbing";
        case StopReason::max_events: return "max_events";
    }
    return "unknown";
}

cs_status cs_trajectory_csv(const cs_trajectory* traj, char** out) {
    return guarded([&] {
        require(traj, "trajectory");
        require(out, "out");
        std::ostringstream os;
        std::visit([&](const auto& t) { write_trajectory_csv(os, t); }, traj->data);
        *out = dup_string(os.str());
    });
}

cs_status cs_trajectory_decision(const cs_trajectory* traj, int* s1, int* s2) {
    return guarded([&] {
        require(traj, "trajectory");
        require(s1, "s1");
        require(s2, "s2");
        const auto d = std::visit(
            [](const auto& t) {
                std::vector<double> row(t.final_row().begin(), t.final_row().end());
                return read_decision(t.species, row);
            },
            traj->data);
        *s1 = d.s1;
        *s2 = d.s2;
    });
}

cs_status cs_ensemble_json(const cs_document* doc, size_t n_traj, uint64_t base_seed, const cs_ssa_options* o,
                           unsigned workers, char** out) {
    return guarded([&] {
        require(doc, "document");
        require(o, "options");
        require(out, "out");
        const auto& net = doc->doc.network;
        Readout readout;
        // receiver networks are tallied by decision label
        if (net.index_of(species::D1_1) && net.index_of(species::D1_0) && net.index_of(species::D2_1) &&
            net.index_of(species::D2_0))
            readout = [](const DiscreteState& s) { return read_decision(s).label(); };
        const auto summary = run_ensemble(net, doc->doc.initial, n_traj, base_seed, to_ssa(*o), readout, workers);
        *out = dup_string(summary_to_json(summary));
    });
}

void cs_channel_params_default(cs_channel_params* c) {
    if (!c) return;
    const ChannelParams d;
    *c = {d.d1, d.d2, d.radius, d.diffusion, d.n_tx, 0.0};
}

cs_status cs_channel_signal(const cs_channel_params* c, double* t_p, double* lambda1, double* lambda2) {
    return guarded([&] {
        require(c, "channel");
        const auto sig = scenario_signal(to_channel(*c), c->t_sample);
        if (t_p) *t_p = sig.t_p;
        if (lambda1) *lambda1 = sig.lambda1;
        if (lambda2) *lambda2 = sig.lambda2;
    });
}

void cs_scenario_default(cs_scenario* s) {
    if (!s) return;
    cs_channel_params_default(&s->channel);
    cs_chemsical_params_default(&s->chem);
    s->stride = 2;
    s->n_traj = 200;
    s->base_seed = 1;
    s->t_end = 40.0;
    s->workers = 1;
    s->timestamp = 1;
    s->provenance = nullptr;
}

cs_status cs_pmf_csv(const cs_scenario* s, char** csv) {
    return guarded([&] {
        require(s, "scenario");
        require(csv, "csv");
        const auto pmf = input_pmf(scenario_of(*s), s->chem.n_max);
        std::ostringstream os;
        write_pmf_csv(os, pmf, header_of(*s));
        *csv = dup_string(os.str());
    });
}

cs_status cs_curve_csv(const cs_scenario* s, char** csv, double* p_e, size_t* truncated) {
    return guarded([&] {
        require(s, "scenario");
        require(csv, "csv");
        const auto e = settings_of(*s);
        auto params = to_params(s->chem);
        params.validate();
        const auto curve = detection_probability_curve(params, input_grid(e.n_max, e.stride), e.n_traj,
                                                       e.base_seed, e.ssa, e.workers);
        std::ostringstream os;
        write_pd_csv(os, curve, header_of(*s));
        if (p_e) *p_e = weighted_error_probability(curve, input_pmf(e.signal, e.n_max)).p_e;
        if (truncated) {
            *truncated = 0;
            for (auto c : curve.truncated) *truncated += c;
        }
        *csv = dup_string(os.str());
    });
}

cs_status cs_profile_csv(const cs_scenario* s, char** csv, double* weighted_error) {
    return guarded([&] {
        require(s, "scenario");
        require(csv, "csv");
        const auto e = settings_of(*s);
        const auto params = to_params(s->chem);
        OdeOptions o;
        o.t_end = s->t_end;
        o.sample_count = 2;
        std::vector<std::uint64_t> inputs(e.n_max);
        for (std::uint64_t n = 0; n < e.n_max; ++n) inputs[n] = n;
        const auto prof = ode_error_profile(params, inputs, input_pmf(e.signal, e.n_max), o, e.workers);
        std::ostringstream os;
        write_profile_csv(os, prof, header_of(*s));
        if (weighted_error) *weighted_error = prof.weighted_error;
        *csv = dup_string(os.str());
    });
}

cs_status cs_sweep_csv(const cs_scenario* s, int axis, const char* parameter, const double* values,
                       size_t n_values, char** csv) {
    return guarded([&] {
        require(s, "scenario");
        require(csv, "csv");
        SweepSpec spec;
        switch (axis) {
            case CS_SWEEP_THRESHOLDS: spec.axis = SweepAxis::threshold_pairs; break;
            case CS_SWEEP_KAPPA_AM2: spec.axis = SweepAxis::kappa_am2; break;
            case CS_SWEEP_PARAMETER: spec.axis = SweepAxis::parameter; break;
            default: throw std::invalid_argument("unknown sweep axis");
        }
        if (parameter) spec.parameter = parameter;
        if (values) spec.values.assign(values, values + n_values);
        const auto points = sensitivity_sweep(spec, to_params(s->chem), settings_of(*s));
        std::ostringstream os;
        write_sweep_csv(os, points, header_of(*s));
        *csv = dup_string(os.str());
    });
}

cs_status cs_ideal_error(const cs_scenario* s, double* out) {
    return guarded([&] {
        require(s, "scenario");
        require(out, "out");
        const auto params = to_params(s->chem);
        params.thresholds.validate();
        *out = ideal_error_probability(scenario_of(*s), params.thresholds);
    });
}

}  // extern "C"
