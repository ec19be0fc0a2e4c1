#include "chemsical/crn_lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace chemsical {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

std::string format_real(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

namespace {

enum class Tok { ident, number, plus, arrow, at, end };

struct Token {
    Tok kind;
    std::string_view text;
    std::size_t column;  // 1-based
};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<Token> lex(std::string_view line, std::size_t lineno) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == ' ' || c == '\t') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (c == '+') {
            out.push_back({Tok::plus, line.substr(i, 1), i + 1});
            ++i;
        } else if (c == '@') {
            out.push_back({Tok::at, line.substr(i, 1), i + 1});
            ++i;
        } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            out.push_back({Tok::arrow, line.substr(i, 2), i + 1});
            i += 2;
        } else if (is_alpha(c)) {
            while (i < line.size() && (is_alpha(line[i]) || is_digit(line[i]) || line[i] == '_')) ++i;
            out.push_back({Tok::ident, line.substr(start, i - start), start + 1});
        } else if (is_digit(c) || c == '.') {
            while (i < line.size() && (is_digit(line[i]) || line[i] == '.')) ++i;
            if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < line.size() && (line[j] == '+' || line[j] == '-')) ++j;
                if (j < line.size() && is_digit(line[j])) {
                    i = j;
                    while (i < line.size() && is_digit(line[i])) ++i;
                }
            }
            if (i < line.size() && (is_alpha(line[i]) || line[i] == '_'))
                throw ParseError(lineno, i + 1, "unexpected character after number");
            out.push_back({Tok::number, line.substr(start, i - start), start + 1});
        } else {
            throw ParseError(lineno, i + 1, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::end, {}, line.size() + 1});
    return out;
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), is_digit)) return std::nullopt;
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool reserved(std::string_view word) { return word == "meta" || word == "init"; }

class Parser {
public:
    NetworkDocument run(std::string_view text) {
        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            parse_line(line, lineno);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }

        for (const auto& [sp, where] : init_positions_) {
            if (!in_reaction_.count(sp))
                throw ParseError(where.first, where.second,
                                 "init for species '" + sp + "' that appears in no reaction");
        }

        NetworkDocument doc;
        std::vector<SpeciesId> species;
        for (const auto& name : species_order_) {
            species.emplace_back(name);
            auto it = init_.find(name);
            doc.initial.set(species.back(), it == init_.end() ? 0 : it->second);
        }
        doc.network = ReactionNetwork(std::move(species), std::move(reactions_), std::move(labels_));
        doc.metadata = std::move(metadata_);
        return doc;
    }

private:
    void mention(std::string_view name) {
        std::string s(name);
        if (known_.insert(s).second) species_order_.push_back(std::move(s));
    }

    void parse_line(std::string_view raw, std::size_t lineno) {
        std::string_view content = raw;
        std::string_view comment;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) {
            content = raw.substr(0, hash);
            comment = trim(raw.substr(hash + 1));
        }
        if (trim(content).empty()) return;

        const auto first = content.find_first_not_of(" \t");
        auto word_end = content.find_first_of(" \t", first);
        std::string_view word = content.substr(first, word_end == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : word_end - first);
        if (word == "meta") return parse_meta(content, first, word_end, lineno);

        auto toks = lex(content, lineno);
        if (toks[0].kind == Tok::ident && toks[0].text == "init") return parse_init(toks, lineno);
        parse_reaction(toks, comment, lineno);
    }

    void parse_meta(std::string_view content, std::size_t first, std::size_t word_end,
                    std::size_t lineno) {
        if (word_end == std::string_view::npos)
            throw ParseError(lineno, content.size() + 1, "expected key after 'meta'");
        auto key_start = content.find_first_not_of(" \t", word_end);
        if (key_start == std::string_view::npos)
            throw ParseError(lineno, content.size() + 1, "expected key after 'meta'");
        auto key_end = content.find_first_of(" \t", key_start);
        std::string key(content.substr(key_start, key_end == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : key_end - key_start));
        std::string value = key_end == std::string_view::npos
                                ? std::string()
                                : std::string(trim(content.substr(key_end)));
        if (!metadata_.emplace(key, std::move(value)).second)
            throw ParseError(lineno, key_start + 1, "duplicate meta key '" + key + "'");
        (void)first;
    }

    void parse_init(const std::vector<Token>& toks, std::size_t lineno) {
        if (toks[1].kind != Tok::ident)
            throw ParseError(lineno, toks[1].column, "expected species name after 'init'");
        if (reserved(toks[1].text))
            throw ParseError(lineno, toks[1].column, "reserved word used as species name");
        if (toks[2].kind != Tok::number)
            throw ParseError(lineno, toks[2].column, "expected non-negative integer count");
        auto count = parse_count(toks[2].text);
        if (!count) throw ParseError(lineno, toks[2].column, "count must be a non-negative integer");
        if (toks[3].kind != Tok::end)
            throw ParseError(lineno, toks[3].column, "unexpected token after init count");
        std::string name(toks[1].text);
        if (init_.count(name))
            throw ParseError(lineno, toks[1].column, "duplicate init for species '" + name + "'");
        mention(name);
        init_[name] = *count;
        init_positions_[name] = {lineno, toks[1].column};
    }

    std::vector<SpeciesId> parse_complex(const std::vector<Token>& toks, std::size_t& i,
                                         Tok terminator, std::size_t lineno) {
        std::vector<SpeciesId> out;
        if (toks[i].kind == Tok::number && toks[i].text == "0" &&
            (toks[i + 1].kind == terminator)) {
            ++i;
            return out;
        }
        for (;;) {
            std::uint64_t coeff = 1;
            if (toks[i].kind == Tok::number) {
                auto c = parse_count(toks[i].text);
                if (!c || *c == 0)
                    throw ParseError(lineno, toks[i].column, "coefficient must be a positive integer");
                coeff = *c;
                ++i;
            }
            if (toks[i].kind != Tok::ident) {
                std::string msg = out.empty() && coeff == 1 ? "expected species or '0'"
                                                            : "expected species";
                if (i > 0 && toks[i - 1].kind == Tok::plus) msg = "expected species after '+'";
                throw ParseError(lineno, toks[i].column, msg);
            }
            if (reserved(toks[i].text))
                throw ParseError(lineno, toks[i].column, "reserved word used as species name");
            mention(toks[i].text);
            SpeciesId id{std::string(toks[i].text)};
            for (std::uint64_t k = 0; k < coeff; ++k) out.push_back(id);
            ++i;
            if (toks[i].kind == Tok::plus) {
                ++i;
                continue;
            }
            return out;
        }
    }

    void parse_reaction(const std::vector<Token>& toks, std::string_view comment,
                        std::size_t lineno) {
        std::size_t i = 0;
        Reaction rx;
        rx.reactants = parse_complex(toks, i, Tok::arrow, lineno);
        if (toks[i].kind != Tok::arrow) throw ParseError(lineno, toks[i].column, "expected '->'");
        ++i;
        rx.products = parse_complex(toks, i, Tok::at, lineno);
        if (toks[i].kind != Tok::at) throw ParseError(lineno, toks[i].column, "expected '@'");
        ++i;
        if (toks[i].kind != Tok::number)
            throw ParseError(lineno, toks[i].column, "expected rate constant after '@'");
        double k = 0;
        const auto& t = toks[i].text;
        auto res = std::from_chars(t.data(), t.data() + t.size(), k);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(k) || k <= 0)
            throw ParseError(lineno, toks[i].column, "rate constant must be a positive decimal");
        rx.rate_constant = k;
        ++i;
        if (toks[i].kind != Tok::end)
            throw ParseError(lineno, toks[i].column, "unexpected token after rate constant");
        if (rx.reactants.empty())
            throw ParseError(lineno, toks[0].column, "reactant side must not be empty");

        for (const auto* side : {&rx.reactants, &rx.products})
            for (const auto& s : *side) in_reaction_.insert(s.name());

        if (comment.substr(0, 6) == "block ") {
            auto label = trim(comment.substr(6));
            if (!label.empty()) labels_[reactions_.size()] = std::string(label);
        }
        reactions_.push_back(std::move(rx));
    }

    std::vector<std::string> species_order_;
    std::set<std::string> known_;
    std::set<std::string> in_reaction_;
    std::map<std::string, std::uint64_t> init_;
    std::map<std::string, std::pair<std::size_t, std::size_t>> init_positions_;
    std::vector<Reaction> reactions_;
    std::map<std::size_t, std::string> labels_;
    std::map<std::string, std::string> metadata_;
};

void write_complex(std::ostringstream& os, const std::vector<SpeciesId>& side) {
    if (side.empty()) {
        os << '0';
        return;
    }
    bool first = true;
    for (std::size_t i = 0; i < side.size();) {
        std::size_t run = 1;
        while (i + run < side.size() && side[i + run] == side[i]) ++run;
        if (!first) os << " + ";
        if (run > 1) os << run << ' ';
        os << side[i].name();
        first = false;
        i += run;
    }
}

}  // namespace

NetworkDocument parse_network(std::string_view text) { return Parser{}.run(text); }

std::string serialize_network(const NetworkDocument& doc) {
    std::ostringstream os;
    for (const auto& [key, value] : doc.metadata) {
        os << "meta " << key;
        if (!value.empty()) os << ' ' << value;
        os << '\n';
    }
    for (const auto& sp : doc.network.species())
        os << "init " << sp.name() << ' ' << (doc.initial.contains(sp) ? doc.initial.amount(sp) : 0) << '\n';
    const auto& rxs = doc.network.reactions();
    for (std::size_t j = 0; j < rxs.size(); ++j) {
        write_complex(os, rxs[j].reactants);
        os << " -> ";
        write_complex(os, rxs[j].products);
        os << " @ " << format_real(rxs[j].rate_constant);
        if (auto it = doc.network.labels().find(j); it != doc.network.labels().end())
            os << "  # block " << it->second;
        os << '\n';
    }
    return os.str();
}

NetworkDocument read_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

}  // namespace chemsical
