#pragma once

// Line-based `.crn` text format:
//
//   # comment
//   meta <key> <value...>
//   init <species> <count>
//   <complex> -> <complex> @ <rate>      [# block <label>]
//
// where <complex> is `0` or `[n ]S (+ [n ]S)*`. Species are declared on first
// mention. `meta` and `init` are reserved and cannot name species.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chemsical/crn.hpp"

namespace chemsical {

struct NetworkDocument {
    ReactionNetwork network;
    DiscreteState initial;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const NetworkDocument&, const NetworkDocument&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

NetworkDocument parse_network(std::string_view text);

/// Canonical text: metadata, one `init` per species in species order, then
/// reactions in order. Rates use the shortest round-trip decimal form.
std::string serialize_network(const NetworkDocument& doc);

/// Shortest decimal that parses back to `value`, always with a '.' or exponent.
std::string format_real(double value);

NetworkDocument read_network_file(const std::string& path);

}  // namespace chemsical
