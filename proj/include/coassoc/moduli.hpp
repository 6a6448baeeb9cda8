#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace coassoc {

struct TopologyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Rate sits on a wall; the Fredholm theory does not apply there.
struct WallCollisionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TopologyInput {
    std::array<int, 4> b_N{};      // Betti numbers of the 4-fold
    int b2_plus_N = 0;             // dimension of the L2 self-dual harmonic forms
    std::array<int, 4> b_Sigma{};  // Betti numbers of the link
    int ends_nonplanar = 0;        // k'
    int components_nonplanar = 0;  // k

    // Throws TopologyError on negative entries, b2+ > b2, k' > b0(Sigma), k > b0(N).
    void validate() const;
};

// Ranks along H_cs(N) -> H(N) -> H(Sigma) -> H_cs(N) in degrees 0..3, with
// dim H^m_cs(N) = b^{4-m}(N) and H^4(N) = 0.
struct ExactSequenceResult {
    bool feasible = false;
    int dim_im_p2 = 0;
    int dim_im_p1 = 0;
    std::array<int, 4> rank_p{};
    std::array<int, 4> rank_boundary{};
    std::array<int, 5> rank_phi{};
    std::vector<std::string> violations;
};
ExactSequenceResult exact_sequence_check(const TopologyInput& top);

struct WallEntry {
    double mu;
    int d;
};

struct WallTable {
    std::vector<WallEntry> walls;      // strictly increasing mu, d >= 1
    std::string provenance = "user";   // analytic | DEC-level-N | user
    std::optional<int> dim_Z;          // otherwise derived from a wall at 0

    void validate() const;
};

// Integer with possibly unknown bounds; exact when both agree.
struct Bound {
    std::optional<int> lo, hi;
    static Bound exact(int v) { return {v, v}; }
    bool is_exact() const { return lo && hi && *lo == *hi; }
    bool operator==(const Bound&) const = default;
};

struct Ledger {
    Bound dim_K, dim_Cplus, dim_C, dim_O, dim_B, index;
};

struct ModuliReport {
    double lambda = 0;
    std::string regime;     // "below-minus-two", "minus-two-to-zero", "zero-to-one"
    Bound dimension;        // below -2 this bounds the expected dimension
    Ledger ledger;
    int wall_sum = 0;       // d(mu) summed strictly between lambda and -2 (or 0 for the top regime)
    std::string provenance;
    std::vector<std::string> notes;
};

// dim_B is only meaningful for lambda >= 0; if absent it is bounded by [0, b0(N)].
ModuliReport dim_moduli(const TopologyInput& top, const WallTable& walls, double lambda,
                        std::optional<int> dim_B = std::nullopt);

struct Crossing {
    double mu;
    int d;
    Bound kernel_gain;
    Bound cokernel_loss;
};

struct IndexLedger {
    int index_jump = 0;
    std::vector<Crossing> crossings;
    Bound kernel_start, cokernel_start, kernel_end, cokernel_end;
};
// Walls strictly inside (lambda2, lambda1), lambda2 <= lambda1 < 1.
IndexLedger index_ledger(const TopologyInput& top, const WallTable& walls, double lambda1, double lambda2);

std::vector<std::string> ledger_bounds_check(const ModuliReport& report, const TopologyInput& top);

// Walls known from topology merged with the table: -2 with d = b1(Sigma), 0 with b0(Sigma) + dim Z.
std::vector<WallEntry> effective_walls(const TopologyInput& top, const WallTable& walls);

void to_json(nlohmann::json& j, const TopologyInput& t);
void from_json(const nlohmann::json& j, TopologyInput& t);
void to_json(nlohmann::json& j, const WallTable& w);
void from_json(const nlohmann::json& j, WallTable& w);
void to_json(nlohmann::json& j, const Bound& b);
void to_json(nlohmann::json& j, const ModuliReport& r);
void to_json(nlohmann::json& j, const IndexLedger& l);

// Plain-text table of a report.
std::string format_report(const ModuliReport& r);

}  // namespace coassoc
