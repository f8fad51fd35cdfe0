#pragma once

#include <string>
#include <vector>

#include "stochgrid/problem.hpp"

namespace stochgrid {

// Supported SMPS subset: CORE with NAME/ROWS/COLUMNS/RHS/BOUNDS (UP/LO/FX on
// nonnegative values), TIME with two IMPLICIT periods, STOCH with INDEP
// DISCRETE entries on the RHS, the technology matrix, and second-stage costs.
// Anything else fails loudly with UnsupportedFeature.

struct SmpsRowDef {
    std::string name;
    char kind = 'E';  // 'N', 'E', 'L', 'G'
};

struct SmpsEntry {
    std::string col;
    std::string row;
    double value = 0.0;
};

struct SmpsBound {
    std::string kind;  // "UP", "LO", "FX"
    std::string col;
    double value = 0.0;
};

struct SmpsCore {
    std::string name;
    std::vector<SmpsRowDef> rows;  // includes the objective (kind 'N')
    std::vector<std::string> columns;
    std::vector<SmpsEntry> entries;      // COLUMNS section
    std::vector<SmpsEntry> rhs_entries;  // RHS section (col = rhs set name)
    std::vector<SmpsBound> bounds;
    std::string rhs_name = "RHS";
    std::string objective_row;
};

struct SmpsTime {
    std::string name;
    std::string period1_col, period1_row;
    std::string period2_col, period2_row;
};

// One independent discrete random position with its outcome distribution.
struct SmpsStochEntry {
    std::string col;  // RHS set name for h entries, else a column name
    std::string row;
    Vector values;
    Vector probs;
};

struct SmpsStoch {
    std::string name;
    std::vector<SmpsStochEntry> entries;
};

struct SmpsBundle {
    SmpsCore core;
    SmpsTime time;
    SmpsStoch stoch;

    int num_stage1_cols = 0;  // resolved stage split over core.columns
    int num_stage1_rows = 0;  // over constraint (non-objective) rows
};

// Parses and cross-validates the triple; errors carry file:line positions.
SmpsBundle parse_smps(const std::string& core_text, const std::string& time_text,
                      const std::string& stoch_text);

SmpsBundle load_smps(const std::string& core_path, const std::string& time_path,
                     const std::string& stoch_path);

// Canonical re-emission of the supported subset; emit∘parse is the identity
// on canonical-form files.
std::string emit_core(const SmpsBundle& bundle);
std::string emit_time(const SmpsBundle& bundle);
std::string emit_stoch(const SmpsBundle& bundle);

// Generator description equivalent to the bundle (inequalities and bounds
// become slack rows in the owning stage; probabilities renormalized).
SampledSpec bundle_to_spec(const SmpsBundle& bundle);

// Full enumeration of the independent entries' cross product.
TwoStageProblem realize_full(const SmpsBundle& bundle, long long cap = 1000000);

// N iid draws, each scenario with probability 1/N; deterministic per seed.
TwoStageProblem realize_sampled(const SmpsBundle& bundle, long long sample_count,
                                std::uint64_t seed);

}  // namespace stochgrid
