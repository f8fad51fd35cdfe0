#include "stochgrid/smps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "stochgrid/errors.hpp"

namespace stochgrid {

namespace {

struct Line {
    int number = 0;
    std::vector<std::string> tokens;
    bool section = false;  // section headers start in column 1
};

std::vector<Line> tokenize(const std::string& text, const char* file) {
    (void)file;
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '*') continue;
        Line line;
        line.number = number;
        line.section = !std::isspace(static_cast<unsigned char>(raw[0]));
        std::istringstream ls(raw);
        std::string tok;
        while (ls >> tok) line.tokens.push_back(tok);
        if (!line.tokens.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

[[noreturn]] void fail(const char* file, int line, const std::string& msg) {
    throw ValidationError(std::string(file) + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void unsupported(const char* file, int line, const std::string& msg) {
    throw UnsupportedFeature(std::string(file) + ":" + std::to_string(line) + ": " +
                             msg);
}

double parse_number(const std::string& tok, const char* file, int line) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) fail(file, line, "malformed number '" + tok + "'");
        return v;
    } catch (const ValidationError&) {
        throw;
    } catch (...) {
        fail(file, line, "malformed number '" + tok + "'");
    }
}

SmpsCore parse_core(const std::string& text) {
    const char* F = "core";
    SmpsCore core;
    enum class Section { None, Rows, Columns, Rhs, Bounds, Done };
    Section section = Section::None;
    std::map<std::string, char> row_kinds;
    std::map<std::string, bool> col_seen;
    bool have_obj = false;

    for (const Line& line : tokenize(text, F)) {
        const auto& t = line.tokens;
        if (line.section) {
            const std::string& head = t[0];
            if (head == "NAME") {
                core.name = t.size() > 1 ? t[1] : "";
            } else if (head == "ROWS") {
                section = Section::Rows;
            } else if (head == "COLUMNS") {
                section = Section::Columns;
            } else if (head == "RHS") {
                section = Section::Rhs;
            } else if (head == "BOUNDS") {
                section = Section::Bounds;
            } else if (head == "ENDATA") {
                section = Section::Done;
            } else if (head == "RANGES" || head == "OBJSENSE" || head == "OBJSENSE:" ||
                       head == "SOS") {
                unsupported(F, line.number, "section " + head + " is not supported");
            } else {
                unsupported(F, line.number, "unrecognized section " + head);
            }
            continue;
        }
        switch (section) {
            case Section::Rows: {
                if (t.size() != 2) fail(F, line.number, "ROWS line needs kind and name");
                char kind = std::toupper(static_cast<unsigned char>(t[0][0]));
                if (t[0].size() != 1 || (kind != 'N' && kind != 'E' && kind != 'L' &&
                                         kind != 'G'))
                    fail(F, line.number, "unknown row kind '" + t[0] + "'");
                if (row_kinds.count(t[1]))
                    fail(F, line.number, "duplicate row " + t[1]);
                if (kind == 'N') {
                    if (have_obj)
                        unsupported(F, line.number,
                                    "multiple objective (N) rows are not supported");
                    have_obj = true;
                    core.objective_row = t[1];
                }
                row_kinds[t[1]] = kind;
                core.rows.push_back({t[1], kind});
                break;
            }
            case Section::Columns: {
                if (t.size() >= 2 && (t[1] == "'MARKER'" || t[1] == "MARKER"))
                    unsupported(F, line.number, "integer markers are not supported");
                if (t.size() != 3 && t.size() != 5)
                    fail(F, line.number, "COLUMNS line needs col row value [row value]");
                const std::string& col = t[0];
                if (!col_seen.count(col)) {
                    col_seen[col] = true;
                    core.columns.push_back(col);
                }
                for (size_t k = 1; k + 1 < t.size(); k += 2) {
                    if (!row_kinds.count(t[k]))
                        fail(F, line.number, "unknown row " + t[k]);
                    core.entries.push_back(
                        {col, t[k], parse_number(t[k + 1], F, line.number)});
                }
                break;
            }
            case Section::Rhs: {
                if (t.size() != 3 && t.size() != 5)
                    fail(F, line.number, "RHS line needs set row value [row value]");
                core.rhs_name = t[0];
                for (size_t k = 1; k + 1 < t.size(); k += 2) {
                    if (!row_kinds.count(t[k]))
                        fail(F, line.number, "unknown row " + t[k]);
                    core.rhs_entries.push_back(
                        {t[0], t[k], parse_number(t[k + 1], F, line.number)});
                }
                break;
            }
            case Section::Bounds: {
                if (t.size() < 3) fail(F, line.number, "BOUNDS line too short");
                std::string kind = t[0];
                std::transform(kind.begin(), kind.end(), kind.begin(), ::toupper);
                if (kind == "FR" || kind == "MI" || kind == "PL" || kind == "BV" ||
                    kind == "UI" || kind == "LI") {
                    if (kind == "PL") break;  // x ≥ 0 already; no-op
                    unsupported(F, line.number,
                                "bound kind " + kind + " is not supported");
                }
                if (kind != "UP" && kind != "LO" && kind != "FX")
                    fail(F, line.number, "unknown bound kind " + t[0]);
                if (t.size() != 4) fail(F, line.number, "bound needs kind set col value");
                if (!col_seen.count(t[2]))
                    fail(F, line.number, "bound references unknown column " + t[2]);
                double v = parse_number(t[3], F, line.number);
                if (v < 0)
                    unsupported(F, line.number,
                                "negative bounds conflict with the x >= 0 form");
                core.bounds.push_back({kind, t[2], v});
                break;
            }
            case Section::None:
                fail(F, line.number, "data before any section header");
            case Section::Done:
                fail(F, line.number, "data after ENDATA");
        }
    }
    if (core.rows.empty()) throw ValidationError("core: no ROWS section");
    if (core.columns.empty()) throw ValidationError("core: no COLUMNS section");
    if (!have_obj) throw ValidationError("core: no objective (N) row");
    return core;
}

SmpsTime parse_time(const std::string& text) {
    const char* F = "time";
    SmpsTime time;
    bool in_periods = false;
    int period_lines = 0;
    for (const Line& line : tokenize(text, F)) {
        const auto& t = line.tokens;
        if (line.section) {
            if (t[0] == "TIME") {
                time.name = t.size() > 1 ? t[1] : "";
            } else if (t[0] == "PERIODS") {
                if (t.size() > 1 && t[1] != "IMPLICIT")
                    unsupported(F, line.number,
                                "only IMPLICIT PERIODS are supported, got " + t[1]);
                in_periods = true;
            } else if (t[0] == "ENDATA") {
                in_periods = false;
            } else {
                unsupported(F, line.number, "unrecognized section " + t[0]);
            }
            continue;
        }
        if (!in_periods) fail(F, line.number, "data outside PERIODS section");
        if (t.size() != 3) fail(F, line.number, "PERIODS line needs col row period");
        ++period_lines;
        if (period_lines == 1) {
            time.period1_col = t[0];
            time.period1_row = t[1];
        } else if (period_lines == 2) {
            time.period2_col = t[0];
            time.period2_row = t[1];
        } else {
            unsupported(F, line.number,
                        "more than two periods (multistage) is not supported");
        }
    }
    if (period_lines != 2)
        throw ValidationError("time: expected exactly two periods, got " +
                              std::to_string(period_lines));
    return time;
}

SmpsStoch parse_stoch(const std::string& text) {
    const char* F = "stoch";
    SmpsStoch stoch;
    bool in_indep = false;
    std::map<std::pair<std::string, std::string>, size_t> index;
    for (const Line& line : tokenize(text, F)) {
        const auto& t = line.tokens;
        if (line.section) {
            if (t[0] == "STOCH") {
                stoch.name = t.size() > 1 ? t[1] : "";
            } else if (t[0] == "INDEP") {
                if (t.size() < 2 || t[1] != "DISCRETE")
                    unsupported(F, line.number,
                                "only INDEP DISCRETE stochastics are supported");
                in_indep = true;
            } else if (t[0] == "BLOCKS" || t[0] == "SCENARIOS") {
                unsupported(F, line.number,
                            "stochastic section " + t[0] + " is not supported");
            } else if (t[0] == "ENDATA") {
                in_indep = false;
            } else {
                unsupported(F, line.number, "unrecognized section " + t[0]);
            }
            continue;
        }
        if (!in_indep) fail(F, line.number, "data outside INDEP DISCRETE section");
        // col row value [period] probability
        if (t.size() != 4 && t.size() != 5)
            fail(F, line.number, "INDEP line needs col row value [period] prob");
        double value = parse_number(t[2], F, line.number);
        double prob = parse_number(t.back(), F, line.number);
        auto key = std::make_pair(t[0], t[1]);
        auto it = index.find(key);
        if (it == index.end()) {
            index[key] = stoch.entries.size();
            stoch.entries.push_back({t[0], t[1], {value}, {prob}});
        } else {
            stoch.entries[it->second].values.push_back(value);
            stoch.entries[it->second].probs.push_back(prob);
        }
    }
    if (stoch.entries.empty())
        throw ValidationError("stoch: no INDEP DISCRETE entries found");
    return stoch;
}

}  // namespace

SmpsBundle parse_smps(const std::string& core_text, const std::string& time_text,
                      const std::string& stoch_text) {
    if (core_text.empty() || time_text.empty() || stoch_text.empty())
        throw ValidationError("smps: all three of core/time/stoch must be nonempty");
    SmpsBundle b;
    b.core = parse_core(core_text);
    b.time = parse_time(time_text);
    b.stoch = parse_stoch(stoch_text);

    // resolve the stage split
    auto col_pos = [&](const std::string& name) {
        auto it = std::find(b.core.columns.begin(), b.core.columns.end(), name);
        if (it == b.core.columns.end())
            throw ValidationError("time: column " + name + " does not exist in core");
        return static_cast<int>(it - b.core.columns.begin());
    };
    std::vector<std::string> constraint_rows;
    for (const auto& r : b.core.rows)
        if (r.kind != 'N') constraint_rows.push_back(r.name);
    auto row_pos = [&](const std::string& name) {
        auto it = std::find(constraint_rows.begin(), constraint_rows.end(), name);
        if (it == constraint_rows.end())
            throw ValidationError("time: row " + name +
                                  " does not exist in core (or is the objective)");
        return static_cast<int>(it - constraint_rows.begin());
    };
    if (col_pos(b.time.period1_col) != 0)
        throw ValidationError("time: first period must start at the first column");
    b.num_stage1_cols = col_pos(b.time.period2_col);
    b.num_stage1_rows = row_pos(b.time.period2_row);
    if (b.num_stage1_cols == 0)
        throw ValidationError("time: the split leaves no first-stage columns");
    if (b.num_stage1_cols >= static_cast<int>(b.core.columns.size()))
        throw ValidationError("time: the split leaves no second-stage columns");
    if (b.num_stage1_rows >= static_cast<int>(constraint_rows.size()))
        throw ValidationError("time: the split leaves no second-stage rows");

    // validate stochastic entries against the split (and normalize probs)
    for (auto& e : b.stoch.entries) {
        double total = kahan_sum(e.probs);
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("stoch: outcome probabilities for (" + e.col + ", " +
                                  e.row + ") sum to " + std::to_string(total));
        for (double& p : e.probs) p /= total;
        bool is_rhs = e.col == b.core.rhs_name || e.col == "RHS" || e.col == "rhs";
        if (is_rhs) {
            if (row_pos(e.row) < b.num_stage1_rows)
                throw ValidationError("stoch: random rhs row " + e.row +
                                      " belongs to stage 1");
            continue;
        }
        int cp = col_pos(e.col);
        if (e.row == b.core.objective_row) {
            if (cp < b.num_stage1_cols)
                throw ValidationError(
                    "stoch: random objective entry on first-stage column " + e.col);
            continue;
        }
        int rp = row_pos(e.row);
        if (rp < b.num_stage1_rows)
            throw ValidationError("stoch: random entry on first-stage row " + e.row);
        if (cp >= b.num_stage1_cols)
            throw UnsupportedFeature(
                "stoch: random recourse-matrix entry (" + e.col + ", " + e.row +
                "); the recourse matrix is fixed");
    }
    return b;
}

SmpsBundle load_smps(const std::string& core_path, const std::string& time_path,
                     const std::string& stoch_path) {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    return parse_smps(slurp(core_path), slurp(time_path), slurp(stoch_path));
}

// ---------------------------------------------------------------------------
// Canonical emission
// ---------------------------------------------------------------------------

namespace {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string pad(const std::string& s, size_t width) {
    if (s.size() >= width) return s + " ";
    return s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string emit_core(const SmpsBundle& bundle) {
    const SmpsCore& c = bundle.core;
    std::ostringstream os;
    os << "NAME          " << c.name << "\n";
    os << "ROWS\n";
    for (const auto& r : c.rows) os << " " << r.kind << "  " << r.name << "\n";
    os << "COLUMNS\n";
    for (const auto& e : c.entries)
        os << "    " << pad(e.col, 10) << pad(e.row, 10) << fmt_num(e.value) << "\n";
    os << "RHS\n";
    for (const auto& e : c.rhs_entries)
        os << "    " << pad(e.col, 10) << pad(e.row, 10) << fmt_num(e.value) << "\n";
    if (!c.bounds.empty()) {
        os << "BOUNDS\n";
        for (const auto& bd : c.bounds)
            os << " " << bd.kind << " " << pad("BND", 10) << pad(bd.col, 10)
               << fmt_num(bd.value) << "\n";
    }
    os << "ENDATA\n";
    return os.str();
}

std::string emit_time(const SmpsBundle& bundle) {
    std::ostringstream os;
    os << "TIME          " << bundle.time.name << "\n";
    os << "PERIODS       IMPLICIT\n";
    os << "    " << pad(bundle.time.period1_col, 10) << pad(bundle.time.period1_row, 10)
       << "PERIOD1\n";
    os << "    " << pad(bundle.time.period2_col, 10) << pad(bundle.time.period2_row, 10)
       << "PERIOD2\n";
    os << "ENDATA\n";
    return os.str();
}

std::string emit_stoch(const SmpsBundle& bundle) {
    std::ostringstream os;
    os << "STOCH         " << bundle.stoch.name << "\n";
    os << "INDEP         DISCRETE\n";
    for (const auto& e : bundle.stoch.entries)
        for (size_t k = 0; k < e.values.size(); ++k)
            os << "    " << pad(e.col, 10) << pad(e.row, 10)
               << pad(fmt_num(e.values[k]), 13) << pad("PERIOD2", 10)
               << fmt_num(e.probs[k]) << "\n";
    os << "ENDATA\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Realization
// ---------------------------------------------------------------------------

SampledSpec bundle_to_spec(const SmpsBundle& bundle) {
    const SmpsCore& core = bundle.core;

    std::vector<std::string> constraint_rows;
    std::map<std::string, char> row_kind;
    for (const auto& r : core.rows) {
        row_kind[r.name] = r.kind;
        if (r.kind != 'N') constraint_rows.push_back(r.name);
    }
    std::map<std::string, int> row_index;  // constraint rows only
    for (size_t i = 0; i < constraint_rows.size(); ++i)
        row_index[constraint_rows[i]] = static_cast<int>(i);
    std::map<std::string, int> col_index;
    for (size_t j = 0; j < core.columns.size(); ++j)
        col_index[core.columns[j]] = static_cast<int>(j);

    const int n_rows = static_cast<int>(constraint_rows.size());
    const int n_cols = static_cast<int>(core.columns.size());
    const int r1 = bundle.num_stage1_rows;
    const int c1 = bundle.num_stage1_cols;
    const int r2 = n_rows - r1;
    const int c2 = n_cols - c1;

    Matrix coeffs(n_rows, n_cols);
    Vector obj(n_cols, 0.0);
    for (const auto& e : core.entries) {
        if (e.row == core.objective_row) {
            obj[col_index[e.col]] = e.value;
        } else {
            coeffs(row_index[e.row], col_index[e.col]) = e.value;
        }
    }
    Vector rhs(n_rows, 0.0);
    for (const auto& e : core.rhs_entries) {
        if (e.row == core.objective_row) continue;  // objective offset unsupported, rare
        rhs[row_index[e.row]] = e.value;
    }

    for (int r = 0; r < r1; ++r)
        for (int j = c1; j < n_cols; ++j)
            if (coeffs(r, j) != 0.0)
                throw ValidationError("core: first-stage row " + constraint_rows[r] +
                                      " references second-stage column " +
                                      core.columns[j]);

    // count slack columns per stage: inequality rows plus non-FX bounds
    int s1 = 0, s2 = 0;
    for (int r = 0; r < n_rows; ++r)
        if (row_kind[constraint_rows[r]] != 'E') (r < r1 ? s1 : s2) += 1;
    int extra_rows1 = 0, extra_rows2 = 0;
    for (const auto& bd : core.bounds) {
        bool stage1 = col_index[bd.col] < c1;
        (stage1 ? extra_rows1 : extra_rows2) += 1;
        if (bd.kind != "FX") (stage1 ? s1 : s2) += 1;
    }

    SampledSpec spec;
    const int n1_total = c1 + s1;            // stage-1 structurals + slacks
    const int n2_total = c2 + s2;            // stage-2 structurals + slacks
    const int m1_total = r1 + extra_rows1;   // A rows + stage-1 bound rows
    const int m2_total = r2 + extra_rows2;   // W rows + stage-2 bound rows

    spec.first.c.assign(n1_total, 0.0);
    for (int j = 0; j < c1; ++j) spec.first.c[j] = obj[j];
    spec.first.A = Matrix(m1_total, n1_total);
    spec.first.b.assign(m1_total, 0.0);
    spec.W = Matrix(m2_total, n2_total);
    spec.T_base = Matrix(m2_total, n1_total);
    spec.h_base.assign(m2_total, 0.0);
    spec.q_base.assign(n2_total, 0.0);
    for (int j = 0; j < c2; ++j) spec.q_base[j] = obj[c1 + j];

    int next_s1 = c1, next_s2 = c2;
    // constraint rows with their slacks
    for (int r = 0; r < n_rows; ++r) {
        char kind = row_kind[constraint_rows[r]];
        double slack_sign = kind == 'L' ? 1.0 : (kind == 'G' ? -1.0 : 0.0);
        if (r < r1) {
            for (int j = 0; j < c1; ++j) spec.first.A(r, j) = coeffs(r, j);
            spec.first.b[r] = rhs[r];
            if (slack_sign != 0.0) spec.first.A(r, next_s1++) = slack_sign;
        } else {
            int rr = r - r1;
            for (int j = 0; j < c1; ++j) spec.T_base(rr, j) = coeffs(r, j);
            for (int j = 0; j < c2; ++j) spec.W(rr, j) = coeffs(r, c1 + j);
            spec.h_base[rr] = rhs[r];
            if (slack_sign != 0.0) spec.W(rr, next_s2++) = slack_sign;
        }
    }
    // bound rows: UP → x + s = u; LO → x − s = l; FX → x = v
    int next_row1 = r1, next_row2 = r2;
    for (const auto& bd : core.bounds) {
        int j = col_index[bd.col];
        double slack_sign = bd.kind == "UP" ? 1.0 : (bd.kind == "LO" ? -1.0 : 0.0);
        if (j < c1) {
            int r = next_row1++;
            spec.first.A(r, j) = 1.0;
            spec.first.b[r] = bd.value;
            if (slack_sign != 0.0) spec.first.A(r, next_s1++) = slack_sign;
        } else {
            int r = next_row2++;
            spec.W(r, j - c1) = 1.0;
            spec.h_base[r] = bd.value;
            if (slack_sign != 0.0) spec.W(r, next_s2++) = slack_sign;
        }
    }

    for (const auto& e : bundle.stoch.entries) {
        RandomEntry re;
        re.values = e.values;
        re.probs = e.probs;
        bool is_rhs = e.col == core.rhs_name || e.col == "RHS" || e.col == "rhs";
        if (is_rhs) {
            re.target = RandomEntry::Target::Rhs;
            re.row = row_index[e.row] - r1;
        } else if (e.row == core.objective_row) {
            re.target = RandomEntry::Target::Cost;
            re.row = col_index[e.col] - c1;
        } else {
            re.target = RandomEntry::Target::Tech;
            re.row = row_index[e.row] - r1;
            re.col = col_index[e.col];
        }
        spec.entries.push_back(std::move(re));
    }
    return spec;
}

TwoStageProblem realize_full(const SmpsBundle& bundle, long long cap) {
    return enumerate_instance(bundle_to_spec(bundle), cap);
}

TwoStageProblem realize_sampled(const SmpsBundle& bundle, long long sample_count,
                                std::uint64_t seed) {
    if (sample_count < 1)
        throw ValidationError("realize_sampled: sample count must be >= 1");
    SampledSpec spec = bundle_to_spec(bundle);
    spec.sample_count = sample_count;
    spec.seed = seed;
    return sample_instance(spec);
}

}  // namespace stochgrid
