#pragma once
// Sparse linear/mixed-integer program container shared by the simplex solver,
// the branch-and-bound layer and the planning-model builder.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace tplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { LE, GE, EQ };

enum class VarKind : std::uint8_t { Continuous, Binary, Integer };

struct LpEntry {
    int row = 0;
    int col = 0;
    double coef = 0.0;
};

// Minimization problem: min c'x + c0  s.t.  rows over x, lb <= x <= ub.
// Rows and columns carry optional names and tags; tags identify which model
// equation produced a row and are used by the constraint census and the
// solution verifier. Plumbing rows use non-numeric tags.
struct Lp {
    std::string name;
    std::vector<double> obj;            // size = num vars
    double obj_const = 0.0;
    std::vector<double> lb, ub;         // size = num vars
    std::vector<VarKind> kind;          // size = num vars
    std::vector<std::string> col_name;  // size = num vars
    std::vector<std::string> col_tag;   // size = num vars, may be empty strings

    std::vector<RowSense> sense;        // size = num rows
    std::vector<double> rhs;            // size = num rows
    std::vector<std::string> row_name;  // size = num rows
    std::vector<std::string> row_tag;   // size = num rows
    std::vector<LpEntry> entries;       // unordered triples

    int num_vars() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    int add_var(const std::string& nm, double lo, double hi, double cost,
                VarKind k = VarKind::Continuous, const std::string& tag = "");
    int add_row(RowSense s, double r, const std::string& nm, const std::string& tag = "");
    void add_entry(int row, int col, double coef);

    bool has_integers() const;
    // Largest constraint violation of x (rows and bounds), in absolute terms.
    double max_violation(const std::vector<double>& x) const;
    double eval_obj(const std::vector<double>& x) const;
    // Worst deviation from integrality over Binary/Integer columns.
    double integrality_violation(const std::vector<double>& x) const;
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    double obj = 0.0;
    std::vector<double> x;              // primal values (num vars)
    std::vector<double> row_dual;       // y, one per row; d obj / d rhs
    std::vector<double> reduced_cost;   // d_j = c_j - y'A_j, one per var
    std::vector<double> farkas;         // infeasibility certificate (per row), empty otherwise
    std::vector<double> ray;            // unbounded direction (per var), empty otherwise
    int iterations = 0;
    // |primal obj - dual obj| actually achieved; callers compare against tol*(1+|obj|).
    double duality_residual = 0.0;
};

// Dual objective value implied by (row_dual, reduced_cost) under the bound
// convention used here: y'b + sum over nonbasic-at-bound reduced-cost terms.
double lp_dual_objective(const Lp& lp, const LpSolution& sol);

// Checks y is a valid certificate of infeasibility: the row aggregation y'A
// admits max_{lb<=x<=ub} y'(Ax) < y'b within slack. Returns the positive margin
// (y'b - sup), negative or zero means the certificate fails.
double lp_farkas_margin(const Lp& lp, const std::vector<double>& y);

// Plain-text serialization (documented in the README). Deterministic layout.
void write_lp(const Lp& lp, std::ostream& os);
Lp read_lp(std::istream& is);
void write_lp_file(const Lp& lp, const std::string& path);
Lp read_lp_file(const std::string& path);

} // namespace tplan
