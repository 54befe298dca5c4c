#include "tplan/lp.hpp"
#include "tplan/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tplan {

int Lp::add_var(const std::string& nm, double lo, double hi, double cost, VarKind k,
                const std::string& tag) {
    if (lo > hi) throw InternalError("variable " + nm + " has lb > ub");
    obj.push_back(cost);
    lb.push_back(lo);
    ub.push_back(hi);
    kind.push_back(k);
    col_name.push_back(nm);
    col_tag.push_back(tag);
    return num_vars() - 1;
}

int Lp::add_row(RowSense s, double r, const std::string& nm, const std::string& tag) {
    sense.push_back(s);
    rhs.push_back(r);
    row_name.push_back(nm);
    row_tag.push_back(tag);
    return num_rows() - 1;
}

void Lp::add_entry(int row, int col, double coef) {
    if (row < 0 || row >= num_rows() || col < 0 || col >= num_vars())
        throw InternalError("entry index out of range in " + name);
    if (coef != 0.0) entries.push_back({row, col, coef});
}

bool Lp::has_integers() const {
    for (auto k : kind)
        if (k != VarKind::Continuous) return true;
    return false;
}

double Lp::max_violation(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != num_vars())
        throw InternalError("solution length mismatch in max_violation");
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
        worst = std::max(worst, lb[j] - x[j]);
        worst = std::max(worst, x[j] - ub[j]);
    }
    std::vector<double> act(num_rows(), 0.0);
    for (const auto& e : entries) act[e.row] += e.coef * x[e.col];
    for (int i = 0; i < num_rows(); ++i) {
        switch (sense[i]) {
            case RowSense::LE: worst = std::max(worst, act[i] - rhs[i]); break;
            case RowSense::GE: worst = std::max(worst, rhs[i] - act[i]); break;
            case RowSense::EQ: worst = std::max(worst, std::fabs(act[i] - rhs[i])); break;
        }
    }
    return worst;
}

double Lp::eval_obj(const std::vector<double>& x) const {
    double v = obj_const;
    for (int j = 0; j < num_vars(); ++j) v += obj[j] * x[j];
    return v;
}

double Lp::integrality_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j) {
        if (kind[j] == VarKind::Continuous) continue;
        worst = std::max(worst, std::fabs(x[j] - std::round(x[j])));
    }
    return worst;
}

double lp_dual_objective(const Lp& lp, const LpSolution& sol) {
    double v = lp.obj_const;
    for (int i = 0; i < lp.num_rows(); ++i) v += sol.row_dual[i] * lp.rhs[i];
    // Nonbasic contributions: a variable resting at a finite bound with nonzero
    // reduced cost adds d_j * bound. Detect the active bound from primal value.
    for (int j = 0; j < lp.num_vars(); ++j) {
        double d = sol.reduced_cost[j];
        if (d == 0.0) continue;
        if (d > 0 && lp.lb[j] > -kInf)
            v += d * lp.lb[j];
        else if (d < 0 && lp.ub[j] < kInf)
            v += d * lp.ub[j];
    }
    return v;
}

double lp_farkas_margin(const Lp& lp, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != lp.num_rows()) return -kInf;
    // The aggregation y'A must be boxed: sup_{lb<=x<=ub} (y'A)x finite, and the
    // slack signs implied by the row senses must be respected. Margin is
    // y'b - sup; strictly positive proves no feasible point exists.
    const double gtol = 1e-9;
    std::vector<double> g(lp.num_vars(), 0.0);
    for (const auto& e : lp.entries) g[e.col] += y[e.row] * e.coef;
    double sup = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (std::fabs(g[j]) <= gtol) continue;
        if (g[j] > 0) {
            if (lp.ub[j] >= kInf) return -kInf;
            sup += g[j] * lp.ub[j];
        } else {
            if (lp.lb[j] <= -kInf) return -kInf;
            sup += g[j] * lp.lb[j];
        }
    }
    double yb = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) {
        yb += y[i] * lp.rhs[i];
        if (lp.sense[i] == RowSense::LE && y[i] > gtol) return -kInf;
        if (lp.sense[i] == RowSense::GE && y[i] < -gtol) return -kInf;
    }
    return yb - sup;
}

namespace {
std::string fmt_num(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
double parse_num(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::stod(s);
}
} // namespace

void write_lp(const Lp& lp, std::ostream& os) {
    os << "# tplan-lp 1\n";
    os << "name " << (lp.name.empty() ? "unnamed" : lp.name) << "\n";
    os << "sense min\n";
    os << "objconst " << fmt_num(lp.obj_const) << "\n";
    os << "vars " << lp.num_vars() << "\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        char k = lp.kind[j] == VarKind::Continuous ? 'c'
               : lp.kind[j] == VarKind::Binary     ? 'b' : 'i';
        os << "v " << j << " " << (lp.col_name[j].empty() ? "x" + std::to_string(j) : lp.col_name[j])
           << " " << fmt_num(lp.lb[j]) << " " << fmt_num(lp.ub[j]) << " " << k;
        if (!lp.col_tag[j].empty()) os << " " << lp.col_tag[j];
        os << "\n";
    }
    for (int j = 0; j < lp.num_vars(); ++j)
        if (lp.obj[j] != 0.0) os << "obj " << j << " " << fmt_num(lp.obj[j]) << "\n";
    os << "rows " << lp.num_rows() << "\n";
    for (int i = 0; i < lp.num_rows(); ++i) {
        const char* s = lp.sense[i] == RowSense::LE ? "le" : lp.sense[i] == RowSense::GE ? "ge" : "eq";
        os << "r " << i << " " << s << " " << fmt_num(lp.rhs[i]) << " "
           << (lp.row_name[i].empty() ? "r" + std::to_string(i) : lp.row_name[i]);
        if (!lp.row_tag[i].empty()) os << " " << lp.row_tag[i];
        os << "\n";
    }
    for (const auto& e : lp.entries)
        os << "a " << e.row << " " << e.col << " " << fmt_num(e.coef) << "\n";
    os << "end\n";
}

Lp read_lp(std::istream& is) {
    Lp lp;
    std::string line;
    bool saw_end = false;
    int declared_vars = -1, declared_rows = -1;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "name") {
            ls >> lp.name;
        } else if (tok == "sense") {
            std::string s; ls >> s;
            if (s != "min") throw ParseError("lp file: only 'sense min' is supported");
        } else if (tok == "objconst") {
            std::string v; ls >> v; lp.obj_const = parse_num(v);
        } else if (tok == "vars") {
            ls >> declared_vars;
        } else if (tok == "rows") {
            ls >> declared_rows;
        } else if (tok == "v") {
            int idx; std::string nm, lo, hi; char k; std::string tag;
            ls >> idx >> nm >> lo >> hi >> k;
            ls >> tag; // optional
            if (idx != lp.num_vars()) throw ParseError("lp file: variable indices must be sequential");
            VarKind vk = k == 'c' ? VarKind::Continuous : k == 'b' ? VarKind::Binary : VarKind::Integer;
            lp.add_var(nm, parse_num(lo), parse_num(hi), 0.0, vk, tag);
        } else if (tok == "obj") {
            int idx; std::string v; ls >> idx >> v;
            if (idx < 0 || idx >= lp.num_vars()) throw ParseError("lp file: obj index out of range");
            lp.obj[idx] = parse_num(v);
        } else if (tok == "r") {
            int idx; std::string s, v, nm, tag;
            ls >> idx >> s >> v >> nm;
            ls >> tag;
            if (idx != lp.num_rows()) throw ParseError("lp file: row indices must be sequential");
            RowSense rs = s == "le" ? RowSense::LE : s == "ge" ? RowSense::GE : RowSense::EQ;
            if (s != "le" && s != "ge" && s != "eq") throw ParseError("lp file: bad row sense " + s);
            lp.add_row(rs, parse_num(v), nm, tag);
        } else if (tok == "a") {
            int r, c; std::string v; ls >> r >> c >> v;
            lp.add_entry(r, c, parse_num(v));
        } else if (tok == "end") {
            saw_end = true;
            break;
        } else {
            throw ParseError("lp file: unknown record '" + tok + "'");
        }
    }
    if (!saw_end) throw ParseError("lp file: missing 'end'");
    if (declared_vars >= 0 && declared_vars != lp.num_vars())
        throw ParseError("lp file: var count mismatch");
    if (declared_rows >= 0 && declared_rows != lp.num_rows())
        throw ParseError("lp file: row count mismatch");
    return lp;
}

void write_lp_file(const Lp& lp, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open " + path + " for writing");
    write_lp(lp, os);
}

Lp read_lp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open " + path);
    return read_lp(is);
}

} // namespace tplan
