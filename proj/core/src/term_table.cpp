#include "parametrix/term_table.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "parametrix/errors.hpp"
#include "parametrix/quadrature.hpp"

namespace parametrix {

InterpolationAxis::InterpolationAxis(std::vector<double> breaks, int nodes_per_panel)
    : breaks_(std::move(breaks)), per_panel_(nodes_per_panel) {
    const auto rule = quad::gauss_legendre(per_panel_);
    ref_nodes_ = rule.nodes;
    ref_bary_ = quad::barycentric_weights(ref_nodes_);
    for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
        const double c = 0.5 * (breaks_[p] + breaks_[p + 1]);
        const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
        for (int i = 0; i < per_panel_; ++i) {
            nodes_.push_back(c + h * rule.nodes[i]);
            weights_.push_back(h * rule.weights[i]);
        }
    }
}

int InterpolationAxis::basis(double x, double* out) const {
    if (!(x >= breaks_.front() && x <= breaks_.back())) return -1;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t p = static_cast<std::size_t>(it - breaks_.begin());
    p = std::clamp<std::size_t>(p, 1, breaks_.size() - 1) - 1;
    const double c = 0.5 * (breaks_[p] + breaks_[p + 1]);
    const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
    quad::lagrange_basis(ref_nodes_, ref_bary_, (x - c) / h, std::span<double>(out, per_panel_));
    return static_cast<int>(p) * per_panel_;
}

double TableSlice::continuous(double u1, double u2) const {
    double b1[32], b2[32];
    const int i0 = table_->u1_.basis(u1, b1);
    if (i0 < 0) return 0.0;
    const int j0 = table_->u2_.basis(u2, b2);
    if (j0 < 0) return 0.0;
    const int n1 = table_->u1_.nodes_per_panel(), n2 = table_->u2_.nodes_per_panel();
    const std::size_t stride = table_->u2_.size();
    double acc = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double* row = values_.data() + (i0 + i) * stride + j0;
        double r = 0.0;
        for (int j = 0; j < n2; ++j) r += b2[j] * row[j];
        acc += b1[i] * r;
    }
    return acc;
}

double TableSlice::atom(double v) const {
    if (!table_->with_atom_) return 0.0;
    double b[32];
    const int i0 = table_->v_.basis(v, b);
    if (i0 < 0) return 0.0;
    const double* row = values_.data() + table_->continuous_size() + i0;
    double acc = 0.0;
    for (int i = 0; i < table_->v_.nodes_per_panel(); ++i) acc += b[i] * row[i];
    return acc;
}

TermTable::TermTable(const ChartLayout& chart, int nodes_per_panel, int time_nodes, double horizon, double eta,
                     double a_sup, bool with_atom)
    : u1_(chart.u1_breaks, nodes_per_panel),
      u2_(chart.u2_breaks, nodes_per_panel),
      v_(chart.atom_breaks, nodes_per_panel),
      with_atom_(with_atom),
      horizon_(horizon),
      eta_(eta),
      a_sup_(a_sup) {
    if (nodes_per_panel < 2 || nodes_per_panel > 32) throw DomainError("table nodes per panel must be in [2, 32]");
    if (time_nodes < 3) throw DomainError("table needs at least 3 time nodes");
    const int n = time_nodes;
    for (int j = 0; j < n; ++j) {
        const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * j / (n - 1)));
        w_.push_back(w);
        s_.push_back(j == n - 1 ? horizon : horizon * std::pow(w, 2.0 / eta));
        double b = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == n - 1) b *= 0.5;
        bary_.push_back(b);
    }
    values_.assign(static_cast<std::size_t>(n) * slice_size(), 0.0);
    filled_.assign(n, false);
    filled_[0] = true;  // zeros at s = 0
}

double TermTable::rho(int j) const { return std::sqrt(a_sup_ * s_[j]); }
double TermTable::rho_at(double s) const { return std::sqrt(a_sup_ * s); }

bool TermTable::complete() const { return std::all_of(filled_.begin(), filled_.end(), [](bool b) { return b; }); }

TableSlice TermTable::slice_at(double s) const {
    TableSlice out;
    out.table_ = this;
    out.rho_ = rho_at(s);
    out.values_.assign(slice_size(), 0.0);
    const double w = std::pow(std::clamp(s / horizon_, 0.0, 1.0), 0.5 * eta_);
    const int n = time_count();
    for (int j = 0; j < n; ++j) {
        if (w == w_[j] || (j == n - 1 && s == horizon_)) {
            if (!filled_[j]) throw std::logic_error("term table slice requested at an unfilled node");
            const auto src = values(j);
            std::copy(src.begin(), src.end(), out.values_.begin());
            return out;
        }
    }
    if (!complete()) throw std::logic_error("term table interpolated before all time nodes were filled");
    double denom = 0.0;
    std::vector<double> c(n);
    for (int j = 0; j < n; ++j) {
        c[j] = bary_[j] / (w - w_[j]);
        denom += c[j];
    }
    for (int j = 0; j < n; ++j) {
        const double cj = c[j] / denom;
        if (j == 0) continue;  // zero slice
        const auto src = values(j);
        for (std::size_t i = 0; i < src.size(); ++i) out.values_[i] += cj * src[i];
    }
    return out;
}

}  // namespace parametrix
