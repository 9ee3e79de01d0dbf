#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parametrix/chart.hpp"

namespace parametrix {

// Piecewise-polynomial axis: Gauss-Legendre nodes on each panel between
// consecutive breaks, Lagrange interpolation inside a panel.
class InterpolationAxis {
public:
    InterpolationAxis() = default;
    InterpolationAxis(std::vector<double> breaks, int nodes_per_panel);

    std::size_t size() const { return nodes_.size(); }
    int nodes_per_panel() const { return per_panel_; }
    const std::vector<double>& nodes() const { return nodes_; }
    // Gauss-Legendre weights in axis units; integrate the interpolant exactly.
    const std::vector<double>& weights() const { return weights_; }
    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }

    // Writes nodes_per_panel() basis values for coordinate x and returns the
    // index of the first node of the panel, or -1 when x is off the axis.
    int basis(double x, double* out) const;

private:
    std::vector<double> breaks_;
    int per_panel_ = 0;
    std::vector<double> ref_nodes_;
    std::vector<double> ref_bary_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

class TermTable;

// A term of the series interpolated to one time s, in scaled units: the
// continuous part is stored as rho^2 q and the atom part as rho q, where
// rho = sqrt(a_sup s).
class TableSlice {
public:
    double rho() const { return rho_; }
    double continuous(double u1, double u2) const;
    double atom(double v) const;

private:
    friend class TermTable;
    const TermTable* table_ = nullptr;
    double rho_ = 0.0;
    std::vector<double> values_;
};

// Values of one series order on a Chebyshev-Lobatto grid in
// w = (s / horizon)^(eta / 2) times the chart nodes. The node w = 0 holds
// zeros: every correction term vanishes at s = 0 in scaled units.
class TermTable {
public:
    TermTable(const ChartLayout& chart, int nodes_per_panel, int time_nodes, double horizon, double eta,
              double a_sup, bool with_atom);

    int time_count() const { return static_cast<int>(w_.size()); }
    double time(int j) const { return s_[j]; }
    double rho(int j) const;
    double rho_at(double s) const;

    std::size_t continuous_size() const { return u1_.size() * u2_.size(); }
    std::size_t atom_size() const { return with_atom_ ? v_.size() : 0; }
    std::size_t slice_size() const { return continuous_size() + atom_size(); }

    const InterpolationAxis& u1() const { return u1_; }
    const InterpolationAxis& u2() const { return u2_; }
    const InterpolationAxis& v() const { return v_; }
    bool with_atom() const { return with_atom_; }

    // Node layout inside a slice: continuous nodes row-major (u1 outer),
    // then atom nodes.
    std::span<double> values(int j) { return {values_.data() + j * slice_size(), slice_size()}; }
    std::span<const double> values(int j) const { return {values_.data() + j * slice_size(), slice_size()}; }
    void mark_filled(int j) { filled_[j] = true; }
    bool filled(int j) const { return filled_[j]; }
    bool complete() const;

    // Interpolated slice at time s in (0, horizon]; all time nodes must be
    // filled unless s coincides with a filled node.
    TableSlice slice_at(double s) const;

private:
    friend class TableSlice;
    InterpolationAxis u1_, u2_, v_;
    bool with_atom_;
    double horizon_, eta_, a_sup_;
    std::vector<double> w_, s_, bary_;
    std::vector<double> values_;
    std::vector<bool> filled_;
};

}  // namespace parametrix
