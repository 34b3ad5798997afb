#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "harnn/config.hpp"
#include "harnn/rng.hpp"

namespace harnn {

// Gated recurrent cell, batch-first rows. Gate order: gru [update, reset,
// candidate], lstm [input, forget, output, cell]. All matrices apply on the
// right: pre-activation = q * w_in + h_prev * w_rec + bias.
struct CellParams {
  CellKind kind = CellKind::Gru;
  int dim = 0;
  std::vector<Eigen::MatrixXd> w_in;
  std::vector<Eigen::MatrixXd> w_rec;
  std::vector<Eigen::MatrixXd> b;  // d x 1 each

  int gate_count() const { return kind == CellKind::Gru ? 3 : 4; }
  void init(CellKind k, int d, Rng& rng);
  std::int64_t parameter_count() const;
};

struct CellGrads {
  std::vector<Eigen::MatrixXd> w_in;
  std::vector<Eigen::MatrixXd> w_rec;
  std::vector<Eigen::MatrixXd> b;

  void init_like(const CellParams& p);
  void zero();
};

// activations one backward pass needs, rows = active batch rows
struct CellStepTrace {
  Eigen::MatrixXd z, r, rh, hbar;    // gru
  Eigen::MatrixXd i, f, o, g, tanh_c;  // lstm
};

// q, h_prev (and c_prev for lstm) are n x d. Writes h_out (and c_out).
void cell_forward(const CellParams& p, const Eigen::MatrixXd& q,
                  const Eigen::MatrixXd& h_prev, const Eigen::MatrixXd& c_prev,
                  Eigen::MatrixXd* h_out, Eigen::MatrixXd* c_out,
                  CellStepTrace* trace);

// dh is the full gradient on this step's h (output plus recurrent carry).
// dc_inout carries the lstm cell-state gradient: read as the incoming
// carry, overwritten with the gradient on c_prev.
void cell_backward(const CellParams& p, const CellStepTrace& trace,
                   const Eigen::MatrixXd& q, const Eigen::MatrixXd& h_prev,
                   const Eigen::MatrixXd& c_prev, const Eigen::MatrixXd& dh,
                   Eigen::MatrixXd* dc_inout, Eigen::MatrixXd* dq,
                   Eigen::MatrixXd* dh_prev, CellGrads* grads);

}  // namespace harnn
