#include "harnn/cell.hpp"

namespace harnn {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::MatrixXd preact(const Eigen::MatrixXd& q, const Eigen::MatrixXd& h,
                       const CellParams& p, int gate) {
  Eigen::MatrixXd a = q * p.w_in[gate] + h * p.w_rec[gate];
  a.rowwise() += p.b[gate].col(0).transpose();
  return a;
}

}  // namespace

void CellParams::init(CellKind k, int d, Rng& rng) {
  kind = k;
  dim = d;
  w_in.assign(gate_count(), Eigen::MatrixXd(d, d));
  w_rec.assign(gate_count(), Eigen::MatrixXd(d, d));
  b.assign(gate_count(), Eigen::MatrixXd::Zero(d, 1));
  constexpr double kScale = 0.05;
  for (int g = 0; g < gate_count(); ++g) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) w_in[g](r, c) = rng.uniform(-kScale, kScale);
    }
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) w_rec[g](r, c) = rng.uniform(-kScale, kScale);
    }
  }
}

std::int64_t CellParams::parameter_count() const {
  return static_cast<std::int64_t>(gate_count()) * (2LL * dim * dim + dim);
}

void CellGrads::init_like(const CellParams& p) {
  w_in.assign(p.gate_count(), Eigen::MatrixXd::Zero(p.dim, p.dim));
  w_rec.assign(p.gate_count(), Eigen::MatrixXd::Zero(p.dim, p.dim));
  b.assign(p.gate_count(), Eigen::MatrixXd::Zero(p.dim, 1));
}

void CellGrads::zero() {
  for (auto& m : w_in) m.setZero();
  for (auto& m : w_rec) m.setZero();
  for (auto& m : b) m.setZero();
}

void cell_forward(const CellParams& p, const Eigen::MatrixXd& q,
                  const Eigen::MatrixXd& h_prev, const Eigen::MatrixXd& c_prev,
                  Eigen::MatrixXd* h_out, Eigen::MatrixXd* c_out,
                  CellStepTrace* trace) {
  if (p.kind == CellKind::Gru) {
    const Eigen::MatrixXd z = sigmoid(preact(q, h_prev, p, 0));
    const Eigen::MatrixXd r = sigmoid(preact(q, h_prev, p, 1));
    const Eigen::MatrixXd rh = (r.array() * h_prev.array()).matrix();
    const Eigen::MatrixXd hbar = preact(q, rh, p, 2).array().tanh().matrix();
    *h_out = ((1.0 - z.array()) * h_prev.array() + z.array() * hbar.array())
                 .matrix();
    if (trace) {
      trace->z = z;
      trace->r = r;
      trace->rh = rh;
      trace->hbar = hbar;
    }
  } else {
    const Eigen::MatrixXd i = sigmoid(preact(q, h_prev, p, 0));
    const Eigen::MatrixXd f = sigmoid(preact(q, h_prev, p, 1));
    const Eigen::MatrixXd o = sigmoid(preact(q, h_prev, p, 2));
    const Eigen::MatrixXd g = preact(q, h_prev, p, 3).array().tanh().matrix();
    const Eigen::MatrixXd c =
        (f.array() * c_prev.array() + i.array() * g.array()).matrix();
    const Eigen::MatrixXd tc = c.array().tanh().matrix();
    *h_out = (o.array() * tc.array()).matrix();
    *c_out = c;
    if (trace) {
      trace->i = i;
      trace->f = f;
      trace->o = o;
      trace->g = g;
      trace->tanh_c = tc;
    }
  }
}

void cell_backward(const CellParams& p, const CellStepTrace& trace,
                   const Eigen::MatrixXd& q, const Eigen::MatrixXd& h_prev,
                   const Eigen::MatrixXd& c_prev, const Eigen::MatrixXd& dh,
                   Eigen::MatrixXd* dc_inout, Eigen::MatrixXd* dq,
                   Eigen::MatrixXd* dh_prev, CellGrads* grads) {
  if (p.kind == CellKind::Gru) {
    const auto& z = trace.z;
    const auto& r = trace.r;
    const auto& hbar = trace.hbar;

    const Eigen::MatrixXd dhbar = (dh.array() * z.array()).matrix();
    const Eigen::MatrixXd dz =
        (dh.array() * (hbar.array() - h_prev.array())).matrix();
    const Eigen::MatrixXd dah =
        (dhbar.array() * (1.0 - hbar.array().square())).matrix();
    const Eigen::MatrixXd daz =
        (dz.array() * z.array() * (1.0 - z.array())).matrix();
    const Eigen::MatrixXd drh = dah * p.w_rec[2].transpose();
    const Eigen::MatrixXd dr = (drh.array() * h_prev.array()).matrix();
    const Eigen::MatrixXd dar =
        (dr.array() * r.array() * (1.0 - r.array())).matrix();

    *dh_prev = (dh.array() * (1.0 - z.array()) + drh.array() * r.array())
                   .matrix() +
               daz * p.w_rec[0].transpose() + dar * p.w_rec[1].transpose();
    *dq = daz * p.w_in[0].transpose() + dar * p.w_in[1].transpose() +
          dah * p.w_in[2].transpose();

    grads->w_in[0] += q.transpose() * daz;
    grads->w_in[1] += q.transpose() * dar;
    grads->w_in[2] += q.transpose() * dah;
    grads->w_rec[0] += h_prev.transpose() * daz;
    grads->w_rec[1] += h_prev.transpose() * dar;
    grads->w_rec[2] += trace.rh.transpose() * dah;
    grads->b[0] += daz.colwise().sum().transpose();
    grads->b[1] += dar.colwise().sum().transpose();
    grads->b[2] += dah.colwise().sum().transpose();
  } else {
    const auto& i = trace.i;
    const auto& f = trace.f;
    const auto& o = trace.o;
    const auto& g = trace.g;
    const auto& tc = trace.tanh_c;

    const Eigen::MatrixXd d_o = (dh.array() * tc.array()).matrix();
    const Eigen::MatrixXd dc =
        (dc_inout->array() + dh.array() * o.array() * (1.0 - tc.array().square()))
            .matrix();
    const Eigen::MatrixXd df = (dc.array() * c_prev.array()).matrix();
    const Eigen::MatrixXd di = (dc.array() * g.array()).matrix();
    const Eigen::MatrixXd dg = (dc.array() * i.array()).matrix();
    *dc_inout = (dc.array() * f.array()).matrix();

    const Eigen::MatrixXd dai =
        (di.array() * i.array() * (1.0 - i.array())).matrix();
    const Eigen::MatrixXd daf =
        (df.array() * f.array() * (1.0 - f.array())).matrix();
    const Eigen::MatrixXd dao =
        (d_o.array() * o.array() * (1.0 - o.array())).matrix();
    const Eigen::MatrixXd dag = (dg.array() * (1.0 - g.array().square())).matrix();

    *dq = dai * p.w_in[0].transpose() + daf * p.w_in[1].transpose() +
          dao * p.w_in[2].transpose() + dag * p.w_in[3].transpose();
    *dh_prev = dai * p.w_rec[0].transpose() + daf * p.w_rec[1].transpose() +
               dao * p.w_rec[2].transpose() + dag * p.w_rec[3].transpose();

    const Eigen::MatrixXd* das[4] = {&dai, &daf, &dao, &dag};
    for (int gate = 0; gate < 4; ++gate) {
      grads->w_in[gate] += q.transpose() * (*das[gate]);
      grads->w_rec[gate] += h_prev.transpose() * (*das[gate]);
      grads->b[gate] += das[gate]->colwise().sum().transpose();
    }
  }
}

}  // namespace harnn
