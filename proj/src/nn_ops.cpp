// Copyright 2026 The TFCodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tfcodec/nn_ops.hpp"

#include <cmath>

#include "tfcodec/detmath.hpp"

namespace tfcodec {
namespace ad {

namespace {

// Gathers one batch item of (Cin,F,T) into columns (Cin*KF*KT, Fo*To).
// fi = fo*sf - pf + kf, ti = to*st - ptl + kt.
void im2col_2d(const double* x, long Cin, long F, long T, long KF, long KT, long sf, long pf,
               long Fo, long st, long ptl, long To, double* col) {
  const long cols = Fo * To;
  long row = 0;
  for (long ci = 0; ci < Cin; ++ci) {
    const double* xc = x + ci * F * T;
    for (long kf = 0; kf < KF; ++kf) {
      for (long kt = 0; kt < KT; ++kt, ++row) {
        double* dst = col + row * cols;
        for (long fo = 0; fo < Fo; ++fo) {
          const long fi = fo * sf - pf + kf;
          double* d = dst + fo * To;
          if (fi < 0 || fi >= F) {
            for (long t = 0; t < To; ++t) d[t] = 0.0;
            continue;
          }
          const double* s = xc + fi * T;
          for (long to = 0; to < To; ++to) {
            const long ti = to * st - ptl + kt;
            d[to] = (ti >= 0 && ti < T) ? s[ti] : 0.0;
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col_2d.
void col2im_2d(const double* col, long Cin, long F, long T, long KF, long KT, long sf, long pf,
               long Fo, long st, long ptl, long To, double* gx) {
  const long cols = Fo * To;
  long row = 0;
  for (long ci = 0; ci < Cin; ++ci) {
    double* gc = gx + ci * F * T;
    for (long kf = 0; kf < KF; ++kf) {
      for (long kt = 0; kt < KT; ++kt, ++row) {
        const double* src = col + row * cols;
        for (long fo = 0; fo < Fo; ++fo) {
          const long fi = fo * sf - pf + kf;
          if (fi < 0 || fi >= F) continue;
          double* d = gc + fi * T;
          const double* s = src + fo * To;
          for (long to = 0; to < To; ++to) {
            const long ti = to * st - ptl + kt;
            if (ti >= 0 && ti < T) d[ti] += s[to];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, long stride_f, long pad_f, long stride_t,
           long pad_t_left, long pad_t_right) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 4 || wv.rank() != 4) throw TensorError("conv2d: rank mismatch");
  const long B = xv.dim(0), Cin = xv.dim(1), F = xv.dim(2), T = xv.dim(3);
  const long Cout = wv.dim(0), KF = wv.dim(2), KT = wv.dim(3);
  if (wv.dim(1) != Cin) throw TensorError("conv2d: channel mismatch");
  if (b.size() != Cout) throw TensorError("conv2d: bias mismatch");
  if (pad_t_left < 0) pad_t_left = KT - 1;  // causal default
  const long Fo = (F + 2 * pad_f - KF) / stride_f + 1;
  const long To = (T + pad_t_left + pad_t_right - KT) / stride_t + 1;
  if (Fo < 1 || To < 1) throw TensorError("conv2d: empty output");

  const long rows = Cin * KF * KT, cols = Fo * To;
  Tensor out({B, Cout, Fo, To});
  {
    Tensor col({rows, cols});
    for (long bi = 0; bi < B; ++bi) {
      im2col_2d(xv.data() + bi * Cin * F * T, Cin, F, T, KF, KT, stride_f, pad_f, Fo, stride_t,
                pad_t_left, To, col.data());
      MatMap(out.data() + bi * Cout * cols, Cout, cols).noalias() =
          ConstMatMap(wv.data(), Cout, rows) * col.mat(rows, cols);
    }
    for (long bi = 0; bi < B; ++bi)
      for (long co = 0; co < Cout; ++co)
        VecMap(out.data() + (bi * Cout + co) * cols, cols) += b.value()[co];
  }

  return make_op(std::move(out), {x, w, b},
                 [x, w, b, B, Cin, F, T, Cout, KF, KT, stride_f, pad_f, Fo, stride_t, pad_t_left,
                  To, rows, cols](Node& n) mutable {
                   Tensor col({rows, cols});
                   for (long bi = 0; bi < B; ++bi) {
                     const double* gout = n.grad.data() + bi * Cout * cols;
                     if (w.requires_grad() || x.requires_grad())
                       im2col_2d(x.value().data() + bi * Cin * F * T, Cin, F, T, KF, KT, stride_f,
                                 pad_f, Fo, stride_t, pad_t_left, To, col.data());
                     if (w.requires_grad())
                       w.node()->ensure_grad().mat(Cout, rows).noalias() +=
                           ConstMatMap(gout, Cout, cols) * col.mat(rows, cols).transpose();
                     if (x.requires_grad()) {
                       Tensor gcol({rows, cols});
                       gcol.mat(rows, cols).noalias() =
                           w.value().mat(Cout, rows).transpose() * ConstMatMap(gout, Cout, cols);
                       col2im_2d(gcol.data(), Cin, F, T, KF, KT, stride_f, pad_f, Fo, stride_t,
                                 pad_t_left, To, x.node()->ensure_grad().data() + bi * Cin * F * T);
                     }
                     if (b.requires_grad()) {
                       double* gb = b.node()->ensure_grad().data();
                       for (long co = 0; co < Cout; ++co)
                         gb[co] += ConstVecMap(gout + co * cols, cols).sum();
                     }
                   }
                 });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, long stride_f, long pad_f,
                     long outpad_f) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 4 || wv.rank() != 4) throw TensorError("conv_transpose2d: rank mismatch");
  const long B = xv.dim(0), Cin = xv.dim(1), F = xv.dim(2), T = xv.dim(3);
  const long Cout = wv.dim(1), KF = wv.dim(2), KT = wv.dim(3);
  if (wv.dim(0) != Cin) throw TensorError("conv_transpose2d: channel mismatch");
  const long Fo = (F - 1) * stride_f - 2 * pad_f + KF + outpad_f;
  if (Fo < 1) throw TensorError("conv_transpose2d: empty frequency output");

  const long rows = Cout * KF * KT, cols = F * T;
  // col = W^T x, scattered to the output grid.
  auto scatter = [=](const double* col, double* y) {
    long row = 0;
    for (long co = 0; co < Cout; ++co) {
      double* yc = y + co * Fo * T;
      for (long kf = 0; kf < KF; ++kf) {
        for (long kt = 0; kt < KT; ++kt, ++row) {
          const double* src = col + row * cols;
          for (long fi = 0; fi < F; ++fi) {
            const long fo = fi * stride_f - pad_f + kf;
            if (fo < 0 || fo >= Fo) continue;
            double* d = yc + fo * T;
            const double* s = src + fi * T;
            // input frame t' lands on output frame t'+kt (causal)
            for (long t = 0; t + kt < T; ++t) d[t + kt] += s[t];
          }
        }
      }
    }
  };
  auto gather = [=](const double* gy, double* col) {
    long row = 0;
    for (long co = 0; co < Cout; ++co) {
      const double* gc = gy + co * Fo * T;
      for (long kf = 0; kf < KF; ++kf) {
        for (long kt = 0; kt < KT; ++kt, ++row) {
          double* dst = col + row * cols;
          for (long fi = 0; fi < F; ++fi) {
            const long fo = fi * stride_f - pad_f + kf;
            double* d = dst + fi * T;
            if (fo < 0 || fo >= Fo) {
              for (long t = 0; t < T; ++t) d[t] = 0.0;
              continue;
            }
            const double* s = gc + fo * T;
            for (long t = 0; t < T; ++t) d[t] = (t + kt < T) ? s[t + kt] : 0.0;
          }
        }
      }
    }
  };

  Tensor out({B, Cout, Fo, T});
  {
    Tensor col({rows, cols});
    for (long bi = 0; bi < B; ++bi) {
      col.mat(rows, cols).noalias() = ConstMatMap(wv.data(), Cin, rows).transpose() *
                                      ConstMatMap(xv.data() + bi * Cin * cols, Cin, cols);
      scatter(col.data(), out.data() + bi * Cout * Fo * T);
    }
    for (long bi = 0; bi < B; ++bi)
      for (long co = 0; co < Cout; ++co)
        VecMap(out.data() + (bi * Cout + co) * Fo * T, Fo * T) += b.value()[co];
  }

  return make_op(std::move(out), {x, w, b},
                 [x, w, b, B, Cin, F, T, Cout, Fo, rows, cols, gather](Node& n) mutable {
                   Tensor gcol({rows, cols});
                   for (long bi = 0; bi < B; ++bi) {
                     const double* gy = n.grad.data() + bi * Cout * Fo * T;
                     gather(gy, gcol.data());
                     if (x.requires_grad())
                       MatMap(x.node()->ensure_grad().data() + bi * Cin * cols, Cin, cols)
                           .noalias() += w.value().mat(Cin, rows) * gcol.mat(rows, cols);
                     if (w.requires_grad())
                       w.node()->ensure_grad().mat(Cin, rows).noalias() +=
                           ConstMatMap(x.value().data() + bi * Cin * cols, Cin, cols) *
                           gcol.mat(rows, cols).transpose();
                     if (b.requires_grad()) {
                       double* gb = b.node()->ensure_grad().data();
                       for (long co = 0; co < Cout; ++co)
                         gb[co] += ConstVecMap(gy + co * Fo * T, Fo * T).sum();
                     }
                   }
                 });
}

Var conv1d(const Var& x, const Var& w, const Var& b, long dilation, long groups) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 3 || wv.rank() != 3) throw TensorError("conv1d: rank mismatch");
  const long B = xv.dim(0), Cin = xv.dim(1), T = xv.dim(2);
  const long Cout = wv.dim(0), Cg = wv.dim(1), K = wv.dim(2);
  if (Cin % groups != 0 || Cout % groups != 0 || Cg != Cin / groups)
    throw TensorError("conv1d: group mismatch");
  if (b.size() != Cout) throw TensorError("conv1d: bias mismatch");
  const long CinG = Cin / groups, CoutG = Cout / groups;

  Tensor out({B, Cout, T});
  // y[t] = sum_k w[k] * x[t - d*(K-1-k)]
  auto run_fwd = [=](const Tensor& xin, const Tensor& win, Tensor& y) {
    for (long bi = 0; bi < B; ++bi)
      for (long g = 0; g < groups; ++g)
        for (long co = 0; co < CoutG; ++co) {
          double* yo = y.data() + (bi * Cout + g * CoutG + co) * T;
          const double bias = b.value()[g * CoutG + co];
          for (long t = 0; t < T; ++t) yo[t] = bias;
          for (long ci = 0; ci < CinG; ++ci) {
            const double* xi = xin.data() + (bi * Cin + g * CinG + ci) * T;
            const double* wk = win.data() + ((g * CoutG + co) * CinG + ci) * K;
            for (long k = 0; k < K; ++k) {
              const long lag = dilation * (K - 1 - k);
              const double wv_ = wk[k];
              for (long t = lag; t < T; ++t) yo[t] += wv_ * xi[t - lag];
            }
          }
        }
  };
  run_fwd(xv, wv, out);

  return make_op(std::move(out), {x, w, b},
                 [x, w, b, B, Cin, T, Cout, K, dilation, groups, CinG, CoutG](Node& n) mutable {
                   for (long bi = 0; bi < B; ++bi)
                     for (long g = 0; g < groups; ++g)
                       for (long co = 0; co < CoutG; ++co) {
                         const double* gy = n.grad.data() + (bi * Cout + g * CoutG + co) * T;
                         if (b.requires_grad())
                           b.node()->ensure_grad()[g * CoutG + co] += ConstVecMap(gy, T).sum();
                         for (long ci = 0; ci < CinG; ++ci) {
                           const double* xi =
                               x.value().data() + (bi * Cin + g * CinG + ci) * T;
                           const double* wk =
                               w.value().data() + ((g * CoutG + co) * CinG + ci) * K;
                           double* gw =
                               w.requires_grad()
                                   ? w.node()->ensure_grad().data() +
                                         ((g * CoutG + co) * CinG + ci) * K
                                   : nullptr;
                           double* gx = x.requires_grad()
                                            ? x.node()->ensure_grad().data() +
                                                  (bi * Cin + g * CinG + ci) * T
                                            : nullptr;
                           for (long k = 0; k < K; ++k) {
                             const long lag = dilation * (K - 1 - k);
                             if (gw) {
                               double s = 0.0;
                               for (long t = lag; t < T; ++t) s += gy[t] * xi[t - lag];
                               gw[k] += s;
                             }
                             if (gx) {
                               const double wv_ = wk[k];
                               for (long t = lag; t < T; ++t) gx[t - lag] += wv_ * gy[t];
                             }
                           }
                         }
                       }
                 });
}

Var gru(const Var& x, const Var& w_ih, const Var& w_hh, const Var& b_ih, const Var& b_hh) {
  const Tensor& xv = x.value();
  if (xv.rank() != 3) throw TensorError("gru: input must be (B,C,T)");
  const long B = xv.dim(0), Cin = xv.dim(1), T = xv.dim(2);
  const long H3 = w_ih.dim(0), H = w_hh.dim(1);
  if (H3 != 3 * H || w_ih.dim(1) != Cin || w_hh.dim(0) != 3 * H)
    throw TensorError("gru: weight shapes inconsistent");

  // Input contribution for all t at once, per batch item: (3H,T).
  auto gi_all = std::make_shared<Tensor>(Tensor({B, 3 * H, T}));
  for (long bi = 0; bi < B; ++bi)
    MatMap(gi_all->data() + bi * 3 * H * T, 3 * H, T).noalias() =
        w_ih.value().mat(3 * H, Cin) * ConstMatMap(xv.data() + bi * Cin * T, Cin, T);

  // Sequential recurrence, batched over B. States stored (T,*,B).
  auto r_st = std::make_shared<Tensor>(Tensor({T, H, B}));
  auto z_st = std::make_shared<Tensor>(Tensor({T, H, B}));
  auto n_st = std::make_shared<Tensor>(Tensor({T, H, B}));
  auto ghn_st = std::make_shared<Tensor>(Tensor({T, H, B}));
  auto h_st = std::make_shared<Tensor>(Tensor({T + 1, H, B}));  // h_st[0] = 0

  Tensor gh({3 * H, B});
  for (long t = 0; t < T; ++t) {
    gh.mat(3 * H, B).noalias() =
        w_hh.value().mat(3 * H, H) * ConstMatMap(h_st->data() + t * H * B, H, B);
    double* rp = r_st->data() + t * H * B;
    double* zp = z_st->data() + t * H * B;
    double* np = n_st->data() + t * H * B;
    double* gp = ghn_st->data() + t * H * B;
    double* hprev = h_st->data() + t * H * B;
    double* hnext = h_st->data() + (t + 1) * H * B;
    for (long h = 0; h < H; ++h) {
      for (long bi = 0; bi < B; ++bi) {
        const long i = h * B + bi;
        const double gi_r = (*gi_all)[bi * 3 * H * T + h * T + t] + b_ih.value()[h];
        const double gi_z = (*gi_all)[bi * 3 * H * T + (H + h) * T + t] + b_ih.value()[H + h];
        const double gi_n =
            (*gi_all)[bi * 3 * H * T + (2 * H + h) * T + t] + b_ih.value()[2 * H + h];
        const double gh_r = gh[h * B + bi] + b_hh.value()[h];
        const double gh_z = gh[(H + h) * B + bi] + b_hh.value()[H + h];
        const double gh_n = gh[(2 * H + h) * B + bi] + b_hh.value()[2 * H + h];
        const double r = detmath::sigmoid(gi_r + gh_r);
        const double z = detmath::sigmoid(gi_z + gh_z);
        const double nn = detmath::tanh(gi_n + r * gh_n);
        rp[i] = r;
        zp[i] = z;
        np[i] = nn;
        gp[i] = gh_n;
        hnext[i] = (1.0 - z) * nn + z * hprev[i];
      }
    }
  }

  Tensor out({B, H, T});
  for (long bi = 0; bi < B; ++bi)
    for (long h = 0; h < H; ++h)
      for (long t = 0; t < T; ++t)
        out.data()[(bi * H + h) * T + t] = h_st->data()[(t + 1) * H * B + h * B + bi];

  return make_op(
      std::move(out), {x, w_ih, w_hh, b_ih, b_hh},
      [x, w_ih, w_hh, b_ih, b_hh, B, Cin, T, H, r_st, z_st, n_st, ghn_st, h_st](Node& n) mutable {
        Tensor dh({H, B});  // carried gradient dL/dh_t
        Tensor dgi({3 * H, B}), dgh({3 * H, B});
        Tensor dgi_all({B, 3 * H, T});
        const bool need_x = x.requires_grad();
        for (long t = T - 1; t >= 0; --t) {
          const double* rp = r_st->data() + t * H * B;
          const double* zp = z_st->data() + t * H * B;
          const double* np = n_st->data() + t * H * B;
          const double* gp = ghn_st->data() + t * H * B;
          const double* hprev = h_st->data() + t * H * B;
          for (long h = 0; h < H; ++h)
            for (long bi = 0; bi < B; ++bi) {
              const long i = h * B + bi;
              const double go = n.grad[(bi * H + h) * T + t];
              const double dht = dh[i] + go;
              const double r = rp[i], z = zp[i], nn = np[i], ghn = gp[i];
              const double dz = dht * (hprev[i] - nn);
              const double dn = dht * (1.0 - z);
              const double dgn_i = dn * (1.0 - nn * nn);
              const double dgn_h = dgn_i * r;
              const double dr = dgn_i * ghn;
              const double dgr = dr * r * (1.0 - r);
              const double dgz = dz * z * (1.0 - z);
              dgi[h * B + bi] = dgr;
              dgi[(H + h) * B + bi] = dgz;
              dgi[(2 * H + h) * B + bi] = dgn_i;
              dgh[h * B + bi] = dgr;
              dgh[(H + h) * B + bi] = dgz;
              dgh[(2 * H + h) * B + bi] = dgn_h;
              dh[i] = dht * z;  // plus W_hh^T dgh added below
            }
          // dh += W_hh^T * dgh
          MatMap(dh.data(), H, B).noalias() +=
              w_hh.value().mat(3 * H, H).transpose() * dgh.mat(3 * H, B);
          if (w_hh.requires_grad())
            w_hh.node()->ensure_grad().mat(3 * H, H).noalias() +=
                dgh.mat(3 * H, B) * ConstMatMap(hprev, H, B).transpose();
          if (b_hh.requires_grad()) {
            double* g = b_hh.node()->ensure_grad().data();
            for (long j = 0; j < 3 * H; ++j) g[j] += ConstVecMap(dgh.data() + j * B, B).sum();
          }
          if (b_ih.requires_grad()) {
            double* g = b_ih.node()->ensure_grad().data();
            for (long j = 0; j < 3 * H; ++j) g[j] += ConstVecMap(dgi.data() + j * B, B).sum();
          }
          // Stash dgi for the big GEMMs afterwards.
          for (long j = 0; j < 3 * H; ++j)
            for (long bi = 0; bi < B; ++bi)
              dgi_all.data()[bi * 3 * H * T + j * T + t] = dgi[j * B + bi];
        }
        for (long bi = 0; bi < B; ++bi) {
          ConstMatMap dgi_b(dgi_all.data() + bi * 3 * H * T, 3 * H, T);
          if (w_ih.requires_grad())
            w_ih.node()->ensure_grad().mat(3 * H, Cin).noalias() +=
                dgi_b * ConstMatMap(x.value().data() + bi * Cin * T, Cin, T).transpose();
          if (need_x)
            MatMap(x.node()->ensure_grad().data() + bi * Cin * T, Cin, T).noalias() +=
                w_ih.value().mat(3 * H, Cin).transpose() * dgi_b;
        }
      });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, Tensor* running_mean,
               Tensor* running_var, bool training, double momentum, double eps,
               bool update_running) {
  const Tensor& xv = x.value();
  if (xv.rank() < 2) throw TensorError("batch_norm: rank too small");
  const long B = xv.dim(0), C = xv.dim(1);
  long inner = 1;
  for (int i = 2; i < xv.rank(); ++i) inner *= xv.dim(i);
  if (gamma.size() != C || beta.size() != C) throw TensorError("batch_norm: affine mismatch");
  const long M = B * inner;

  Tensor mean({C}), var({C});
  if (training) {
    for (long c = 0; c < C; ++c) {
      double s = 0.0;
      for (long bi = 0; bi < B; ++bi) {
        const double* p = xv.data() + (bi * C + c) * inner;
        for (long i = 0; i < inner; ++i) s += p[i];
      }
      const double mu = s / M;
      double s2 = 0.0;
      for (long bi = 0; bi < B; ++bi) {
        const double* p = xv.data() + (bi * C + c) * inner;
        for (long i = 0; i < inner; ++i) s2 += (p[i] - mu) * (p[i] - mu);
      }
      mean[c] = mu;
      var[c] = s2 / M;
    }
    if (running_mean && running_var && update_running) {
      for (long c = 0; c < C; ++c) {
        (*running_mean)[c] = (1.0 - momentum) * (*running_mean)[c] + momentum * mean[c];
        (*running_var)[c] = (1.0 - momentum) * (*running_var)[c] + momentum * var[c];
      }
    }
  } else {
    if (!running_mean || !running_var) throw TensorError("batch_norm: missing running stats");
    mean.flat() = running_mean->flat();
    var.flat() = running_var->flat();
  }

  auto xhat = std::make_shared<Tensor>(Tensor(xv.shape()));
  auto istd = std::make_shared<Tensor>(Tensor({C}));
  for (long c = 0; c < C; ++c) (*istd)[c] = 1.0 / std::sqrt(var[c] + eps);
  Tensor out(xv.shape());
  for (long bi = 0; bi < B; ++bi)
    for (long c = 0; c < C; ++c) {
      const long base = (bi * C + c) * inner;
      const double mu = mean[c], is = (*istd)[c];
      const double g = gamma.value()[c], be = beta.value()[c];
      for (long i = 0; i < inner; ++i) {
        const double xh = (xv.data()[base + i] - mu) * is;
        xhat->data()[base + i] = xh;
        out.data()[base + i] = g * xh + be;
      }
    }

  return make_op(std::move(out), {x, gamma, beta},
                 [x, gamma, beta, xhat, istd, B, C, inner, M, training](Node& n) mutable {
                   for (long c = 0; c < C; ++c) {
                     double sum_g = 0.0, sum_gx = 0.0;
                     for (long bi = 0; bi < B; ++bi) {
                       const long base = (bi * C + c) * inner;
                       for (long i = 0; i < inner; ++i) {
                         sum_g += n.grad[base + i];
                         sum_gx += n.grad[base + i] * xhat->data()[base + i];
                       }
                     }
                     if (gamma.requires_grad()) gamma.node()->ensure_grad()[c] += sum_gx;
                     if (beta.requires_grad()) beta.node()->ensure_grad()[c] += sum_g;
                     if (x.requires_grad()) {
                       const double gm = gamma.value()[c] * (*istd)[c];
                       const double mg = sum_g / M, mgx = sum_gx / M;
                       double* gx = x.node()->ensure_grad().data();
                       for (long bi = 0; bi < B; ++bi) {
                         const long base = (bi * C + c) * inner;
                         for (long i = 0; i < inner; ++i) {
                           const double xh = xhat->data()[base + i];
                           gx[base + i] += training
                                               ? gm * (n.grad[base + i] - mg - xh * mgx)
                                               : gm * n.grad[base + i];
                         }
                       }
                     }
                   }
                 });
}

Var instance_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4) throw TensorError("instance_norm: expects rank-4");
  const long B = xv.dim(0), C = xv.dim(1), M = xv.dim(2) * xv.dim(3);
  if (gamma.size() != C || beta.size() != C) throw TensorError("instance_norm: affine mismatch");

  auto xhat = std::make_shared<Tensor>(Tensor(xv.shape()));
  auto istd = std::make_shared<Tensor>(Tensor({B, C}));
  Tensor out(xv.shape());
  for (long bi = 0; bi < B; ++bi)
    for (long c = 0; c < C; ++c) {
      const long base = (bi * C + c) * M;
      double s = 0.0, s2 = 0.0;
      for (long i = 0; i < M; ++i) {
        s += xv.data()[base + i];
        s2 += xv.data()[base + i] * xv.data()[base + i];
      }
      const double mu = s / M;
      double v = s2 / M - mu * mu;
      if (v < 0) v = 0;
      const double is = 1.0 / std::sqrt(v + eps);
      istd->data()[bi * C + c] = is;
      const double g = gamma.value()[c], be = beta.value()[c];
      for (long i = 0; i < M; ++i) {
        const double xh = (xv.data()[base + i] - mu) * is;
        xhat->data()[base + i] = xh;
        out.data()[base + i] = g * xh + be;
      }
    }

  return make_op(std::move(out), {x, gamma, beta},
                 [x, gamma, beta, xhat, istd, B, C, M](Node& n) mutable {
                   for (long bi = 0; bi < B; ++bi)
                     for (long c = 0; c < C; ++c) {
                       const long base = (bi * C + c) * M;
                       double sum_g = 0.0, sum_gx = 0.0;
                       for (long i = 0; i < M; ++i) {
                         sum_g += n.grad[base + i];
                         sum_gx += n.grad[base + i] * xhat->data()[base + i];
                       }
                       if (gamma.requires_grad()) gamma.node()->ensure_grad()[c] += sum_gx;
                       if (beta.requires_grad()) beta.node()->ensure_grad()[c] += sum_g;
                       if (x.requires_grad()) {
                         const double gm = gamma.value()[c] * istd->data()[bi * C + c];
                         const double mg = sum_g / M, mgx = sum_gx / M;
                         double* gx = x.node()->ensure_grad().data();
                         for (long i = 0; i < M; ++i) {
                           const double xh = xhat->data()[base + i];
                           gx[base + i] += gm * (n.grad[base + i] - mg - xh * mgx);
                         }
                       }
                     }
                 });
}

Var prelu(const Var& x, const Var& alpha) {
  const Tensor& xv = x.value();
  const long A = alpha.size();
  long C = 1, outer = 1, inner = xv.size();
  if (A > 1) {
    if (xv.rank() < 2 || xv.dim(1) != A) throw TensorError("prelu: alpha/channel mismatch");
    outer = xv.dim(0);
    C = A;
    inner = xv.size() / (outer * C);
  }
  Tensor out(xv.shape());
  for (long o = 0; o < outer; ++o)
    for (long c = 0; c < C; ++c) {
      const double a = alpha.value()[A > 1 ? c : 0];
      const long base = (o * C + c) * inner;
      for (long i = 0; i < inner; ++i) {
        const double v = xv.data()[base + i];
        out.data()[base + i] = v > 0 ? v : a * v;
      }
    }
  return make_op(std::move(out), {x, alpha},
                 [x, alpha, outer, C, inner, A](Node& n) mutable {
                   for (long o = 0; o < outer; ++o)
                     for (long c = 0; c < C; ++c) {
                       const double a = alpha.value()[A > 1 ? c : 0];
                       const long base = (o * C + c) * inner;
                       double da = 0.0;
                       for (long i = 0; i < inner; ++i) {
                         const double v = x.value()[base + i];
                         const double g = n.grad[base + i];
                         if (x.requires_grad())
                           x.node()->ensure_grad()[base + i] += v > 0 ? g : a * g;
                         if (v <= 0) da += g * v;
                       }
                       if (alpha.requires_grad())
                         alpha.node()->ensure_grad()[A > 1 ? c : 0] += da;
                     }
                 });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out(x.shape());
  const long n = x.size();
  for (long i = 0; i < n; ++i) {
    const double v = x.value()[i];
    out[i] = v > 0 ? v : slope * v;
  }
  return make_op(std::move(out), {x}, [x, slope](Node& nd) mutable {
    double* g = x.node()->ensure_grad().data();
    const long cnt = x.size();
    for (long i = 0; i < cnt; ++i) g[i] += x.value()[i] > 0 ? nd.grad[i] : slope * nd.grad[i];
  });
}

Var avg_pool_last(const Var& x, long kernel, long stride) {
  const Tensor& xv = x.value();
  const long T = xv.dim(xv.rank() - 1);
  const long To = (T - kernel) / stride + 1;
  if (To < 1) throw TensorError("avg_pool_last: input too short");
  const long rows = xv.size() / T;
  std::vector<long> shape = xv.shape();
  shape.back() = To;
  Tensor out(shape);
  const double inv = 1.0 / kernel;
  for (long r = 0; r < rows; ++r)
    for (long to = 0; to < To; ++to) {
      double s = 0.0;
      for (long k = 0; k < kernel; ++k) s += xv.data()[r * T + to * stride + k];
      out.data()[r * To + to] = s * inv;
    }
  return make_op(std::move(out), {x}, [x, rows, T, To, kernel, stride, inv](Node& n) mutable {
    double* g = x.node()->ensure_grad().data();
    for (long r = 0; r < rows; ++r)
      for (long to = 0; to < To; ++to) {
        const double gv = n.grad[r * To + to] * inv;
        for (long k = 0; k < kernel; ++k) g[r * T + to * stride + k] += gv;
      }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const long R = x.dim(0), Cin = x.dim(1), Cout = w.dim(0);
  if (w.dim(1) != Cin || b.size() != Cout) throw TensorError("linear: shape mismatch");
  Tensor out({R, Cout});
  out.mat(R, Cout).noalias() = x.value().mat(R, Cin) * w.value().mat(Cout, Cin).transpose();
  for (long r = 0; r < R; ++r)
    for (long c = 0; c < Cout; ++c) out.data()[r * Cout + c] += b.value()[c];
  return make_op(std::move(out), {x, w, b}, [x, w, b, R, Cin, Cout](Node& n) mutable {
    if (x.requires_grad())
      x.node()->ensure_grad().mat(R, Cin).noalias() +=
          n.grad.mat(R, Cout) * w.value().mat(Cout, Cin);
    if (w.requires_grad())
      w.node()->ensure_grad().mat(Cout, Cin).noalias() +=
          n.grad.mat(R, Cout).transpose() * x.value().mat(R, Cin);
    if (b.requires_grad()) {
      double* g = b.node()->ensure_grad().data();
      for (long r = 0; r < R; ++r)
        for (long c = 0; c < Cout; ++c) g[c] += n.grad[r * Cout + c];
    }
  });
}

}  // namespace ad
}  // namespace tfcodec
