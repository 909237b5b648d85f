#include "picante/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace picante::nn {

namespace {

void check(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("nn: ") + what);
}

// out += A x B
void addmul(const Mat& a, const Mat& b, Mat& out) {
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = &a.w[static_cast<std::size_t>(i) * a.cols];
        double* oi = &out.w[static_cast<std::size_t>(i) * out.cols];
        for (int k = 0; k < a.cols; ++k) {
            const double av = ai[k];
            if (av == 0.0) continue;
            const double* bk = &b.w[static_cast<std::size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) oi[j] += av * bk[j];
        }
    }
}

// out += A x B^T
void addmul_nt(const Mat& a, const Mat& b, Mat& out) {
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = &a.w[static_cast<std::size_t>(i) * a.cols];
        double* oi = &out.w[static_cast<std::size_t>(i) * out.cols];
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = &b.w[static_cast<std::size_t>(j) * b.cols];
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            oi[j] += s;
        }
    }
}

// out += A^T x B
void addmul_tn(const Mat& a, const Mat& b, Mat& out) {
    for (int k = 0; k < a.rows; ++k) {
        const double* ak = &a.w[static_cast<std::size_t>(k) * a.cols];
        const double* bk = &b.w[static_cast<std::size_t>(k) * b.cols];
        for (int i = 0; i < a.cols; ++i) {
            const double av = ak[i];
            if (av == 0.0) continue;
            double* oi = &out.w[static_cast<std::size_t>(i) * out.cols];
            for (int j = 0; j < b.cols; ++j) oi[j] += av * bk[j];
        }
    }
}

}  // namespace

Tape::Ref Tape::push(Node&& n) {
    nodes_.push_back(std::move(n));
    Node& stored = nodes_.back();
    if (stored.val == nullptr) stored.val = &stored.owned;  // computed or leaf node
    stored.grad = Mat(stored.val->rows, stored.val->cols);
    return static_cast<Ref>(nodes_.size() - 1);
}

Tape::Ref Tape::leaf(Mat value) {
    Node n;
    n.op = Op::Leaf;
    n.owned = std::move(value);
    return push(std::move(n));
}

Tape::Ref Tape::param(Param& p) {
    Node n;
    n.op = Op::ParamRef;
    n.val = &p.value;
    n.external = &p;
    return push(std::move(n));
}

Tape::Ref Tape::matmul(Ref a, Ref b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    check(A.cols == B.rows, "matmul shape mismatch");
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.owned = Mat(A.rows, B.cols);
    addmul(A, B, n.owned);
    return push(std::move(n));
}

Tape::Ref Tape::matmul_nt(Ref a, Ref b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    check(A.cols == B.cols, "matmul_nt shape mismatch");
    Node n;
    n.op = Op::MatMulNT;
    n.a = a;
    n.b = b;
    n.owned = Mat(A.rows, B.rows);
    addmul_nt(A, B, n.owned);
    return push(std::move(n));
}

Tape::Ref Tape::add(Ref a, Ref b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    check(A.same_shape(B), "add shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.owned = A;
    for (std::size_t i = 0; i < n.owned.w.size(); ++i) n.owned.w[i] += B.w[i];
    return push(std::move(n));
}

Tape::Ref Tape::add_row(Ref a, Ref bias) {
    const Mat& A = value(a);
    const Mat& B = value(bias);
    check(B.rows == 1 && B.cols == A.cols, "add_row bias shape");
    Node n;
    n.op = Op::AddRow;
    n.a = a;
    n.b = bias;
    n.owned = A;
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) n.owned.at(i, j) += B.at(0, j);
    return push(std::move(n));
}

Tape::Ref Tape::scale(Ref a, double s) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.scalar = s;
    n.owned = value(a);
    for (double& v : n.owned.w) v *= s;
    return push(std::move(n));
}

Tape::Ref Tape::relu(Ref a) {
    Node n;
    n.op = Op::Relu;
    n.a = a;
    n.owned = value(a);
    for (double& v : n.owned.w) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

Tape::Ref Tape::sigmoid(Ref a) {
    Node n;
    n.op = Op::Sigmoid;
    n.a = a;
    n.owned = value(a);
    for (double& v : n.owned.w) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(n));
}

Tape::Ref Tape::mul_col(Ref col, Ref a) {
    const Mat& C = value(col);
    const Mat& A = value(a);
    check(C.cols == 1 && C.rows == A.rows, "mul_col shape");
    Node n;
    n.op = Op::MulCol;
    n.a = col;
    n.b = a;
    n.owned = A;
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) n.owned.at(i, j) *= C.at(i, 0);
    return push(std::move(n));
}

Tape::Ref Tape::one_minus(Ref a) {
    Node n;
    n.op = Op::OneMinus;
    n.a = a;
    n.owned = value(a);
    for (double& v : n.owned.w) v = 1.0 - v;
    return push(std::move(n));
}

Tape::Ref Tape::mul(Ref a, Ref b) {
    const Mat& A = value(a);
    const Mat& B = value(b);
    check(A.same_shape(B), "mul shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.owned = A;
    for (std::size_t i = 0; i < n.owned.w.size(); ++i) n.owned.w[i] *= B.w[i];
    return push(std::move(n));
}

Tape::Ref Tape::layer_norm(Ref a, Ref gain, Ref bias) {
    const Mat& A = value(a);
    const Mat& G = value(gain);
    const Mat& B = value(bias);
    check(G.rows == 1 && G.cols == A.cols && B.rows == 1 && B.cols == A.cols, "layer_norm shape");
    constexpr double eps = 1e-5;
    Node n;
    n.op = Op::LayerNorm;
    n.a = a;
    n.b = gain;
    n.c = bias;
    n.owned = Mat(A.rows, A.cols);
    n.aux = Mat(A.rows, A.cols);  // x_hat
    n.aux2 = Mat(A.rows, 1);      // inv_std
    for (int i = 0; i < A.rows; ++i) {
        double mean = 0.0;
        for (int j = 0; j < A.cols; ++j) mean += A.at(i, j);
        mean /= A.cols;
        double var = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            const double d = A.at(i, j) - mean;
            var += d * d;
        }
        var /= A.cols;
        const double inv = 1.0 / std::sqrt(var + eps);
        n.aux2.at(i, 0) = inv;
        for (int j = 0; j < A.cols; ++j) {
            const double xh = (A.at(i, j) - mean) * inv;
            n.aux.at(i, j) = xh;
            n.owned.at(i, j) = xh * G.at(0, j) + B.at(0, j);
        }
    }
    return push(std::move(n));
}

Tape::Ref Tape::softmax_rows(Ref a, bool causal_mask) {
    const Mat& A = value(a);
    Node n;
    n.op = Op::SoftmaxRows;
    n.a = a;
    n.flag = causal_mask;
    n.owned = Mat(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        const int limit = causal_mask ? std::min(i + 1, A.cols) : A.cols;
        double mx = -1e300;
        for (int j = 0; j < limit; ++j) mx = std::max(mx, A.at(i, j));
        double z = 0.0;
        for (int j = 0; j < limit; ++j) z += std::exp(A.at(i, j) - mx);
        for (int j = 0; j < limit; ++j) n.owned.at(i, j) = std::exp(A.at(i, j) - mx) / z;
        for (int j = limit; j < A.cols; ++j) n.owned.at(i, j) = 0.0;
    }
    return push(std::move(n));
}

Tape::Ref Tape::gather_rows(Ref table, std::vector<int> ids) {
    const Mat& T = value(table);
    for (int id : ids) check(id >= 0 && id < T.rows, "gather index out of range");
    Node n;
    n.op = Op::GatherRows;
    n.a = table;
    n.ids = std::move(ids);
    n.owned = Mat(static_cast<int>(n.ids.size()), T.cols);
    for (std::size_t i = 0; i < n.ids.size(); ++i)
        for (int j = 0; j < T.cols; ++j) n.owned.at(static_cast<int>(i), j) = T.at(n.ids[i], j);
    return push(std::move(n));
}

Tape::Ref Tape::slice_cols(Ref a, int from, int to) {
    const Mat& A = value(a);
    check(from >= 0 && to <= A.cols && from < to, "slice_cols range");
    Node n;
    n.op = Op::SliceCols;
    n.a = a;
    n.scalar = from;
    n.owned = Mat(A.rows, to - from);
    for (int i = 0; i < A.rows; ++i)
        for (int j = from; j < to; ++j) n.owned.at(i, j - from) = A.at(i, j);
    return push(std::move(n));
}

Tape::Ref Tape::concat_cols(const std::vector<Ref>& parts) {
    check(!parts.empty(), "concat_cols empty");
    int cols = 0;
    const int rows = value(parts[0]).rows;
    for (Ref r : parts) {
        check(value(r).rows == rows, "concat_cols row mismatch");
        cols += value(r).cols;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.operands = parts;
    n.owned = Mat(rows, cols);
    int off = 0;
    for (Ref r : parts) {
        const Mat& P = value(r);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < P.cols; ++j) n.owned.at(i, off + j) = P.at(i, j);
        off += P.cols;
    }
    return push(std::move(n));
}

Tape::Ref Tape::cross_entropy(Ref logits, std::vector<int> targets) {
    const Mat& L = value(logits);
    check(static_cast<int>(targets.size()) == L.rows, "cross_entropy target count");
    for (int t : targets) check(t >= 0 && t < L.cols, "cross_entropy target range");
    Node n;
    n.op = Op::CrossEntropy;
    n.a = logits;
    n.ids = std::move(targets);
    n.aux = Mat(L.rows, L.cols);  // softmax probabilities
    double loss = 0.0;
    for (int i = 0; i < L.rows; ++i) {
        double mx = -1e300;
        for (int j = 0; j < L.cols; ++j) mx = std::max(mx, L.at(i, j));
        double z = 0.0;
        for (int j = 0; j < L.cols; ++j) z += std::exp(L.at(i, j) - mx);
        for (int j = 0; j < L.cols; ++j) n.aux.at(i, j) = std::exp(L.at(i, j) - mx) / z;
        loss -= std::log(std::max(n.aux.at(i, n.ids[i]), 1e-300));
    }
    n.owned = Mat(1, 1);
    n.owned.at(0, 0) = loss / L.rows;
    return push(std::move(n));
}

void Tape::backward(Ref loss, double loss_scale) {
    check(value(loss).rows == 1 && value(loss).cols == 1, "backward needs scalar loss");
    node(loss).grad.at(0, 0) = loss_scale;

    for (int r = loss; r >= 0; --r) {
        Node& n = nodes_[r];
        const Mat& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::ParamRef:
                break;
            case Op::MatMul:
                addmul_nt(g, *node(n.b).val, node(n.a).grad);
                addmul_tn(*node(n.a).val, g, node(n.b).grad);
                break;
            case Op::MatMulNT:
                addmul(g, *node(n.b).val, node(n.a).grad);
                addmul_tn(g, *node(n.a).val, node(n.b).grad);
                break;
            case Op::Add:
                for (std::size_t i = 0; i < g.w.size(); ++i) {
                    node(n.a).grad.w[i] += g.w[i];
                    node(n.b).grad.w[i] += g.w[i];
                }
                break;
            case Op::AddRow: {
                Mat& ga = node(n.a).grad;
                Mat& gb = node(n.b).grad;
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) {
                        ga.at(i, j) += g.at(i, j);
                        gb.at(0, j) += g.at(i, j);
                    }
                break;
            }
            case Op::Scale:
                for (std::size_t i = 0; i < g.w.size(); ++i)
                    node(n.a).grad.w[i] += n.scalar * g.w[i];
                break;
            case Op::Relu: {
                const Mat& x = *node(n.a).val;
                for (std::size_t i = 0; i < g.w.size(); ++i)
                    if (x.w[i] > 0.0) node(n.a).grad.w[i] += g.w[i];
                break;
            }
            case Op::Sigmoid: {
                const Mat& y = *n.val;
                for (std::size_t i = 0; i < g.w.size(); ++i)
                    node(n.a).grad.w[i] += g.w[i] * y.w[i] * (1.0 - y.w[i]);
                break;
            }
            case Op::MulCol: {
                const Mat& c = *node(n.a).val;
                const Mat& x = *node(n.b).val;
                Mat& gc = node(n.a).grad;
                Mat& gx = node(n.b).grad;
                for (int i = 0; i < g.rows; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < g.cols; ++j) {
                        acc += g.at(i, j) * x.at(i, j);
                        gx.at(i, j) += g.at(i, j) * c.at(i, 0);
                    }
                    gc.at(i, 0) += acc;
                }
                break;
            }
            case Op::OneMinus:
                for (std::size_t i = 0; i < g.w.size(); ++i) node(n.a).grad.w[i] -= g.w[i];
                break;
            case Op::Mul: {
                const Mat& xa = *node(n.a).val;
                const Mat& xb = *node(n.b).val;
                for (std::size_t i = 0; i < g.w.size(); ++i) {
                    node(n.a).grad.w[i] += g.w[i] * xb.w[i];
                    node(n.b).grad.w[i] += g.w[i] * xa.w[i];
                }
                break;
            }
            case Op::LayerNorm: {
                const Mat& gain = *node(n.b).val;
                Mat& gx = node(n.a).grad;
                Mat& gg = node(n.b).grad;
                Mat& gb = node(n.c).grad;
                const int cols = g.cols;
                for (int i = 0; i < g.rows; ++i) {
                    const double inv = n.aux2.at(i, 0);
                    double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                    for (int j = 0; j < cols; ++j) {
                        const double dxh = g.at(i, j) * gain.at(0, j);
                        mean_dxh += dxh;
                        mean_dxh_xh += dxh * n.aux.at(i, j);
                        gg.at(0, j) += g.at(i, j) * n.aux.at(i, j);
                        gb.at(0, j) += g.at(i, j);
                    }
                    mean_dxh /= cols;
                    mean_dxh_xh /= cols;
                    for (int j = 0; j < cols; ++j) {
                        const double dxh = g.at(i, j) * gain.at(0, j);
                        gx.at(i, j) += inv * (dxh - mean_dxh - n.aux.at(i, j) * mean_dxh_xh);
                    }
                }
                break;
            }
            case Op::SoftmaxRows: {
                const Mat& y = *n.val;
                Mat& gx = node(n.a).grad;
                for (int i = 0; i < g.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * y.at(i, j);
                    for (int j = 0; j < g.cols; ++j)
                        gx.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
                }
                break;
            }
            case Op::GatherRows: {
                Mat& gt = node(n.a).grad;
                for (std::size_t i = 0; i < n.ids.size(); ++i)
                    for (int j = 0; j < g.cols; ++j)
                        gt.at(n.ids[i], j) += g.at(static_cast<int>(i), j);
                break;
            }
            case Op::SliceCols: {
                Mat& ga = node(n.a).grad;
                const int from = static_cast<int>(n.scalar);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) ga.at(i, from + j) += g.at(i, j);
                break;
            }
            case Op::ConcatCols: {
                int off = 0;
                for (Ref part : n.operands) {
                    Mat& gp = node(part).grad;
                    for (int i = 0; i < g.rows; ++i)
                        for (int j = 0; j < gp.cols; ++j) gp.at(i, j) += g.at(i, off + j);
                    off += gp.cols;
                }
                break;
            }
            case Op::CrossEntropy: {
                Mat& gl = node(n.a).grad;
                const double s = g.at(0, 0) / n.aux.rows;
                for (int i = 0; i < n.aux.rows; ++i)
                    for (int j = 0; j < n.aux.cols; ++j) {
                        const double p = n.aux.at(i, j);
                        gl.at(i, j) += s * (p - (j == n.ids[i] ? 1.0 : 0.0));
                    }
                break;
            }
        }
    }

    for (Node& n : nodes_) {
        if (n.external != nullptr)
            for (std::size_t i = 0; i < n.grad.w.size(); ++i) n.external->grad.w[i] += n.grad.w[i];
    }
}

}  // namespace picante::nn
