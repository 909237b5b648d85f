#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace picante::nn {

// Row-major dense matrix of doubles. Compute stays in double so analytic
// gradients can be checked against central finite differences; checkpoint
// files store float32.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> w;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), w(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return w[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return w[static_cast<std::size_t>(r) * cols + c]; }
    void zero() { std::fill(w.begin(), w.end(), 0.0); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// A named trainable tensor with its accumulated gradient and Adam moments.
struct Param {
    std::string name;
    Mat value;
    Mat grad;
    Mat adam_m;
    Mat adam_v;

    void init_shape(const std::string& n, int r, int c) {
        name = n;
        value = Mat(r, c);
        grad = Mat(r, c);
        adam_m = Mat(r, c);
        adam_v = Mat(r, c);
    }
};

// Reverse-mode tape over matrices. Covers exactly the layers the model
// needs: embeddings, linear, layer norm, softmax attention, relu FFN,
// sigmoid gates and a cross-entropy head.
class Tape {
public:
    using Ref = int;

    Ref leaf(Mat value);
    Ref param(Param& p);

    Ref matmul(Ref a, Ref b);        // A x B
    Ref matmul_nt(Ref a, Ref b);     // A x B^T
    Ref add(Ref a, Ref b);           // same shape
    Ref add_row(Ref a, Ref bias);    // bias broadcast over rows (1 x cols)
    Ref scale(Ref a, double s);
    Ref relu(Ref a);
    Ref sigmoid(Ref a);
    Ref mul_col(Ref col, Ref a);     // (L x 1) column broadcast times (L x d)
    Ref one_minus(Ref a);            // 1 - A
    Ref mul(Ref a, Ref b);           // elementwise, same shape
    Ref layer_norm(Ref a, Ref gain, Ref bias);  // per row; gain/bias 1 x cols
    Ref softmax_rows(Ref a, bool causal_mask = false);
    Ref gather_rows(Ref table, std::vector<int> ids);
    Ref slice_cols(Ref a, int from, int to);
    Ref concat_cols(const std::vector<Ref>& parts);
    // Mean token-level cross entropy of logits (K x V) against targets.
    Ref cross_entropy(Ref logits, std::vector<int> targets);

    const Mat& value(Ref r) const { return *nodes_[r].val; }
    const Mat& gradient(Ref r) const { return nodes_[r].grad; }

    // Backpropagates from a scalar node and adds parameter gradients
    // into their Param::grad buffers, scaled by loss_scale.
    void backward(Ref loss, double loss_scale = 1.0);

private:
    enum class Op {
        Leaf, ParamRef, MatMul, MatMulNT, Add, AddRow, Scale, Relu, Sigmoid,
        MulCol, OneMinus, Mul, LayerNorm, SoftmaxRows, GatherRows, SliceCols,
        ConcatCols, CrossEntropy
    };

    struct Node {
        Op op = Op::Leaf;
        Mat owned;
        const Mat* val = nullptr;
        Mat grad;
        Mat aux;          // op-specific cache (softmax probs, ln x_hat, ...)
        Mat aux2;
        int a = -1, b = -1, c = -1;
        double scalar = 0.0;
        bool flag = false;
        std::vector<int> ids;
        std::vector<int> operands;  // for concat
        Param* external = nullptr;
    };

    // deque: nodes must not move on growth, val pointers target owned Mats
    std::deque<Node> nodes_;

    Ref push(Node&& n);
    Node& node(Ref r) { return nodes_[r]; }
};

}  // namespace picante::nn
