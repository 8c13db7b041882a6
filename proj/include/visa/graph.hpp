#pragma once

#include <vector>

#include "visa/mat.hpp"

namespace visa {

// Reverse-mode automatic differentiation over a flat tape of matrix ops.
//
// Usage: build the computation eagerly (values are available immediately via
// value()/scalar()), then call backward() on a scalar node. Gradients of
// param() leaves are accumulated (+=) into the caller-owned sink matrices;
// a null sink marks the parameter as frozen. Every forward result is checked
// for NaN/inf and a NumericError names the offending node, so divergence is
// caught at the op that produced it rather than three modules later.
class Graph {
  public:
    using Value = int;

    Value input(Mat v);                         // constant leaf
    Value param(const Mat& v, Mat* grad_sink);  // differentiable leaf

    // y = x * W^T + b,  x:(B,in)  W:(out,in)  b:(1,out)  ->  (B,out)
    Value linear(Value x, Value w, Value b);

    Value relu(Value x);
    Value tanh(Value x);
    Value clamp(Value x, double lo, double hi);
    Value softplus(Value x);
    Value exp(Value x);
    Value log(Value x);
    Value scale(Value x, double c);
    Value add_const(Value x, double c);

    // Elementwise on equal shapes.
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);

    Value concat_cols(Value a, Value b);
    Value slice_cols(Value x, int begin, int len);  // columns [begin, begin+len)

    // scores[i][j] = x.row(i) . y.row(j),  x:(B,E)  y:(C,E)  ->  (B,C)
    Value matmul_nt(Value x, Value y);

    // out[i] = x.row(i) . y.row(i)  ->  (B,1)
    Value row_dot(Value x, Value y);

    Value diag(Value s);                               // (B,B) -> (B,1)
    Value gather_cols(Value s, std::vector<int> col);  // out[i] = s[i][col[i]]
    Value row_logsumexp(Value s);                      // (B,C) -> (B,1)
    Value sum_cols(Value x);                           // row sums, (B,C) -> (B,1)
    Value mean_all(Value x);                           // (1,1)
    Value offdiag_mean(Value s);                       // square s, (1,1)

    // Value passes through, gradient does not.
    Value detach(Value x);

    const Mat& value(Value v) const { return nodes_[v].val; }
    double scalar(Value v) const;  // value of a 1x1 node

    // Reverse sweep from a scalar loss; accumulates into param sinks.
    void backward(Value loss);

    size_t num_nodes() const { return nodes_.size(); }

  private:
    enum class Op {
        Input, Param, Linear, Relu, Tanh, Clamp, Softplus, Exp, Log, Scale,
        AddConst, Add, Sub, Mul, ConcatCols, SliceCols, MatmulNT, RowDot, Diag,
        GatherCols, RowLogSumExp, SumCols, MeanAll, OffDiagMean, Detach,
    };

    struct Node {
        Op op;
        int a = -1, b = -1, c = -1;  // input node ids
        double c0 = 0.0, c1 = 0.0;   // op constants (clamp bounds, scale, ...)
        std::vector<int> col;        // gather indices
        Mat val;
        Mat grad;                    // allocated on demand in backward()
        Mat* sink = nullptr;
    };

    Value push(Node n);
    const Node& at(Value v) const;
    Mat& grad_of(int id);  // allocate-if-needed
    void check_finite(const Node& n, Value id) const;
    static const char* op_name(Op op);

    std::vector<Node> nodes_;
};

}  // namespace visa
