#include "visa/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "visa/errors.hpp"

namespace visa {

namespace {

double stable_softplus(double x) {
    // max(x,0) + log1p(exp(-|x|)) never overflows.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

const char* Graph::op_name(Op op) {
    switch (op) {
        case Op::Input: return "input";
        case Op::Param: return "param";
        case Op::Linear: return "linear";
        case Op::Relu: return "relu";
        case Op::Tanh: return "tanh";
        case Op::Clamp: return "clamp";
        case Op::Softplus: return "softplus";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Scale: return "scale";
        case Op::AddConst: return "add_const";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::ConcatCols: return "concat_cols";
        case Op::SliceCols: return "slice_cols";
        case Op::MatmulNT: return "matmul_nt";
        case Op::RowDot: return "row_dot";
        case Op::Diag: return "diag";
        case Op::GatherCols: return "gather_cols";
        case Op::RowLogSumExp: return "row_logsumexp";
        case Op::SumCols: return "sum_cols";
        case Op::MeanAll: return "mean_all";
        case Op::OffDiagMean: return "offdiag_mean";
        case Op::Detach: return "detach";
    }
    return "?";
}

void Graph::check_finite(const Node& n, Value id) const {
    if (!n.val.all_finite())
        throw NumericError("non-finite value in graph node " + std::to_string(id) + " (" +
                           op_name(n.op) + ")");
}

Graph::Value Graph::push(Node n) {
    Value id = static_cast<Value>(nodes_.size());
    check_finite(n, id);
    nodes_.push_back(std::move(n));
    return id;
}

const Graph::Node& Graph::at(Value v) const {
    if (v < 0 || v >= static_cast<Value>(nodes_.size()))
        throw InputError("graph: bad node id " + std::to_string(v));
    return nodes_[v];
}

Mat& Graph::grad_of(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat(n.val.rows, n.val.cols);
    return n.grad;
}

double Graph::scalar(Value v) const {
    const Node& n = at(v);
    if (n.val.rows != 1 || n.val.cols != 1)
        throw InputError("graph: scalar() on non-1x1 node");
    return n.val.a[0];
}

Graph::Value Graph::input(Mat v) {
    Node n;
    n.op = Op::Input;
    n.val = std::move(v);
    return push(std::move(n));
}

Graph::Value Graph::param(const Mat& v, Mat* grad_sink) {
    if (grad_sink && !grad_sink->same_shape(v))
        throw InputError("graph: param grad sink shape mismatch");
    Node n;
    n.op = Op::Param;
    n.val = v;
    n.sink = grad_sink;
    return push(std::move(n));
}

Graph::Value Graph::linear(Value x, Value w, Value b) {
    const Mat& X = at(x).val;
    const Mat& W = at(w).val;
    const Mat& B = at(b).val;
    if (X.cols != W.cols || B.rows != 1 || B.cols != W.rows)
        throw InputError("graph: linear shape mismatch");
    Node n;
    n.op = Op::Linear;
    n.a = x;
    n.b = w;
    n.c = b;
    n.val = Mat(X.rows, W.rows);
    for (int i = 0; i < X.rows; ++i) {
        const double* xi = X.row(i);
        double* yi = n.val.row(i);
        for (int o = 0; o < W.rows; ++o) yi[o] = dot(xi, W.row(o), X.cols) + B.a[o];
    }
    return push(std::move(n));
}

Graph::Value Graph::relu(Value x) {
    Node n;
    n.op = Op::Relu;
    n.a = x;
    n.val = at(x).val;
    for (double& v : n.val.a) v = std::max(v, 0.0);
    return push(std::move(n));
}

Graph::Value Graph::tanh(Value x) {
    Node n;
    n.op = Op::Tanh;
    n.a = x;
    n.val = at(x).val;
    for (double& v : n.val.a) v = std::tanh(v);
    return push(std::move(n));
}

Graph::Value Graph::clamp(Value x, double lo, double hi) {
    Node n;
    n.op = Op::Clamp;
    n.a = x;
    n.c0 = lo;
    n.c1 = hi;
    n.val = at(x).val;
    for (double& v : n.val.a) v = std::clamp(v, lo, hi);
    return push(std::move(n));
}

Graph::Value Graph::softplus(Value x) {
    Node n;
    n.op = Op::Softplus;
    n.a = x;
    n.val = at(x).val;
    for (double& v : n.val.a) v = stable_softplus(v);
    return push(std::move(n));
}

Graph::Value Graph::exp(Value x) {
    Node n;
    n.op = Op::Exp;
    n.a = x;
    n.val = at(x).val;
    for (double& v : n.val.a) v = std::exp(v);
    return push(std::move(n));
}

Graph::Value Graph::log(Value x) {
    Node n;
    n.op = Op::Log;
    n.a = x;
    n.val = at(x).val;
    for (double& v : n.val.a) v = std::log(v);
    return push(std::move(n));
}

Graph::Value Graph::scale(Value x, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = x;
    n.c0 = c;
    n.val = at(x).val;
    for (double& v : n.val.a) v *= c;
    return push(std::move(n));
}

Graph::Value Graph::add_const(Value x, double c) {
    Node n;
    n.op = Op::AddConst;
    n.a = x;
    n.c0 = c;
    n.val = at(x).val;
    for (double& v : n.val.a) v += c;
    return push(std::move(n));
}

Graph::Value Graph::add(Value a, Value b) {
    const Mat& A = at(a).val;
    const Mat& B = at(b).val;
    if (!A.same_shape(B)) throw InputError("graph: add shape mismatch");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val = A;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.a[i] += B.a[i];
    return push(std::move(n));
}

Graph::Value Graph::sub(Value a, Value b) {
    const Mat& A = at(a).val;
    const Mat& B = at(b).val;
    if (!A.same_shape(B)) throw InputError("graph: sub shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.val = A;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.a[i] -= B.a[i];
    return push(std::move(n));
}

Graph::Value Graph::mul(Value a, Value b) {
    const Mat& A = at(a).val;
    const Mat& B = at(b).val;
    if (!A.same_shape(B)) throw InputError("graph: mul shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.val = A;
    for (size_t i = 0; i < n.val.size(); ++i) n.val.a[i] *= B.a[i];
    return push(std::move(n));
}

Graph::Value Graph::concat_cols(Value a, Value b) {
    const Mat& A = at(a).val;
    const Mat& B = at(b).val;
    if (A.rows != B.rows) throw InputError("graph: concat_cols row mismatch");
    Node n;
    n.op = Op::ConcatCols;
    n.a = a;
    n.b = b;
    n.val = Mat(A.rows, A.cols + B.cols);
    for (int i = 0; i < A.rows; ++i) {
        double* out = n.val.row(i);
        std::copy(A.row(i), A.row(i) + A.cols, out);
        std::copy(B.row(i), B.row(i) + B.cols, out + A.cols);
    }
    return push(std::move(n));
}

Graph::Value Graph::slice_cols(Value x, int begin, int len) {
    const Mat& X = at(x).val;
    if (begin < 0 || len < 1 || begin + len > X.cols)
        throw InputError("graph: slice_cols range out of bounds");
    Node n;
    n.op = Op::SliceCols;
    n.a = x;
    n.c0 = begin;
    n.val = Mat(X.rows, len);
    for (int i = 0; i < X.rows; ++i)
        std::copy(X.row(i) + begin, X.row(i) + begin + len, n.val.row(i));
    return push(std::move(n));
}

Graph::Value Graph::matmul_nt(Value x, Value y) {
    const Mat& X = at(x).val;
    const Mat& Y = at(y).val;
    if (X.cols != Y.cols) throw InputError("graph: matmul_nt inner dim mismatch");
    Node n;
    n.op = Op::MatmulNT;
    n.a = x;
    n.b = y;
    n.val = Mat(X.rows, Y.rows);
    for (int i = 0; i < X.rows; ++i) {
        const double* xi = X.row(i);
        double* si = n.val.row(i);
        for (int j = 0; j < Y.rows; ++j) si[j] = dot(xi, Y.row(j), X.cols);
    }
    return push(std::move(n));
}

Graph::Value Graph::row_dot(Value x, Value y) {
    const Mat& X = at(x).val;
    const Mat& Y = at(y).val;
    if (!X.same_shape(Y)) throw InputError("graph: row_dot shape mismatch");
    Node n;
    n.op = Op::RowDot;
    n.a = x;
    n.b = y;
    n.val = Mat(X.rows, 1);
    for (int i = 0; i < X.rows; ++i) n.val.a[i] = dot(X.row(i), Y.row(i), X.cols);
    return push(std::move(n));
}

Graph::Value Graph::diag(Value s) {
    const Mat& S = at(s).val;
    if (S.rows != S.cols) throw InputError("graph: diag of non-square matrix");
    Node n;
    n.op = Op::Diag;
    n.a = s;
    n.val = Mat(S.rows, 1);
    for (int i = 0; i < S.rows; ++i) n.val.a[i] = S(i, i);
    return push(std::move(n));
}

Graph::Value Graph::gather_cols(Value s, std::vector<int> col) {
    const Mat& S = at(s).val;
    if (static_cast<int>(col.size()) != S.rows)
        throw InputError("graph: gather_cols index count mismatch");
    Node n;
    n.op = Op::GatherCols;
    n.a = s;
    n.val = Mat(S.rows, 1);
    for (int i = 0; i < S.rows; ++i) {
        if (col[i] < 0 || col[i] >= S.cols) throw InputError("graph: gather_cols index out of range");
        n.val.a[i] = S(i, col[i]);
    }
    n.col = std::move(col);
    return push(std::move(n));
}

Graph::Value Graph::row_logsumexp(Value s) {
    const Mat& S = at(s).val;
    if (S.cols < 1) throw InputError("graph: row_logsumexp on empty rows");
    Node n;
    n.op = Op::RowLogSumExp;
    n.a = s;
    n.val = Mat(S.rows, 1);
    for (int i = 0; i < S.rows; ++i) {
        const double* r = S.row(i);
        double m = r[0];
        for (int j = 1; j < S.cols; ++j) m = std::max(m, r[j]);
        double acc = 0.0;
        for (int j = 0; j < S.cols; ++j) acc += std::exp(r[j] - m);
        n.val.a[i] = m + std::log(acc);
    }
    return push(std::move(n));
}

Graph::Value Graph::sum_cols(Value x) {
    const Mat& X = at(x).val;
    Node n;
    n.op = Op::SumCols;
    n.a = x;
    n.val = Mat(X.rows, 1);
    for (int i = 0; i < X.rows; ++i) {
        double acc = 0.0;
        const double* r = X.row(i);
        for (int j = 0; j < X.cols; ++j) acc += r[j];
        n.val.a[i] = acc;
    }
    return push(std::move(n));
}

Graph::Value Graph::mean_all(Value x) {
    const Mat& X = at(x).val;
    if (X.size() == 0) throw InputError("graph: mean_all of empty matrix");
    Node n;
    n.op = Op::MeanAll;
    n.a = x;
    n.val = Mat(1, 1);
    double acc = 0.0;
    for (double v : X.a) acc += v;
    n.val.a[0] = acc / static_cast<double>(X.size());
    return push(std::move(n));
}

Graph::Value Graph::offdiag_mean(Value s) {
    const Mat& S = at(s).val;
    if (S.rows != S.cols || S.rows < 2)
        throw InputError("graph: offdiag_mean needs a square matrix with at least 2 rows");
    Node n;
    n.op = Op::OffDiagMean;
    n.a = s;
    n.val = Mat(1, 1);
    double acc = 0.0;
    for (int i = 0; i < S.rows; ++i)
        for (int j = 0; j < S.cols; ++j)
            if (i != j) acc += S(i, j);
    n.val.a[0] = acc / (static_cast<double>(S.rows) * (S.rows - 1));
    return push(std::move(n));
}

Graph::Value Graph::detach(Value x) {
    Node n;
    n.op = Op::Detach;
    n.a = x;
    n.val = at(x).val;
    return push(std::move(n));
}

void Graph::backward(Value loss) {
    const Node& top = at(loss);
    if (top.val.rows != 1 || top.val.cols != 1)
        throw InputError("graph: backward() requires a scalar loss node");
    grad_of(loss).a[0] = 1.0;

    for (int id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad.size() == 0) continue;  // not on any path to the loss
        const Mat& g = n.grad;
        switch (n.op) {
            case Op::Input:
                break;
            case Op::Param:
                if (n.sink)
                    for (size_t i = 0; i < g.size(); ++i) n.sink->a[i] += g.a[i];
                break;
            case Op::Linear: {
                const Mat& X = nodes_[n.a].val;
                const Mat& W = nodes_[n.b].val;
                Mat& dx = grad_of(n.a);
                Mat& dw = grad_of(n.b);
                Mat& db = grad_of(n.c);
                for (int i = 0; i < X.rows; ++i) {
                    const double* gi = g.row(i);
                    for (int o = 0; o < W.rows; ++o) {
                        double go = gi[o];
                        if (go == 0.0) continue;
                        axpy(go, W.row(o), dx.row(i), X.cols);
                        axpy(go, X.row(i), dw.row(o), X.cols);
                        db.a[o] += go;
                    }
                }
                break;
            }
            case Op::Relu: {
                const Mat& X = nodes_[n.a].val;
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i)
                    if (X.a[i] > 0.0) dx.a[i] += g.a[i];
                break;
            }
            case Op::Tanh: {
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i)
                    dx.a[i] += g.a[i] * (1.0 - n.val.a[i] * n.val.a[i]);
                break;
            }
            case Op::Clamp: {
                const Mat& X = nodes_[n.a].val;
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i)
                    if (X.a[i] >= n.c0 && X.a[i] <= n.c1) dx.a[i] += g.a[i];
                break;
            }
            case Op::Softplus: {
                const Mat& X = nodes_[n.a].val;
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) dx.a[i] += g.a[i] * sigmoid(X.a[i]);
                break;
            }
            case Op::Exp: {
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) dx.a[i] += g.a[i] * n.val.a[i];
                break;
            }
            case Op::Log: {
                const Mat& X = nodes_[n.a].val;
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) dx.a[i] += g.a[i] / X.a[i];
                break;
            }
            case Op::Scale: {
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) dx.a[i] += g.a[i] * n.c0;
                break;
            }
            case Op::AddConst: {
                Mat& dx = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) dx.a[i] += g.a[i];
                break;
            }
            case Op::Add: {
                Mat& da = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) da.a[i] += g.a[i];
                Mat& db = grad_of(n.b);
                for (size_t i = 0; i < g.size(); ++i) db.a[i] += g.a[i];
                break;
            }
            case Op::Sub: {
                Mat& da = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) da.a[i] += g.a[i];
                Mat& db = grad_of(n.b);
                for (size_t i = 0; i < g.size(); ++i) db.a[i] -= g.a[i];
                break;
            }
            case Op::Mul: {
                const Mat& A = nodes_[n.a].val;
                const Mat& B = nodes_[n.b].val;
                Mat& da = grad_of(n.a);
                for (size_t i = 0; i < g.size(); ++i) da.a[i] += g.a[i] * B.a[i];
                Mat& db = grad_of(n.b);
                for (size_t i = 0; i < g.size(); ++i) db.a[i] += g.a[i] * A.a[i];
                break;
            }
            case Op::ConcatCols: {
                const Mat& A = nodes_[n.a].val;
                const Mat& B = nodes_[n.b].val;
                Mat& da = grad_of(n.a);
                Mat& db = grad_of(n.b);
                for (int i = 0; i < A.rows; ++i) {
                    const double* gi = g.row(i);
                    axpy(1.0, gi, da.row(i), A.cols);
                    axpy(1.0, gi + A.cols, db.row(i), B.cols);
                }
                break;
            }
            case Op::SliceCols: {
                Mat& dx = grad_of(n.a);
                int begin = static_cast<int>(n.c0);
                for (int i = 0; i < g.rows; ++i) axpy(1.0, g.row(i), dx.row(i) + begin, g.cols);
                break;
            }
            case Op::MatmulNT: {
                const Mat& X = nodes_[n.a].val;
                const Mat& Y = nodes_[n.b].val;
                Mat& dx = grad_of(n.a);
                Mat& dy = grad_of(n.b);
                for (int i = 0; i < X.rows; ++i) {
                    const double* gi = g.row(i);
                    for (int j = 0; j < Y.rows; ++j) {
                        double gij = gi[j];
                        if (gij == 0.0) continue;
                        axpy(gij, Y.row(j), dx.row(i), X.cols);
                        axpy(gij, X.row(i), dy.row(j), X.cols);
                    }
                }
                break;
            }
            case Op::RowDot: {
                const Mat& X = nodes_[n.a].val;
                const Mat& Y = nodes_[n.b].val;
                Mat& dx = grad_of(n.a);
                Mat& dy = grad_of(n.b);
                for (int i = 0; i < X.rows; ++i) {
                    axpy(g.a[i], Y.row(i), dx.row(i), X.cols);
                    axpy(g.a[i], X.row(i), dy.row(i), X.cols);
                }
                break;
            }
            case Op::Diag: {
                Mat& ds = grad_of(n.a);
                for (int i = 0; i < ds.rows; ++i) ds(i, i) += g.a[i];
                break;
            }
            case Op::GatherCols: {
                Mat& ds = grad_of(n.a);
                for (int i = 0; i < ds.rows; ++i) ds(i, n.col[i]) += g.a[i];
                break;
            }
            case Op::RowLogSumExp: {
                const Mat& S = nodes_[n.a].val;
                Mat& ds = grad_of(n.a);
                for (int i = 0; i < S.rows; ++i) {
                    const double* si = S.row(i);
                    double* di = ds.row(i);
                    double lse = n.val.a[i];
                    for (int j = 0; j < S.cols; ++j) di[j] += g.a[i] * std::exp(si[j] - lse);
                }
                break;
            }
            case Op::SumCols: {
                Mat& dx = grad_of(n.a);
                for (int i = 0; i < dx.rows; ++i) {
                    double* di = dx.row(i);
                    for (int j = 0; j < dx.cols; ++j) di[j] += g.a[i];
                }
                break;
            }
            case Op::MeanAll: {
                Mat& dx = grad_of(n.a);
                double c = g.a[0] / static_cast<double>(dx.size());
                for (double& v : dx.a) v += c;
                break;
            }
            case Op::OffDiagMean: {
                Mat& ds = grad_of(n.a);
                double c = g.a[0] / (static_cast<double>(ds.rows) * (ds.rows - 1));
                for (int i = 0; i < ds.rows; ++i)
                    for (int j = 0; j < ds.cols; ++j)
                        if (i != j) ds(i, j) += c;
                break;
            }
            case Op::Detach:
                break;
        }
    }
}

}  // namespace visa
