#include "drmime/tape.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "drmime/detail/bilinear.hpp"
#include "drmime/errors.hpp"

namespace drmime::ad {

namespace {

using EMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EMap emap(const Tensor& t, std::size_t r, std::size_t c) {
    return EMap(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

EMapMut emap(Tensor& t, std::size_t r, std::size_t c) {
    return EMapMut(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite())
        throw NumericalError(std::string("non-finite value produced by ") + op);
}

Tape* same_tape(Var a, Var b) {
    if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape)
        throw InvalidArgument("operands must live on the same tape");
    return a.tape;
}

Tape* one_tape(Var a) {
    if (a.tape == nullptr) throw InvalidArgument("operand is not bound to a tape");
    return a.tape;
}

const Tensor& val(Var v) { return v.tape->value(v); }

bool needs_grad(Var v) { return v.tape->node(v.id).requires_grad; }

Var binary_elementwise(Op op, const char* name, Var a, Var b) {
    Tape* t = same_tape(a, b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (!x.same_shape(y))
        throw InvalidArgument(std::string(name) + ": shape mismatch " +
                              Tensor::shape_str(x.shape()) + " vs " + Tensor::shape_str(y.shape()));
    Tensor out(x.shape());
    const std::size_t n = x.numel();
    switch (op) {
        case Op::Add:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
            break;
        case Op::Sub:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
            break;
        case Op::Mul:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
            break;
        case Op::Div:
            for (std::size_t i = 0; i < n; ++i) out[i] = x[i] / y[i];
            break;
        default:
            throw InvalidArgument("binary_elementwise: bad op");
    }
    check_finite(out, name);
    Node node;
    node.op = op;
    node.a = a.id;
    node.b = b.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a) || needs_grad(b);
    return {t, t->push(std::move(node))};
}

Var unary_map(Op op, const char* name, Var a, double (*f)(double)) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = f(x[i]);
    check_finite(out, name);
    Node node;
    node.op = op;
    node.a = a.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

} // namespace

Var Tape::input(Tensor value, bool trainable) {
    if (value.numel() == 0) throw InvalidArgument("input: empty tensor");
    check_finite(value, "input");
    Node node;
    node.op = Op::Input;
    node.value = std::move(value);
    node.requires_grad = trainable;
    return {this, push(std::move(node))};
}

int Tape::push(Node&& n) {
    if (has_grads_)
        throw InvalidArgument("tape already differentiated; build a fresh tape");
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
}

const Tensor& Tape::value(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw InvalidArgument("value: var does not belong to this tape");
    return nodes_[static_cast<std::size_t>(v.id)].value;
}

const Tensor& Tape::grad(Var v) const {
    if (!has_grads_) throw InvalidArgument("grad: backward() has not run");
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw InvalidArgument("grad: var does not belong to this tape");
    const Tensor& g = grads_[static_cast<std::size_t>(v.id)];
    if (g.numel() == 0)
        throw InvalidArgument("grad: node does not require gradients");
    return g;
}

Tensor& Tape::adjoint(int id) {
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.numel() == 0) g = Tensor::zeros(nodes_[static_cast<std::size_t>(id)].value.shape());
    return g;
}

void Tape::backward(Var root) {
    if (root.tape != this || root.id < 0 || root.id >= static_cast<int>(nodes_.size()))
        throw InvalidArgument("backward: var does not belong to this tape");
    if (nodes_[static_cast<std::size_t>(root.id)].value.numel() != 1)
        throw InvalidArgument("backward: root must be a scalar");

    grads_.assign(nodes_.size(), Tensor{});
    has_grads_ = true;

    if (nodes_[static_cast<std::size_t>(root.id)].requires_grad)
        adjoint(root.id)[0] = 1.0;

    for (int i = root.id; i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad) continue;
        const Tensor& g = grads_[static_cast<std::size_t>(i)];
        if (g.numel() == 0) continue; // never reached from the root

        const bool ga = n.a >= 0 && nodes_[static_cast<std::size_t>(n.a)].requires_grad;
        const bool gb = n.b >= 0 && nodes_[static_cast<std::size_t>(n.b)].requires_grad;
        if (!ga && !gb) continue;

        const Tensor* xa = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)].value : nullptr;
        const Tensor* xb = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)].value : nullptr;

        switch (n.op) {
            case Op::Input:
                break;
            case Op::Add: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k];
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k];
                }
                break;
            }
            case Op::Sub: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k];
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] -= g[k];
                }
                break;
            }
            case Op::Mul: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] * (*xb)[k];
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] * (*xa)[k];
                }
                break;
            }
            case Op::Div: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] / (*xb)[k];
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    for (std::size_t k = 0; k < g.numel(); ++k)
                        d[k] -= g[k] * (*xa)[k] / ((*xb)[k] * (*xb)[k]);
                }
                break;
            }
            case Op::MatMul: {
                const std::size_t r = xa->rows();
                const std::size_t kk = xa->cols();
                const std::size_t c = xb->cols();
                auto gm = emap(g, r, c);
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    emap(d, r, kk).noalias() += gm * emap(*xb, kk, c).transpose();
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    emap(d, kk, c).noalias() += emap(*xa, r, kk).transpose() * gm;
                }
                break;
            }
            case Op::Relu: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k)
                        if ((*xa)[k] > 0.0) d[k] += g[k];
                }
                break;
            }
            case Op::Exp: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] * n.value[k];
                }
                break;
            }
            case Op::Log: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] / (*xa)[k];
                }
                break;
            }
            case Op::Sqrt: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k)
                        d[k] += g[k] * 0.5 / n.value[k];
                }
                break;
            }
            case Op::Sum: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < d.numel(); ++k) d[k] += g[0];
                }
                break;
            }
            case Op::Mean: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    const double s = g[0] / static_cast<double>(d.numel());
                    for (std::size_t k = 0; k < d.numel(); ++k) d[k] += s;
                }
                break;
            }
            case Op::MaxReduce: {
                if (ga) adjoint(n.a)[n.idx0] += g[0];
                break;
            }
            case Op::ScalarMul: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k] * n.scalar;
                }
                break;
            }
            case Op::GatherRows: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    const std::size_t m = d.cols();
                    for (std::size_t r = 0; r < n.indices.size(); ++r) {
                        const std::size_t src = n.indices[r];
                        for (std::size_t c = 0; c < m; ++c) d.at(src, c) += g.at(r, c);
                    }
                }
                break;
            }
            case Op::Reshape: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k];
                }
                break;
            }
            case Op::Transpose: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    const std::size_t r = d.rows();
                    const std::size_t c = d.cols();
                    for (std::size_t i2 = 0; i2 < r; ++i2)
                        for (std::size_t j = 0; j < c; ++j) d.at(i2, j) += g.at(j, i2);
                }
                break;
            }
            case Op::AddRowVec: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t k = 0; k < g.numel(); ++k) d[k] += g[k];
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    const std::size_t r = g.rows();
                    const std::size_t c = g.cols();
                    for (std::size_t i2 = 0; i2 < r; ++i2)
                        for (std::size_t j = 0; j < c; ++j) d[j] += g.at(i2, j);
                }
                break;
            }
            case Op::ConcatCols: {
                const std::size_t r = g.rows();
                const std::size_t p = xa->cols();
                const std::size_t q = xb->cols();
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    for (std::size_t i2 = 0; i2 < r; ++i2)
                        for (std::size_t j = 0; j < p; ++j) d.at(i2, j) += g.at(i2, j);
                }
                if (gb) {
                    Tensor& d = adjoint(n.b);
                    for (std::size_t i2 = 0; i2 < r; ++i2)
                        for (std::size_t j = 0; j < q; ++j) d.at(i2, j) += g.at(i2, p + j);
                }
                break;
            }
            case Op::SliceCols: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    const std::size_t r = g.rows();
                    const std::size_t w = g.cols();
                    for (std::size_t i2 = 0; i2 < r; ++i2)
                        for (std::size_t j = 0; j < w; ++j) d.at(i2, n.idx0 + j) += g.at(i2, j);
                }
                break;
            }
            case Op::BilinearSample: {
                if (ga) {
                    Tensor& d = adjoint(n.a);
                    const Tensor& grid = *n.grid;
                    const std::size_t h = grid.shape()[0];
                    const std::size_t w = grid.shape()[1];
                    const std::size_t ch = grid.shape()[2];
                    const std::size_t rows = xa->rows();
                    for (std::size_t i2 = 0; i2 < rows; ++i2) {
                        const double px = px_from_norm(xa->at(i2, 0), w);
                        const double py = px_from_norm(xa->at(i2, 1), h);
                        const detail::BilinearTap tap = detail::bilinear_tap(px, py, w, h);
                        double gx = 0.0, gy = 0.0;
                        for (std::size_t k = 0; k < ch; ++k) {
                            double dpx = 0.0, dpy = 0.0;
                            detail::bilinear_deriv(grid.data(), w, ch, tap, k, dpx, dpy);
                            gx += g.at(i2, k) * dpx;
                            gy += g.at(i2, k) * dpy;
                        }
                        // chain through px = (x+1)*w/2 - 1/2
                        d.at(i2, 0) += gx * 0.5 * static_cast<double>(w);
                        d.at(i2, 1) += gy * 0.5 * static_cast<double>(h);
                    }
                }
                break;
            }
        }
    }

    // Trainables the sweep never reached still report zeros.
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].requires_grad && grads_[i].numel() == 0)
            grads_[i] = Tensor::zeros(nodes_[i].value.shape());
}

Var add(Var a, Var b) { return binary_elementwise(Op::Add, "add", a, b); }
Var sub(Var a, Var b) { return binary_elementwise(Op::Sub, "sub", a, b); }
Var mul(Var a, Var b) { return binary_elementwise(Op::Mul, "mul", a, b); }
Var div(Var a, Var b) { return binary_elementwise(Op::Div, "div", a, b); }

Var matmul(Var a, Var b) {
    Tape* t = same_tape(a, b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rank() != 2 || y.rank() != 2 || x.cols() != y.rows())
        throw InvalidArgument("matmul: incompatible shapes " + Tensor::shape_str(x.shape()) +
                              " x " + Tensor::shape_str(y.shape()));
    Tensor out({x.rows(), y.cols()});
    emap(out, x.rows(), y.cols()).noalias() =
        emap(x, x.rows(), x.cols()) * emap(y, y.rows(), y.cols());
    check_finite(out, "matmul");
    Node node;
    node.op = Op::MatMul;
    node.a = a.id;
    node.b = b.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a) || needs_grad(b);
    return {t, t->push(std::move(node))};
}

Var relu(Var a) {
    return unary_map(Op::Relu, "relu", a, +[](double v) { return v > 0.0 ? v : 0.0; });
}

Var exp(Var a) {
    return unary_map(Op::Exp, "exp", a, +[](double v) { return std::exp(v); });
}

Var log(Var a) {
    return unary_map(Op::Log, "log", a, +[](double v) { return std::log(v); });
}

Var sqrt(Var a) {
    return unary_map(Op::Sqrt, "sqrt", a, +[](double v) { return std::sqrt(v); });
}

namespace {

Var reduce(Op op, const char* name, Var a) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    double v = 0.0;
    std::size_t arg = 0;
    if (op == Op::Sum || op == Op::Mean) {
        for (std::size_t i = 0; i < x.numel(); ++i) v += x[i];
        if (op == Op::Mean) v /= static_cast<double>(x.numel());
    } else {
        v = x[0];
        for (std::size_t i = 1; i < x.numel(); ++i)
            if (x[i] > v) {
                v = x[i];
                arg = i;
            }
    }
    Tensor out = Tensor::scalar(v);
    check_finite(out, name);
    Node node;
    node.op = op;
    node.a = a.id;
    node.idx0 = arg;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

} // namespace

Var sum(Var a) { return reduce(Op::Sum, "sum", a); }
Var mean(Var a) { return reduce(Op::Mean, "mean", a); }
Var max_reduce(Var a) { return reduce(Op::MaxReduce, "max_reduce", a); }

Var scalar_mul(Var a, double c) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = c * x[i];
    check_finite(out, "scalar_mul");
    Node node;
    node.op = Op::ScalarMul;
    node.a = a.id;
    node.scalar = c;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

Var gather_rows(Var a, std::vector<std::size_t> indices) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    if (x.rank() != 2) throw InvalidArgument("gather_rows: rank-2 tensor required");
    if (indices.empty()) throw InvalidArgument("gather_rows: empty index list");
    for (std::size_t i : indices)
        if (i >= x.rows()) throw InvalidArgument("gather_rows: index out of range");
    const std::size_t m = x.cols();
    Tensor out({indices.size(), m});
    for (std::size_t r = 0; r < indices.size(); ++r)
        for (std::size_t c = 0; c < m; ++c) out.at(r, c) = x.at(indices[r], c);
    Node node;
    node.op = Op::GatherRows;
    node.a = a.id;
    node.indices = std::move(indices);
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

Var reshape(Var a, std::vector<std::size_t> shape) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    if (Tensor::count(shape) != x.numel())
        throw InvalidArgument("reshape: element count mismatch");
    Tensor out(std::move(shape), x.vec());
    Node node;
    node.op = Op::Reshape;
    node.a = a.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

Var transpose(Var a) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    if (x.rank() != 2) throw InvalidArgument("transpose: rank-2 tensor required");
    Tensor out({x.cols(), x.rows()});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(c, r) = x.at(r, c);
    Node node;
    node.op = Op::Transpose;
    node.a = a.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

Var add_rowvec(Var a, Var b) {
    Tape* t = same_tape(a, b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rank() != 2 || y.rank() != 1 || y.numel() != x.cols())
        throw InvalidArgument("add_rowvec: need {n,m} and {m}");
    Tensor out(x.shape());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c) + y[c];
    check_finite(out, "add_rowvec");
    Node node;
    node.op = Op::AddRowVec;
    node.a = a.id;
    node.b = b.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a) || needs_grad(b);
    return {t, t->push(std::move(node))};
}

Var concat_cols(Var a, Var b) {
    Tape* t = same_tape(a, b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rank() != 2 || y.rank() != 2 || x.rows() != y.rows())
        throw InvalidArgument("concat_cols: row count mismatch");
    Tensor out({x.rows(), x.cols() + y.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) = x.at(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) out.at(r, x.cols() + c) = y.at(r, c);
    }
    Node node;
    node.op = Op::ConcatCols;
    node.a = a.id;
    node.b = b.id;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a) || needs_grad(b);
    return {t, t->push(std::move(node))};
}

Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
    Tape* t = one_tape(a);
    const Tensor& x = val(a);
    if (x.rank() != 2 || c0 >= c1 || c1 > x.cols())
        throw InvalidArgument("slice_cols: bad column range");
    Tensor out({x.rows(), c1 - c0});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = c0; c < c1; ++c) out.at(r, c - c0) = x.at(r, c);
    Node node;
    node.op = Op::SliceCols;
    node.a = a.id;
    node.idx0 = c0;
    node.idx1 = c1;
    node.value = std::move(out);
    node.requires_grad = needs_grad(a);
    return {t, t->push(std::move(node))};
}

Var bilinear_sample(std::shared_ptr<const Tensor> grid, Var pts) {
    Tape* t = one_tape(pts);
    if (!grid || grid->rank() != 3)
        throw InvalidArgument("bilinear_sample: grid must be a {h,w,ch} tensor");
    const Tensor& p = val(pts);
    if (p.rank() != 2 || p.cols() != 2)
        throw InvalidArgument("bilinear_sample: pts must be {n,2}");
    const std::size_t h = grid->shape()[0];
    const std::size_t w = grid->shape()[1];
    const std::size_t ch = grid->shape()[2];
    Tensor out({p.rows(), ch});
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const double px = px_from_norm(p.at(i, 0), w);
        const double py = px_from_norm(p.at(i, 1), h);
        const detail::BilinearTap tap = detail::bilinear_tap(px, py, w, h);
        for (std::size_t k = 0; k < ch; ++k)
            out.at(i, k) = detail::bilinear_value(grid->data(), w, ch, tap, k);
    }
    check_finite(out, "bilinear_sample");
    Node node;
    node.op = Op::BilinearSample;
    node.a = pts.id;
    node.grid = std::move(grid);
    node.value = std::move(out);
    node.requires_grad = needs_grad(pts);
    return {t, t->push(std::move(node))};
}

} // namespace drmime::ad
