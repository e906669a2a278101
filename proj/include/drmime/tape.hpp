#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "drmime/tensor.hpp"

namespace drmime::ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
};

enum class Op : std::uint8_t {
    Input,
    Add,
    Sub,
    Mul,
    Div,
    MatMul,
    Relu,
    Exp,
    Log,
    Sqrt,
    Sum,
    Mean,
    MaxReduce,
    ScalarMul,
    GatherRows,
    Reshape,
    Transpose,
    AddRowVec,
    ConcatCols,
    SliceCols,
    BilinearSample,
};

struct Node {
    Op op = Op::Input;
    int a = -1;
    int b = -1;
    Tensor value;
    bool requires_grad = false;
    double scalar = 0.0;                  // ScalarMul factor
    std::size_t idx0 = 0;                 // SliceCols begin, MaxReduce argmax
    std::size_t idx1 = 0;                 // SliceCols end
    std::vector<std::size_t> indices;     // GatherRows
    std::shared_ptr<const Tensor> grid;   // BilinearSample image, shape {h,w,ch}
};

// Define-by-run reverse-mode tape over dense double tensors. A tape records
// one forward computation; backward() walks it once in reverse. Tapes are
// rebuilt from scratch every optimization step, never reused across steps,
// so pushing new ops after backward() is treated as a bug and throws.
//
// Every op validates shapes eagerly and scans its output for NaN/Inf,
// throwing NumericalError as soon as a non-finite value appears.
class Tape {
public:
    Var input(Tensor value, bool trainable = false);
    Var constant(Tensor value) { return input(std::move(value), false); }

    const Tensor& value(Var v) const;

    // Gradient of the last backward() root w.r.t. v. Nodes the backward
    // sweep never reached report zeros.
    const Tensor& grad(Var v) const;

    // Reverse sweep from a scalar root. Trainable inputs that do not
    // influence the root get zero gradients rather than an error.
    void backward(Var root);

    std::size_t size() const { return nodes_.size(); }
    bool differentiated() const { return has_grads_; }

    // Internal: used by the op free functions.
    int push(Node&& n);
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

private:
    Tensor& adjoint(int id);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    bool has_grads_ = false;
};

// Elementwise; shapes must match exactly (no broadcasting).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

// {n,k} x {k,m} -> {n,m}.
Var matmul(Var a, Var b);

Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);

// Full reductions to a scalar {1}.
Var sum(Var a);
Var mean(Var a);
// Max over all entries; subgradient routes to the first maximizer.
Var max_reduce(Var a);

Var scalar_mul(Var a, double c);

// Row gather on a rank-2 tensor; indices may repeat (gradient scatter-adds).
Var gather_rows(Var a, std::vector<std::size_t> indices);

Var reshape(Var a, std::vector<std::size_t> shape);
Var transpose(Var a);

// {n,m} plus a rank-1 {m} broadcast across rows.
Var add_rowvec(Var a, Var b);

Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t c0, std::size_t c1);

// Bilinear lookup into a fixed grid (shape {h,w,ch}) at normalized
// coordinates pts {n,2}, rows = (x, y). Edge-clamped; gradient flows to
// pts only. The grid is captured by shared_ptr so callers can reuse one
// grid tensor across many tapes without copying.
Var bilinear_sample(std::shared_ptr<const Tensor> grid, Var pts);

} // namespace drmime::ad
