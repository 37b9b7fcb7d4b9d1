//! Reverse-mode automatic differentiation over dense tensors.
//!
//! A [`Tape`] records every forward operation in order; [`Tape::backward`]
//! replays the record once in reverse, accumulating vector-Jacobian products
//! into per-node gradients. The operation set is exactly what the attention
//! layer, forecasting head, and MSE loss need — nothing speculative.
//!
//! A tape and its tensors belong to one forward/backward pass on one thread.
//! Independent tapes share no state and may run concurrently.

use thiserror::Error;

use crate::scalar::Scalar;

/// Index of a node in the tape's operation record.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("{op}: dimension mismatch: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: expected {expected}, got shape {shape:?}")]
    BadRank {
        op: &'static str,
        expected: &'static str,
        shape: Vec<usize>,
    },
    #[error("reduce_sum: axis {axis} invalid for shape {shape:?}")]
    InvalidAxis { axis: usize, shape: Vec<usize> },
    #[error("{op}: empty input")]
    EmptyInput { op: &'static str },
    #[error("leaf: {len} values do not fill shape {shape:?}")]
    LengthMismatch { len: usize, shape: Vec<usize> },
    #[error("leaf: non-finite value at index {index}")]
    NonFiniteLeaf { index: usize },
    #[error("row: index {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("leaky_relu: slope {slope} outside (0, 1)")]
    InvalidSlope { slope: f64 },
    #[error("backward: loss must be a scalar, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("backward: already run on this record; reset the tape first")]
    BackwardAlreadyRun,
    #[error("grad: backward has not been run on this record")]
    BackwardNotRun,
    #[error("grad_check: step size must be positive")]
    NonPositiveStep,
    #[error("grad_check: function is not deterministic (two evaluations differ)")]
    NonDeterministic,
}

type Result<V> = std::result::Result<V, AutodiffError>;

/// Handle to a value on a tape: the node id plus a cached shape.
/// Values and gradients live in the tape itself.
#[derive(Debug, Clone)]
pub struct Tensor {
    id: NodeId,
    shape: Vec<usize>,
}

impl Tensor {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_scalar(&self) -> bool {
        self.len() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryKind {
    Exp,
    Relu,
    /// Negative-side slope; the derivative at exactly zero is the slope.
    LeakyRelu,
}

#[derive(Debug, Clone)]
enum Op<T> {
    Leaf,
    Matmul { a: NodeId, b: NodeId },
    Transpose { x: NodeId },
    Row { x: NodeId, row: usize },
    Concat { parts: Vec<NodeId> },
    Hadamard { a: NodeId, b: NodeId },
    /// a: [n, f] times b: [f], b applied to every row of a.
    HadamardRow { a: NodeId, b: NodeId },
    /// Elementwise product with a scalar-valued tensor.
    Scale { x: NodeId, s: NodeId },
    ScaleConst { x: NodeId, c: T },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    AddScalar { x: NodeId, s: NodeId },
    Unary { x: NodeId, kind: UnaryKind, slope: T },
    SoftmaxVec { x: NodeId },
    ReduceSum { x: NodeId, axis: Option<usize> },
    Reshape { x: NodeId },
}

#[derive(Debug)]
struct Node<T> {
    values: Vec<T>,
    shape: Vec<usize>,
    op: Op<T>,
}

/// Operation record for one forward/backward pass.
#[derive(Debug, Default)]
pub struct Tape<T: Scalar> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Vec<T>>>,
    backward_run: bool,
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            grads: Vec::new(),
            backward_run: false,
        }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Clears the record so the tape can be reused for a fresh pass.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.grads.clear();
        self.backward_run = false;
    }

    fn push(&mut self, values: Vec<T>, shape: Vec<usize>, op: Op<T>) -> Tensor {
        debug_assert_eq!(values.len(), shape.iter().product::<usize>());
        let id = self.nodes.len();
        self.nodes.push(Node { values, shape: shape.clone(), op });
        self.grads.push(None);
        Tensor { id, shape }
    }

    fn node(&self, t: &Tensor) -> &Node<T> {
        let node = &self.nodes[t.id];
        debug_assert_eq!(node.shape, t.shape, "tensor handle does not match this tape");
        node
    }

    /// Records an input/parameter tensor. Values are validated finite.
    pub fn leaf(&mut self, values: Vec<T>, shape: &[usize]) -> Result<Tensor> {
        if values.len() != shape.iter().product::<usize>() {
            return Err(AutodiffError::LengthMismatch {
                len: values.len(),
                shape: shape.to_vec(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(AutodiffError::NonFiniteLeaf { index });
        }
        Ok(self.push(values, shape.to_vec(), Op::Leaf))
    }

    /// Rank-0 leaf holding one value.
    pub fn scalar(&mut self, v: T) -> Result<Tensor> {
        self.leaf(vec![v], &[])
    }

    pub fn zeros(&mut self, shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        self.push(vec![T::zero(); len], shape.to_vec(), Op::Leaf)
    }

    pub fn values(&self, t: &Tensor) -> &[T] {
        &self.node(t).values
    }

    /// The single value of a scalar tensor.
    pub fn item(&self, t: &Tensor) -> T {
        assert!(t.is_scalar(), "item() on non-scalar shape {:?}", t.shape);
        self.node(t).values[0]
    }

    /// Gradient of the last `backward` loss w.r.t. `t`. Zero for tensors the
    /// loss does not reach.
    pub fn grad(&self, t: &Tensor) -> Result<&[T]> {
        if !self.backward_run {
            return Err(AutodiffError::BackwardNotRun);
        }
        self.node(t);
        Ok(self.grads[t.id].as_deref().expect("backward fills all gradients"))
    }

    // ---- forward operations -------------------------------------------------

    /// Matrix product of `a: [m, k]` and `b: [k, n]`.
    pub fn matmul(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rank() != 2 || b.rank() != 2 {
            let t = if a.rank() != 2 { a } else { b };
            return Err(AutodiffError::BadRank {
                op: "matmul",
                expected: "rank-2 operands",
                shape: t.shape.clone(),
            });
        }
        let (m, k) = (a.shape[0], a.shape[1]);
        let (k2, n) = (b.shape[0], b.shape[1]);
        if k != k2 {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul",
                lhs: a.shape.clone(),
                rhs: b.shape.clone(),
            });
        }
        let av = &self.node(a).values;
        let bv = &self.node(b).values;
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            for p in 0..k {
                let aip = av[i * k + p];
                if aip == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aip * bv[p * n + j];
                }
            }
        }
        Ok(self.push(out, vec![m, n], Op::Matmul { a: a.id, b: b.id }))
    }

    pub fn transpose(&mut self, x: &Tensor) -> Result<Tensor> {
        if x.rank() != 2 {
            return Err(AutodiffError::BadRank {
                op: "transpose",
                expected: "rank-2 operand",
                shape: x.shape.clone(),
            });
        }
        let (r, c) = (x.shape[0], x.shape[1]);
        let xv = &self.node(x).values;
        let mut out = vec![T::zero(); r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = xv[i * c + j];
            }
        }
        Ok(self.push(out, vec![c, r], Op::Transpose { x: x.id }))
    }

    /// Extracts row `row` of a rank-2 tensor as a rank-1 tensor.
    pub fn row(&mut self, x: &Tensor, row: usize) -> Result<Tensor> {
        if x.rank() != 2 {
            return Err(AutodiffError::BadRank {
                op: "row",
                expected: "rank-2 operand",
                shape: x.shape.clone(),
            });
        }
        let (r, c) = (x.shape[0], x.shape[1]);
        if row >= r {
            return Err(AutodiffError::RowOutOfRange { row, rows: r });
        }
        let out = self.node(x).values[row * c..(row + 1) * c].to_vec();
        Ok(self.push(out, vec![c], Op::Row { x: x.id, row }))
    }

    /// Concatenates rank-0/rank-1 tensors into one rank-1 tensor.
    pub fn concat1d(&mut self, parts: &[Tensor]) -> Result<Tensor> {
        let mut out = Vec::new();
        let mut ids = Vec::with_capacity(parts.len());
        for p in parts {
            if p.rank() > 1 {
                return Err(AutodiffError::BadRank {
                    op: "concat1d",
                    expected: "rank-0 or rank-1 parts",
                    shape: p.shape.clone(),
                });
            }
            out.extend_from_slice(&self.node(p).values);
            ids.push(p.id);
        }
        let len = out.len();
        Ok(self.push(out, vec![len], Op::Concat { parts: ids }))
    }

    /// `a` followed by `b`; both rank-1 of equal length.
    pub fn concat_pair(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rank() != 1 || b.rank() != 1 || a.shape[0] != b.shape[0] {
            return Err(AutodiffError::ShapeMismatch {
                op: "concat_pair",
                lhs: a.shape.clone(),
                rhs: b.shape.clone(),
            });
        }
        self.concat1d(&[a.clone(), b.clone()])
    }

    /// Elementwise product. Accepts equal shapes, or `a: [n, f]` with
    /// `b: [f]` applied to every row of `a`.
    pub fn hadamard(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.shape == b.shape {
            let av = &self.node(a).values;
            let bv = &self.node(b).values;
            let out: Vec<T> = av.iter().zip(bv).map(|(&x, &y)| x * y).collect();
            return Ok(self.push(out, a.shape.clone(), Op::Hadamard { a: a.id, b: b.id }));
        }
        if a.rank() == 2 && b.rank() == 1 && a.shape[1] == b.shape[0] {
            let (n, f) = (a.shape[0], a.shape[1]);
            let av = &self.node(a).values;
            let bv = &self.node(b).values;
            let mut out = vec![T::zero(); n * f];
            for i in 0..n {
                for j in 0..f {
                    out[i * f + j] = av[i * f + j] * bv[j];
                }
            }
            return Ok(self.push(out, a.shape.clone(), Op::HadamardRow { a: a.id, b: b.id }));
        }
        Err(AutodiffError::ShapeMismatch {
            op: "hadamard",
            lhs: a.shape.clone(),
            rhs: b.shape.clone(),
        })
    }

    /// Multiplies every element of `x` by the scalar-valued tensor `s`.
    pub fn scale(&mut self, x: &Tensor, s: &Tensor) -> Result<Tensor> {
        if !s.is_scalar() {
            return Err(AutodiffError::BadRank {
                op: "scale",
                expected: "scalar multiplier",
                shape: s.shape.clone(),
            });
        }
        let sv = self.node(s).values[0];
        let out: Vec<T> = self.node(x).values.iter().map(|&v| v * sv).collect();
        Ok(self.push(out, x.shape.clone(), Op::Scale { x: x.id, s: s.id }))
    }

    /// Multiplies every element by a plain constant (not differentiated).
    pub fn scale_const(&mut self, x: &Tensor, c: T) -> Result<Tensor> {
        let out: Vec<T> = self.node(x).values.iter().map(|&v| v * c).collect();
        Ok(self.push(out, x.shape.clone(), Op::ScaleConst { x: x.id, c }))
    }

    pub fn add(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.shape != b.shape {
            return Err(AutodiffError::ShapeMismatch {
                op: "add",
                lhs: a.shape.clone(),
                rhs: b.shape.clone(),
            });
        }
        let av = &self.node(a).values;
        let bv = &self.node(b).values;
        let out: Vec<T> = av.iter().zip(bv).map(|(&x, &y)| x + y).collect();
        Ok(self.push(out, a.shape.clone(), Op::Add { a: a.id, b: b.id }))
    }

    pub fn sub(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.shape != b.shape {
            return Err(AutodiffError::ShapeMismatch {
                op: "sub",
                lhs: a.shape.clone(),
                rhs: b.shape.clone(),
            });
        }
        let av = &self.node(a).values;
        let bv = &self.node(b).values;
        let out: Vec<T> = av.iter().zip(bv).map(|(&x, &y)| x - y).collect();
        Ok(self.push(out, a.shape.clone(), Op::Sub { a: a.id, b: b.id }))
    }

    /// Adds the scalar-valued tensor `s` to every element of `x`.
    pub fn add_scalar(&mut self, x: &Tensor, s: &Tensor) -> Result<Tensor> {
        if !s.is_scalar() {
            return Err(AutodiffError::BadRank {
                op: "add_scalar",
                expected: "scalar addend",
                shape: s.shape.clone(),
            });
        }
        let sv = self.node(s).values[0];
        let out: Vec<T> = self.node(x).values.iter().map(|&v| v + sv).collect();
        Ok(self.push(out, x.shape.clone(), Op::AddScalar { x: x.id, s: s.id }))
    }

    fn unary(&mut self, x: &Tensor, kind: UnaryKind, slope: T) -> Tensor {
        let out: Vec<T> = self
            .node(x)
            .values
            .iter()
            .map(|&v| match kind {
                UnaryKind::Exp => v.exp(),
                UnaryKind::Relu => {
                    if v > T::zero() {
                        v
                    } else {
                        T::zero()
                    }
                }
                UnaryKind::LeakyRelu => {
                    if v > T::zero() {
                        v
                    } else {
                        slope * v
                    }
                }
            })
            .collect();
        self.push(out, x.shape.clone(), Op::Unary { x: x.id, kind, slope })
    }

    pub fn exp(&mut self, x: &Tensor) -> Tensor {
        self.unary(x, UnaryKind::Exp, T::zero())
    }

    pub fn relu(&mut self, x: &Tensor) -> Tensor {
        self.unary(x, UnaryKind::Relu, T::zero())
    }

    pub fn leaky_relu(&mut self, x: &Tensor, slope: T) -> Result<Tensor> {
        if slope <= T::zero() || slope >= T::one() {
            return Err(AutodiffError::InvalidSlope { slope: slope.to_f64() });
        }
        Ok(self.unary(x, UnaryKind::LeakyRelu, slope))
    }

    /// Softmax over a rank-1 tensor, computed with max subtraction so large
    /// scores cannot overflow.
    pub fn softmax_vec(&mut self, x: &Tensor) -> Result<Tensor> {
        if x.rank() != 1 {
            return Err(AutodiffError::BadRank {
                op: "softmax_vec",
                expected: "rank-1 operand",
                shape: x.shape.clone(),
            });
        }
        if x.is_empty() {
            return Err(AutodiffError::EmptyInput { op: "softmax_vec" });
        }
        let xv = &self.node(x).values;
        let max = xv.iter().cloned().fold(xv[0], T::max);
        let exps: Vec<T> = xv.iter().map(|&v| (v - max).exp()).collect();
        let total = exps.iter().fold(T::zero(), |acc, &v| acc + v);
        let out: Vec<T> = exps.iter().map(|&v| v / total).collect();
        Ok(self.push(out, x.shape.clone(), Op::SoftmaxVec { x: x.id }))
    }

    /// Sum over all elements (`axis: None`, rank-0 result) or along one axis.
    pub fn reduce_sum(&mut self, x: &Tensor, axis: Option<usize>) -> Result<Tensor> {
        let xv = &self.node(x).values;
        let (out, shape) = match axis {
            None => {
                let total = xv.iter().fold(T::zero(), |acc, &v| acc + v);
                (vec![total], Vec::new())
            }
            Some(ax) => {
                if ax >= x.rank() {
                    return Err(AutodiffError::InvalidAxis {
                        axis: ax,
                        shape: x.shape.clone(),
                    });
                }
                match (x.rank(), ax) {
                    (1, 0) => {
                        let total = xv.iter().fold(T::zero(), |acc, &v| acc + v);
                        (vec![total], Vec::new())
                    }
                    (2, 0) => {
                        let (r, c) = (x.shape[0], x.shape[1]);
                        let mut out = vec![T::zero(); c];
                        for i in 0..r {
                            for j in 0..c {
                                out[j] += xv[i * c + j];
                            }
                        }
                        (out, vec![c])
                    }
                    (2, 1) => {
                        let (r, c) = (x.shape[0], x.shape[1]);
                        let mut out = vec![T::zero(); r];
                        for i in 0..r {
                            for j in 0..c {
                                out[i] += xv[i * c + j];
                            }
                        }
                        (out, vec![r])
                    }
                    _ => {
                        return Err(AutodiffError::InvalidAxis {
                            axis: ax,
                            shape: x.shape.clone(),
                        })
                    }
                }
            }
        };
        Ok(self.push(out, shape, Op::ReduceSum { x: x.id, axis }))
    }

    /// Reinterprets the elements under a new shape of the same size.
    pub fn reshape(&mut self, x: &Tensor, shape: &[usize]) -> Result<Tensor> {
        if shape.iter().product::<usize>() != x.len() {
            return Err(AutodiffError::ShapeMismatch {
                op: "reshape",
                lhs: x.shape.clone(),
                rhs: shape.to_vec(),
            });
        }
        let out = self.node(x).values.clone();
        Ok(self.push(out, shape.to_vec(), Op::Reshape { x: x.id }))
    }

    // ---- backward -----------------------------------------------------------

    /// Accumulates gradients for every node that reaches `loss`. Nodes the
    /// loss does not reach end up with zero gradients. A record can be
    /// differentiated once; reset the tape to run another pass.
    pub fn backward(&mut self, loss: &Tensor) -> Result<()> {
        if self.backward_run {
            return Err(AutodiffError::BackwardAlreadyRun);
        }
        if !loss.is_scalar() {
            return Err(AutodiffError::NonScalarLoss {
                shape: loss.shape.clone(),
            });
        }
        self.node(loss);
        self.grads[loss.id] = Some(vec![T::one()]);

        for id in (0..=loss.id).rev() {
            let g = match &self.grads[id] {
                Some(g) => g.clone(),
                None => continue,
            };
            let op = self.nodes[id].op.clone();
            match op {
                Op::Leaf => {}
                Op::Matmul { a, b } => {
                    let (m, k) = (self.nodes[a].shape[0], self.nodes[a].shape[1]);
                    let n = self.nodes[b].shape[1];
                    // dA += g · Bᵀ
                    let mut da = vec![T::zero(); m * k];
                    {
                        let bv = &self.nodes[b].values;
                        for i in 0..m {
                            for p in 0..k {
                                let mut acc = T::zero();
                                for j in 0..n {
                                    acc += g[i * n + j] * bv[p * n + j];
                                }
                                da[i * k + p] = acc;
                            }
                        }
                    }
                    // dB += Aᵀ · g
                    let mut db = vec![T::zero(); k * n];
                    {
                        let av = &self.nodes[a].values;
                        for p in 0..k {
                            for j in 0..n {
                                let mut acc = T::zero();
                                for i in 0..m {
                                    acc += av[i * k + p] * g[i * n + j];
                                }
                                db[p * n + j] = acc;
                            }
                        }
                    }
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::Transpose { x } => {
                    let (r, c) = (self.nodes[x].shape[0], self.nodes[x].shape[1]);
                    let mut dx = vec![T::zero(); r * c];
                    for i in 0..r {
                        for j in 0..c {
                            dx[i * c + j] = g[j * r + i];
                        }
                    }
                    self.accumulate(x, &dx);
                }
                Op::Row { x, row } => {
                    let c = self.nodes[x].shape[1];
                    let mut dx = vec![T::zero(); self.nodes[x].values.len()];
                    dx[row * c..(row + 1) * c].copy_from_slice(&g);
                    self.accumulate(x, &dx);
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p].values.len();
                        let slice = g[offset..offset + len].to_vec();
                        self.accumulate(p, &slice);
                        offset += len;
                    }
                }
                Op::Hadamard { a, b } => {
                    let da: Vec<T> = g
                        .iter()
                        .zip(&self.nodes[b].values)
                        .map(|(&gi, &bi)| gi * bi)
                        .collect();
                    let db: Vec<T> = g
                        .iter()
                        .zip(&self.nodes[a].values)
                        .map(|(&gi, &ai)| gi * ai)
                        .collect();
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::HadamardRow { a, b } => {
                    let (n, f) = (self.nodes[a].shape[0], self.nodes[a].shape[1]);
                    let mut da = vec![T::zero(); n * f];
                    let mut db = vec![T::zero(); f];
                    {
                        let av = &self.nodes[a].values;
                        let bv = &self.nodes[b].values;
                        for i in 0..n {
                            for j in 0..f {
                                da[i * f + j] = g[i * f + j] * bv[j];
                                db[j] += g[i * f + j] * av[i * f + j];
                            }
                        }
                    }
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::Scale { x, s } => {
                    let sv = self.nodes[s].values[0];
                    let dx: Vec<T> = g.iter().map(|&gi| gi * sv).collect();
                    let ds = g
                        .iter()
                        .zip(&self.nodes[x].values)
                        .fold(T::zero(), |acc, (&gi, &xi)| acc + gi * xi);
                    self.accumulate(x, &dx);
                    self.accumulate(s, &[ds]);
                }
                Op::ScaleConst { x, c } => {
                    let dx: Vec<T> = g.iter().map(|&gi| gi * c).collect();
                    self.accumulate(x, &dx);
                }
                Op::Add { a, b } => {
                    self.accumulate(a, &g);
                    self.accumulate(b, &g);
                }
                Op::Sub { a, b } => {
                    self.accumulate(a, &g);
                    let db: Vec<T> = g.iter().map(|&gi| -gi).collect();
                    self.accumulate(b, &db);
                }
                Op::AddScalar { x, s } => {
                    self.accumulate(x, &g);
                    let ds = g.iter().fold(T::zero(), |acc, &gi| acc + gi);
                    self.accumulate(s, &[ds]);
                }
                Op::Unary { x, kind, slope } => {
                    let dx: Vec<T> = match kind {
                        // exp' = exp, already computed as this node's output
                        UnaryKind::Exp => g
                            .iter()
                            .zip(&self.nodes[id].values)
                            .map(|(&gi, &yi)| gi * yi)
                            .collect(),
                        // derivative at exactly zero is the negative-side slope
                        UnaryKind::Relu => g
                            .iter()
                            .zip(&self.nodes[x].values)
                            .map(|(&gi, &xi)| if xi > T::zero() { gi } else { T::zero() })
                            .collect(),
                        UnaryKind::LeakyRelu => g
                            .iter()
                            .zip(&self.nodes[x].values)
                            .map(|(&gi, &xi)| if xi > T::zero() { gi } else { gi * slope })
                            .collect(),
                    };
                    self.accumulate(x, &dx);
                }
                Op::SoftmaxVec { x } => {
                    let y = &self.nodes[id].values;
                    let dot = g
                        .iter()
                        .zip(y)
                        .fold(T::zero(), |acc, (&gi, &yi)| acc + gi * yi);
                    let dx: Vec<T> = g.iter().zip(y).map(|(&gi, &yi)| yi * (gi - dot)).collect();
                    self.accumulate(x, &dx);
                }
                Op::ReduceSum { x, axis } => {
                    let shape = self.nodes[x].shape.clone();
                    let len = self.nodes[x].values.len();
                    let dx: Vec<T> = match (axis, shape.len()) {
                        (None, _) | (Some(0), 1) => vec![g[0]; len],
                        (Some(0), 2) => {
                            let (r, c) = (shape[0], shape[1]);
                            let mut dx = vec![T::zero(); r * c];
                            for i in 0..r {
                                dx[i * c..(i + 1) * c].copy_from_slice(&g);
                            }
                            dx
                        }
                        (Some(1), 2) => {
                            let (r, c) = (shape[0], shape[1]);
                            let mut dx = vec![T::zero(); r * c];
                            for i in 0..r {
                                for j in 0..c {
                                    dx[i * c + j] = g[i];
                                }
                            }
                            dx
                        }
                        _ => unreachable!("validated at record time"),
                    };
                    self.accumulate(x, &dx);
                }
                Op::Reshape { x } => {
                    self.accumulate(x, &g);
                }
            }
        }

        for (slot, node) in self.grads.iter_mut().zip(&self.nodes) {
            if slot.is_none() {
                *slot = Some(vec![T::zero(); node.values.len()]);
            }
        }
        self.backward_run = true;
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, contribution: &[T]) {
        match &mut self.grads[id] {
            Some(existing) => {
                for (e, &c) in existing.iter_mut().zip(contribution) {
                    *e += c;
                }
            }
            None => self.grads[id] = Some(contribution.to_vec()),
        }
    }
}

// ---- gradient checking -------------------------------------------------------

/// Outcome of a finite-difference check, including the worst coordinate so
/// failures can be reported precisely.
#[derive(Debug, Clone)]
pub struct GradCheckReport<T> {
    pub max_rel_err: T,
    pub worst_param: usize,
    pub worst_coord: usize,
    pub analytic_at_worst: T,
    pub numeric_at_worst: T,
}

/// Compares analytic gradients of a scalar-valued tape program against
/// central finite differences with step `h`.
///
/// `build` must construct the loss on the given tape from leaves created in
/// the order of `params` (values, shape). The relative error for each
/// coordinate is `|analytic − numeric| / max(1, |numeric|)`; the maximum over
/// all coordinates is returned. Two evaluations at the base point must agree
/// bit-for-bit or the function is rejected as non-deterministic.
pub fn grad_check<T, F>(
    build: F,
    params: &[(Vec<T>, Vec<usize>)],
    h: T,
) -> Result<GradCheckReport<T>>
where
    T: Scalar,
    F: Fn(&mut Tape<T>, &[Tensor]) -> Result<Tensor>,
{
    if h <= T::zero() {
        return Err(AutodiffError::NonPositiveStep);
    }

    let eval = |sets: &[(Vec<T>, Vec<usize>)]| -> Result<T> {
        let mut tape = Tape::new();
        let leaves: Vec<Tensor> = sets
            .iter()
            .map(|(values, shape)| tape.leaf(values.clone(), shape))
            .collect::<Result<_>>()?;
        let loss = build(&mut tape, &leaves)?;
        if !loss.is_scalar() {
            return Err(AutodiffError::NonScalarLoss {
                shape: loss.shape().to_vec(),
            });
        }
        Ok(tape.item(&loss))
    };

    let base = eval(params)?;
    let again = eval(params)?;
    if base.to_f64().to_bits() != again.to_f64().to_bits() {
        return Err(AutodiffError::NonDeterministic);
    }

    let analytic: Vec<Vec<T>> = {
        let mut tape = Tape::new();
        let leaves: Vec<Tensor> = params
            .iter()
            .map(|(values, shape)| tape.leaf(values.clone(), shape))
            .collect::<Result<_>>()?;
        let loss = build(&mut tape, &leaves)?;
        tape.backward(&loss)?;
        leaves
            .iter()
            .map(|leaf| tape.grad(leaf).map(<[T]>::to_vec))
            .collect::<Result<_>>()?
    };

    let mut report = GradCheckReport {
        max_rel_err: T::zero(),
        worst_param: 0,
        worst_coord: 0,
        analytic_at_worst: T::zero(),
        numeric_at_worst: T::zero(),
    };
    let two = T::from_f64(2.0);
    let mut work = params.to_vec();
    for (pi, (values, _)) in params.iter().enumerate() {
        #[allow(clippy::needless_range_loop)]
        for ci in 0..values.len() {
            let original = work[pi].0[ci];
            work[pi].0[ci] = original + h;
            let plus = eval(&work)?;
            work[pi].0[ci] = original - h;
            let minus = eval(&work)?;
            work[pi].0[ci] = original;

            let numeric = (plus - minus) / (two * h);
            let rel = (analytic[pi][ci] - numeric).abs() / T::one().max(numeric.abs());
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = pi;
                report.worst_coord = ci;
                report.analytic_at_worst = analytic[pi][ci];
                report.numeric_at_worst = numeric;
            }
        }
    }
    Ok(report)
}
