use crate::error::{Result, ShgnError};
use crate::numerics::params::{GradStore, ParamId, ParamStore};
use crate::numerics::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf { param: Option<ParamId> },
    Constant,
    Add { a: usize, b: usize },
    AddRowBroadcast { a: usize, b: usize },
    Mul { a: usize, b: usize },
    ScalarMul { a: usize, c: f64 },
    Matmul { a: usize, b: usize },
    Transpose { a: usize },
    ConcatRows { parts: Vec<usize> },
    ConcatCols { parts: Vec<usize> },
    SliceRows { a: usize, start: usize, len: usize },
    SliceCols { a: usize, start: usize, len: usize },
    Softmax { a: usize },
    Sigmoid { a: usize },
    Relu { a: usize },
    SumAll { a: usize },
    SumAxis { a: usize, axis: usize },
    EmbeddingLookup { table: usize, ids: Vec<usize> },
    CrossEntropySum { logits: usize, targets: Vec<usize>, mask: Vec<bool> },
    BceMean { logits: usize, targets: Vec<f64> },
    LayerNorm { x: usize, gain: usize, bias: usize, eps: f64 },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Reverse-mode autodiff tape over [`Tensor`] values.
///
/// Nodes are recorded in topological order by construction (every parent is
/// pushed before its children), so the backward pass is a single reverse
/// sweep. A tape covers one forward computation; parameters live outside in a
/// [`ParamStore`] and receive their gradients through [`Tape::backward`].
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Records a non-differentiable input.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Constant)
    }

    /// Records a differentiable leaf that is not a model parameter.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf { param: None })
    }

    /// Records a model parameter; its gradient lands in the [`GradStore`]
    /// slot of `id` after [`Tape::backward`].
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.get(id).clone(), Op::Leaf { param: Some(id) })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.add(&self.nodes[b.0].value)?;
        Ok(self.push(value, Op::Add { a: a.0, b: b.0 }))
    }

    /// `a [n,d] + b [1,d]`, adding `b` to every row of `a`.
    pub fn add_row_broadcast(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, d) = self.nodes[a.0].value.shape();
        let (bn, bd) = self.nodes[b.0].value.shape();
        if bn != 1 || bd != d {
            return Err(ShgnError::shape(
                "add_row_broadcast",
                format!("[{n},{d}] + [{bn},{bd}]"),
            ));
        }
        let mut out = self.nodes[a.0].value.clone();
        let brow = self.nodes[b.0].value.data().to_vec();
        for r in 0..n {
            for c in 0..d {
                let v = out.at(r, c) + brow[c];
                out.set(r, c, v);
            }
        }
        Ok(self.push(out, Op::AddRowBroadcast { a: a.0, b: b.0 }))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if av.shape() != bv.shape() {
            return Err(ShgnError::shape(
                "mul",
                format!("{:?} vs {:?}", av.shape(), bv.shape()),
            ));
        }
        let data = av
            .data()
            .iter()
            .zip(bv.data().iter())
            .map(|(x, y)| x * y)
            .collect();
        let value = Tensor::from_vec(av.rows(), av.cols(), data)?;
        Ok(self.push(value, Op::Mul { a: a.0, b: b.0 }))
    }

    pub fn scalar_mul(&mut self, a: Var, c: f64) -> Var {
        let value = self.nodes[a.0].value.scale(c);
        self.push(value, Op::ScalarMul { a: a.0, c })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.nodes[a.0].value.matmul(&self.nodes[b.0].value)?;
        Ok(self.push(value, Op::Matmul { a: a.0, b: b.0 }))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.transpose();
        self.push(value, Op::Transpose { a: a.0 })
    }

    /// Stacks parts vertically; all parts must share a column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(ShgnError::shape("concat_rows", "no parts"));
        }
        let cols = self.nodes[parts[0].0].value.cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            let t = &self.nodes[p.0].value;
            if t.cols() != cols {
                return Err(ShgnError::shape(
                    "concat_rows",
                    format!("column mismatch: {} vs {}", cols, t.cols()),
                ));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let value = Tensor::from_vec(rows, cols, data)?;
        Ok(self.push(
            value,
            Op::ConcatRows {
                parts: parts.iter().map(|v| v.0).collect(),
            },
        ))
    }

    /// Stacks parts horizontally; all parts must share a row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(ShgnError::shape("concat_cols", "no parts"));
        }
        let rows = self.nodes[parts[0].0].value.rows();
        let mut widths = Vec::with_capacity(parts.len());
        let mut cols = 0;
        for p in parts {
            let t = &self.nodes[p.0].value;
            if t.rows() != rows {
                return Err(ShgnError::shape(
                    "concat_cols",
                    format!("row mismatch: {} vs {}", rows, t.rows()),
                ));
            }
            widths.push(t.cols());
            cols += t.cols();
        }
        let mut out = Tensor::zeros(rows, cols);
        let mut offset = 0;
        for (p, w) in parts.iter().zip(widths.iter()) {
            let t = &self.nodes[p.0].value;
            for r in 0..rows {
                for c in 0..*w {
                    out.set(r, offset + c, t.at(r, c));
                }
            }
            offset += w;
        }
        Ok(self.push(
            out,
            Op::ConcatCols {
                parts: parts.iter().map(|v| v.0).collect(),
            },
        ))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let t = &self.nodes[a.0].value;
        let (n, d) = t.shape();
        if start + len > n {
            return Err(ShgnError::shape(
                "slice_rows",
                format!("rows {start}..{} of [{n},{d}]", start + len),
            ));
        }
        let data = t.data()[start * d..(start + len) * d].to_vec();
        let value = Tensor::from_vec(len, d, data)?;
        Ok(self.push(value, Op::SliceRows { a: a.0, start, len }))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let t = &self.nodes[a.0].value;
        let (n, d) = t.shape();
        if start + len > d {
            return Err(ShgnError::shape(
                "slice_cols",
                format!("cols {start}..{} of [{n},{d}]", start + len),
            ));
        }
        let mut out = Tensor::zeros(n, len);
        for r in 0..n {
            for c in 0..len {
                out.set(r, c, t.at(r, start + c));
            }
        }
        Ok(self.push(out, Op::SliceCols { a: a.0, start, len }))
    }

    /// Splits the columns of `x` into `heads` equal slices.
    pub fn split_heads(&mut self, x: Var, heads: usize) -> Result<Vec<Var>> {
        let d = self.nodes[x.0].value.cols();
        if heads == 0 || d % heads != 0 {
            return Err(ShgnError::shape(
                "split_heads",
                format!("{d} columns into {heads} heads"),
            ));
        }
        let w = d / heads;
        (0..heads).map(|h| self.slice_cols(x, h * w, w)).collect()
    }

    /// Row-wise softmax (numerically stable).
    pub fn softmax(&mut self, a: Var) -> Var {
        let value = self.nodes[a.0].value.softmax_rows();
        self.push(value, Op::Softmax { a: a.0 })
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let t = &self.nodes[a.0].value;
        let data = t.data().iter().map(|&x| 1.0 / (1.0 + (-x).exp())).collect();
        let value = Tensor::from_vec(t.rows(), t.cols(), data).expect("same shape");
        self.push(value, Op::Sigmoid { a: a.0 })
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let t = &self.nodes[a.0].value;
        let data = t.data().iter().map(|&x| x.max(0.0)).collect();
        let value = Tensor::from_vec(t.rows(), t.cols(), data).expect("same shape");
        self.push(value, Op::Relu { a: a.0 })
    }

    /// Sum of all entries, as a `[1,1]` scalar.
    pub fn sum_all(&mut self, a: Var) -> Var {
        let s: f64 = self.nodes[a.0].value.data().iter().sum();
        self.push(Tensor::scalar(s), Op::SumAll { a: a.0 })
    }

    /// Sum along an axis: axis 0 collapses rows (`[n,d] -> [1,d]`), axis 1
    /// collapses columns (`[n,d] -> [n,1]`).
    pub fn sum_axis(&mut self, a: Var, axis: usize) -> Result<Var> {
        let t = &self.nodes[a.0].value;
        let (n, d) = t.shape();
        let value = match axis {
            0 => {
                let mut out = Tensor::zeros(1, d);
                for r in 0..n {
                    for c in 0..d {
                        let v = out.at(0, c) + t.at(r, c);
                        out.set(0, c, v);
                    }
                }
                out
            }
            1 => {
                let mut out = Tensor::zeros(n, 1);
                for r in 0..n {
                    let s: f64 = t.row_slice(r).iter().sum();
                    out.set(r, 0, s);
                }
                out
            }
            _ => return Err(ShgnError::shape("sum_axis", format!("axis {axis}"))),
        };
        Ok(self.push(value, Op::SumAxis { a: a.0, axis }))
    }

    /// Gathers rows of `table` at `ids`.
    pub fn embedding_lookup(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let t = &self.nodes[table.0].value;
        let (rows, d) = t.shape();
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            if id >= rows {
                return Err(ShgnError::shape(
                    "embedding_lookup",
                    format!("id {id} out of {rows} rows"),
                ));
            }
            data.extend_from_slice(t.row_slice(id));
        }
        let value = Tensor::from_vec(ids.len(), d, data)?;
        Ok(self.push(
            value,
            Op::EmbeddingLookup {
                table: table.0,
                ids: ids.to_vec(),
            },
        ))
    }

    /// Summed token-level cross entropy between `logits [T,V]` and integer
    /// targets, computed with log-sum-exp. Rows where `mask` is false are
    /// excluded from both the value and the gradient.
    pub fn cross_entropy_sum(
        &mut self,
        logits: Var,
        targets: &[usize],
        mask: &[bool],
    ) -> Result<Var> {
        let t = &self.nodes[logits.0].value;
        let (n, v) = t.shape();
        if targets.len() != n || mask.len() != n {
            return Err(ShgnError::shape(
                "cross_entropy",
                format!("{n} logit rows, {} targets, {} mask", targets.len(), mask.len()),
            ));
        }
        for &tgt in targets {
            if tgt >= v {
                return Err(ShgnError::shape(
                    "cross_entropy",
                    format!("target {tgt} out of vocabulary {v}"),
                ));
            }
        }
        let logp = t.log_softmax_rows();
        let mut sum = 0.0;
        for r in 0..n {
            if mask[r] {
                sum -= logp.at(r, targets[r]);
            }
        }
        Ok(self.push(
            Tensor::scalar(sum),
            Op::CrossEntropySum {
                logits: logits.0,
                targets: targets.to_vec(),
                mask: mask.to_vec(),
            },
        ))
    }

    /// Mean binary cross entropy over `logits [n,1]` against 0/1 targets,
    /// using the stable `max(x,0) - x t + ln(1+e^{-|x|})` form. An empty set
    /// contributes an exact zero.
    pub fn bce_mean(&mut self, logits: Var, targets: &[f64]) -> Result<Var> {
        let t = &self.nodes[logits.0].value;
        let (n, w) = t.shape();
        if w != 1 || targets.len() != n {
            return Err(ShgnError::shape(
                "binary_cross_entropy",
                format!("logits [{n},{w}] vs {} targets", targets.len()),
            ));
        }
        let mut sum = 0.0;
        for (r, &tgt) in targets.iter().enumerate() {
            let x = t.at(r, 0);
            sum += x.max(0.0) - x * tgt + (-x.abs()).exp().ln_1p();
        }
        let value = if n == 0 { 0.0 } else { sum / n as f64 };
        Ok(self.push(
            Tensor::scalar(value),
            Op::BceMean {
                logits: logits.0,
                targets: targets.to_vec(),
            },
        ))
    }

    /// Layer normalization over the last axis with learnable gain and bias
    /// (`gain`, `bias` are `[1,d]`).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let t = &self.nodes[x.0].value;
        let (n, d) = t.shape();
        let g = &self.nodes[gain.0].value;
        let b = &self.nodes[bias.0].value;
        if g.shape() != (1, d) || b.shape() != (1, d) {
            return Err(ShgnError::shape(
                "layer_norm",
                format!("x [{n},{d}], gain {:?}, bias {:?}", g.shape(), b.shape()),
            ));
        }
        let mut out = Tensor::zeros(n, d);
        for r in 0..n {
            let row = t.row_slice(r);
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let sigma = (var + eps).sqrt();
            for c in 0..d {
                let xhat = (row[c] - mean) / sigma;
                out.set(r, c, g.at(0, c) * xhat + b.at(0, c));
            }
        }
        Ok(self.push(
            out,
            Op::LayerNorm {
                x: x.0,
                gain: gain.0,
                bias: bias.0,
                eps,
            },
        ))
    }

    /// Runs the backward pass from a `[1,1]` loss and returns parameter
    /// gradients. Errors if the loss is non-finite.
    pub fn backward(&self, loss: Var, store: &ParamStore) -> Result<GradStore> {
        let loss_value = self.nodes[loss.0].value.item()?;
        if !loss_value.is_finite() {
            return Err(ShgnError::NonFinite("loss".into()));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        let mut out = GradStore::zeros(store);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            match &self.nodes[idx].op {
                Op::Leaf { param } => {
                    if let Some(id) = param {
                        out.add_to(*id, &g)?;
                    }
                }
                Op::Constant => {}
                Op::Add { a, b } => {
                    add_into(&mut grads[*a], g.clone());
                    add_into(&mut grads[*b], g);
                }
                Op::AddRowBroadcast { a, b } => {
                    let (n, d) = g.shape();
                    let mut gb = Tensor::zeros(1, d);
                    for r in 0..n {
                        for c in 0..d {
                            let v = gb.at(0, c) + g.at(r, c);
                            gb.set(0, c, v);
                        }
                    }
                    add_into(&mut grads[*a], g);
                    add_into(&mut grads[*b], gb);
                }
                Op::Mul { a, b } => {
                    let ga = elementwise_mul(&g, &self.nodes[*b].value);
                    let gb = elementwise_mul(&g, &self.nodes[*a].value);
                    add_into(&mut grads[*a], ga);
                    add_into(&mut grads[*b], gb);
                }
                Op::ScalarMul { a, c } => {
                    add_into(&mut grads[*a], g.scale(*c));
                }
                Op::Matmul { a, b } => {
                    let bt = self.nodes[*b].value.transpose();
                    let at = self.nodes[*a].value.transpose();
                    add_into(&mut grads[*a], g.matmul(&bt)?);
                    add_into(&mut grads[*b], at.matmul(&g)?);
                }
                Op::Transpose { a } => {
                    add_into(&mut grads[*a], g.transpose());
                }
                Op::ConcatRows { parts } => {
                    let mut start = 0;
                    for p in parts {
                        let rows = self.nodes[*p].value.rows();
                        let d = self.nodes[*p].value.cols();
                        let data = g.data()[start * d..(start + rows) * d].to_vec();
                        add_into(&mut grads[*p], Tensor::from_vec(rows, d, data)?);
                        start += rows;
                    }
                }
                Op::ConcatCols { parts } => {
                    let rows = g.rows();
                    let mut offset = 0;
                    for p in parts {
                        let w = self.nodes[*p].value.cols();
                        let mut gp = Tensor::zeros(rows, w);
                        for r in 0..rows {
                            for c in 0..w {
                                gp.set(r, c, g.at(r, offset + c));
                            }
                        }
                        add_into(&mut grads[*p], gp);
                        offset += w;
                    }
                }
                Op::SliceRows { a, start, len } => {
                    let (n, d) = self.nodes[*a].value.shape();
                    let mut ga = Tensor::zeros(n, d);
                    for r in 0..*len {
                        for c in 0..d {
                            ga.set(start + r, c, g.at(r, c));
                        }
                    }
                    add_into(&mut grads[*a], ga);
                }
                Op::SliceCols { a, start, len } => {
                    let (n, d) = self.nodes[*a].value.shape();
                    let mut ga = Tensor::zeros(n, d);
                    for r in 0..n {
                        for c in 0..*len {
                            ga.set(r, start + c, g.at(r, c));
                        }
                    }
                    add_into(&mut grads[*a], ga);
                }
                Op::Softmax { a } => {
                    let y = &self.nodes[idx].value;
                    let (n, d) = y.shape();
                    let mut ga = Tensor::zeros(n, d);
                    for r in 0..n {
                        let dot: f64 = (0..d).map(|c| g.at(r, c) * y.at(r, c)).sum();
                        for c in 0..d {
                            ga.set(r, c, y.at(r, c) * (g.at(r, c) - dot));
                        }
                    }
                    add_into(&mut grads[*a], ga);
                }
                Op::Sigmoid { a } => {
                    let y = &self.nodes[idx].value;
                    let data = g
                        .data()
                        .iter()
                        .zip(y.data().iter())
                        .map(|(gv, yv)| gv * yv * (1.0 - yv))
                        .collect();
                    add_into(&mut grads[*a], Tensor::from_vec(y.rows(), y.cols(), data)?);
                }
                Op::Relu { a } => {
                    let x = &self.nodes[*a].value;
                    let data = g
                        .data()
                        .iter()
                        .zip(x.data().iter())
                        .map(|(gv, xv)| if *xv > 0.0 { *gv } else { 0.0 })
                        .collect();
                    add_into(&mut grads[*a], Tensor::from_vec(x.rows(), x.cols(), data)?);
                }
                Op::SumAll { a } => {
                    let gs = g.item()?;
                    let (n, d) = self.nodes[*a].value.shape();
                    let mut ga = Tensor::zeros(n, d);
                    for v in ga.data_mut() {
                        *v = gs;
                    }
                    add_into(&mut grads[*a], ga);
                }
                Op::SumAxis { a, axis } => {
                    let (n, d) = self.nodes[*a].value.shape();
                    let mut ga = Tensor::zeros(n, d);
                    match axis {
                        0 => {
                            for r in 0..n {
                                for c in 0..d {
                                    ga.set(r, c, g.at(0, c));
                                }
                            }
                        }
                        _ => {
                            for r in 0..n {
                                for c in 0..d {
                                    ga.set(r, c, g.at(r, 0));
                                }
                            }
                        }
                    }
                    add_into(&mut grads[*a], ga);
                }
                Op::EmbeddingLookup { table, ids } => {
                    let (rows, d) = self.nodes[*table].value.shape();
                    let mut gt = Tensor::zeros(rows, d);
                    for (r, &id) in ids.iter().enumerate() {
                        for c in 0..d {
                            let v = gt.at(id, c) + g.at(r, c);
                            gt.set(id, c, v);
                        }
                    }
                    add_into(&mut grads[*table], gt);
                }
                Op::CrossEntropySum {
                    logits,
                    targets,
                    mask,
                } => {
                    let gs = g.item()?;
                    let lv = &self.nodes[*logits].value;
                    let probs = lv.softmax_rows();
                    let (n, v) = lv.shape();
                    let mut gl = Tensor::zeros(n, v);
                    for r in 0..n {
                        if !mask[r] {
                            continue;
                        }
                        for c in 0..v {
                            let onehot = if c == targets[r] { 1.0 } else { 0.0 };
                            gl.set(r, c, gs * (probs.at(r, c) - onehot));
                        }
                    }
                    add_into(&mut grads[*logits], gl);
                }
                Op::BceMean { logits, targets } => {
                    let gs = g.item()?;
                    let lv = &self.nodes[*logits].value;
                    let n = lv.rows();
                    let mut gl = Tensor::zeros(n, 1);
                    if n > 0 {
                        for (r, &tgt) in targets.iter().enumerate() {
                            let x = lv.at(r, 0);
                            let sig = 1.0 / (1.0 + (-x).exp());
                            gl.set(r, 0, gs * (sig - tgt) / n as f64);
                        }
                    }
                    add_into(&mut grads[*logits], gl);
                }
                Op::LayerNorm { x, gain, bias, eps } => {
                    let xv = &self.nodes[*x].value;
                    let gv = &self.nodes[*gain].value;
                    let (n, d) = xv.shape();
                    let mut gx = Tensor::zeros(n, d);
                    let mut ggain = Tensor::zeros(1, d);
                    let mut gbias = Tensor::zeros(1, d);
                    for r in 0..n {
                        let row = xv.row_slice(r);
                        let mean = row.iter().sum::<f64>() / d as f64;
                        let var =
                            row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
                        let sigma = (var + eps).sqrt();
                        let xhat: Vec<f64> = row.iter().map(|v| (v - mean) / sigma).collect();
                        let ghat: Vec<f64> = (0..d).map(|c| g.at(r, c) * gv.at(0, c)).collect();
                        let mean_ghat = ghat.iter().sum::<f64>() / d as f64;
                        let mean_ghat_xhat =
                            ghat.iter().zip(xhat.iter()).map(|(a, b)| a * b).sum::<f64>()
                                / d as f64;
                        for c in 0..d {
                            gx.set(
                                r,
                                c,
                                (ghat[c] - mean_ghat - xhat[c] * mean_ghat_xhat) / sigma,
                            );
                            let vg = ggain.at(0, c) + g.at(r, c) * xhat[c];
                            ggain.set(0, c, vg);
                            let vb = gbias.at(0, c) + g.at(r, c);
                            gbias.set(0, c, vb);
                        }
                    }
                    add_into(&mut grads[*x], gx);
                    add_into(&mut grads[*gain], ggain);
                    add_into(&mut grads[*bias], gbias);
                }
            }
        }
        Ok(out)
    }
}

fn add_into(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(existing) => existing.axpy(1.0, &g).expect("gradient shapes agree"),
        None => *slot = Some(g),
    }
}

fn elementwise_mul(a: &Tensor, b: &Tensor) -> Tensor {
    let data = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| x * y)
        .collect();
    Tensor::from_vec(a.rows(), a.cols(), data).expect("same shape")
}
