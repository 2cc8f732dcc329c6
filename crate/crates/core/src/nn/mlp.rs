use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

const NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Plain,
    Dueling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden: Vec<usize>,
    pub head: Head,
    pub normalization: bool,
    pub seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return input_err("network dimensions must be positive");
        }
        if self.head == Head::Dueling && self.hidden.is_empty() {
            return input_err("a dueling head needs at least one hidden layer");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

#[derive(Debug, Clone, Copy)]
struct Norm {
    gain: usize,
    bias: usize,
}

/// Offsets of every tensor inside the flat parameter vector.
#[derive(Debug, Clone)]
struct Layout {
    hidden: Vec<Dense>,
    /// Shared normalization slot used by each hidden layer.
    norm_of: Vec<Option<Norm>>,
    out: Dense,
    value: Option<Dense>,
    len: usize,
}

impl Layout {
    fn new(cfg: &MlpConfig) -> Self {
        let mut len = 0;
        let mut dense = |fan_in: usize, fan_out: usize| {
            let d = Dense { w: len, b: len + fan_in * fan_out, fan_in, fan_out };
            len += fan_in * fan_out + fan_out;
            d
        };
        let mut hidden = Vec::new();
        let mut width = cfg.input_dim;
        for &h in &cfg.hidden {
            hidden.push(dense(width, h));
            width = h;
        }
        let out = dense(width, cfg.output_dim);
        let value = (cfg.head == Head::Dueling).then(|| dense(width, 1));

        // one gain/bias pair per distinct hidden width, reused by every layer of that width
        let mut slots: Vec<(usize, Norm)> = Vec::new();
        let mut norm_of = Vec::new();
        for &h in &cfg.hidden {
            if !cfg.normalization {
                norm_of.push(None);
                continue;
            }
            let slot = match slots.iter().find(|(w, _)| *w == h) {
                Some((_, n)) => *n,
                None => {
                    let n = Norm { gain: len, bias: len + h };
                    len += 2 * h;
                    slots.push((h, n));
                    n
                }
            };
            norm_of.push(Some(slot));
        }
        Self { hidden, norm_of, out, value, len }
    }
}

/// Parameters of a plain or dueling Q-network, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct QNetworkParams {
    config: MlpConfig,
    values: Vec<f64>,
    #[serde(skip)]
    layout: LayoutCell,
}

#[derive(Debug, Clone)]
struct LayoutCell(Layout);

impl PartialEq for LayoutCell {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    config: MlpConfig,
    values: Vec<f64>,
}

impl TryFrom<RawParams> for QNetworkParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        raw.config.validate()?;
        let layout = Layout::new(&raw.config);
        if raw.values.len() != layout.len {
            return input_err(format!(
                "checkpoint holds {} parameters, config needs {}",
                raw.values.len(),
                layout.len
            ));
        }
        Ok(Self { config: raw.config, values: raw.values, layout: LayoutCell(layout) })
    }
}

impl From<QNetworkParams> for RawParams {
    fn from(p: QNetworkParams) -> Self {
        RawParams { config: p.config, values: p.values }
    }
}

/// Intermediate values of one hidden layer, kept for backprop.
struct HiddenCache {
    input: Array2<f64>,
    xhat: Option<Array2<f64>>,
    inv_std: Option<Array1<f64>>,
    /// Pre-ReLU output (after normalization when enabled).
    pre_act: Array2<f64>,
}

struct ForwardCache {
    hidden: Vec<HiddenCache>,
    features: Array2<f64>,
}

impl QNetworkParams {
    /// Glorot-uniform weights, zero biases, unit gains; deterministic per seed.
    pub fn init(config: &MlpConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(config);
        let mut values = vec![0.0; layout.len];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let dense = layout.hidden.iter().chain(std::iter::once(&layout.out)).chain(layout.value.iter());
        for d in dense {
            let bound = (6.0 / (d.fan_in + d.fan_out) as f64).sqrt();
            for v in &mut values[d.w..d.w + d.fan_in * d.fan_out] {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        for n in layout.norm_of.iter().flatten() {
            let width = n.bias - n.gain;
            values[n.gain..n.bias].fill(1.0);
            values[n.bias..n.bias + width].fill(0.0);
        }
        Ok(Self { config: config.clone(), values, layout: LayoutCell(layout) })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Overwrites these parameters with `other`'s (same architecture).
    pub fn copy_from(&mut self, other: &QNetworkParams) {
        assert_eq!(self.config, other.config, "architecture mismatch");
        self.values.copy_from_slice(&other.values);
    }

    fn weights(&self, d: Dense) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((d.fan_in, d.fan_out), &self.values[d.w..d.w + d.fan_in * d.fan_out])
            .expect("layout")
    }

    fn bias(&self, d: Dense) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[d.b..d.b + d.fan_out])
    }

    fn affine(&self, x: &ArrayView2<f64>, d: Dense) -> Array2<f64> {
        x.dot(&self.weights(d)) + self.bias(d)
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.config.input_dim {
            return input_err(format!(
                "network expects {} inputs, got {}",
                self.config.input_dim,
                x.ncols()
            ));
        }
        Ok(())
    }

    fn trunk(&self, x: ArrayView2<f64>, keep: bool) -> ForwardCache {
        let mut hidden = Vec::new();
        let mut act = x.to_owned();
        for (l, &d) in self.layout.0.hidden.iter().enumerate() {
            let z = self.affine(&act.view(), d);
            let (pre_act, xhat, inv_std) = match self.layout.0.norm_of[l] {
                Some(n) => {
                    let (xhat, inv_std) = standardize(&z);
                    let gain = ArrayView1::from(&self.values[n.gain..n.bias]);
                    let bias = ArrayView1::from(&self.values[n.bias..n.bias + d.fan_out]);
                    (&xhat * &gain + bias, Some(xhat), Some(inv_std))
                }
                None => (z, None, None),
            };
            let next = pre_act.mapv(|v| v.max(0.0));
            if keep {
                hidden.push(HiddenCache { input: act, xhat, inv_std, pre_act });
            }
            act = next;
        }
        ForwardCache { hidden, features: act }
    }

    fn head(&self, features: &Array2<f64>) -> Array2<f64> {
        let adv = self.affine(&features.view(), self.layout.0.out);
        match self.layout.0.value {
            None => adv,
            Some(vd) => {
                let v = self.affine(&features.view(), vd);
                let mean = adv.mean_axis(Axis(1)).expect("nonempty");
                let mut q = adv;
                for (mut row, (vv, m)) in q.outer_iter_mut().zip(v.column(0).iter().zip(mean.iter())) {
                    row.mapv_inplace(|a| vv + (a - m));
                }
                q
            }
        }
    }

    /// Q-values for a batch of inputs (rows).
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let cache = self.trunk(x, false);
        Ok(self.head(&cache.features))
    }

    /// Q-values for a single input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row");
        Ok(self.forward_batch(x)?.row(0).to_vec())
    }

    /// State value and raw advantages of a dueling head.
    pub fn value_and_advantage(&self, input: &[f64]) -> Result<(f64, Vec<f64>)> {
        let Some(vd) = self.layout.0.value else {
            return input_err("not a dueling network");
        };
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row");
        self.check_input(&x)?;
        let f = self.trunk(x, false).features;
        let v = self.affine(&f.view(), vd)[[0, 0]];
        let a = self.affine(&f.view(), self.layout.0.out).row(0).to_vec();
        Ok((v, a))
    }

    /// Mean squared TD error on the taken actions and its gradient.
    pub fn loss_and_grads(
        &self,
        states: ArrayView2<f64>,
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        self.check_input(&states)?;
        let b = states.nrows();
        if b == 0 {
            return input_err("empty batch");
        }
        if actions.len() != b || targets.len() != b {
            return input_err("batch states, actions and targets differ in length");
        }
        if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
            return input_err(format!("non-finite target {t}"));
        }
        if let Some(a) = actions.iter().find(|&&a| a >= self.config.output_dim) {
            return input_err(format!("action {a} outside the output layer"));
        }

        let cache = self.trunk(states, true);
        let q = self.head(&cache.features);
        let mut loss = 0.0;
        let mut dq = Array2::<f64>::zeros(q.raw_dim());
        for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
            let err = q[[i, a]] - y;
            loss += err * err;
            dq[[i, a]] = 2.0 * err / b as f64;
        }
        loss /= b as f64;
        Ok((loss, self.backward(&cache, dq)))
    }

    fn backward(&self, cache: &ForwardCache, dq: Array2<f64>) -> Vec<f64> {
        let lay = &self.layout.0;
        let mut grads = vec![0.0; self.values.len()];
        let feats = &cache.features;

        let (d_adv, mut d_feat) = match lay.value {
            None => (dq, None),
            Some(vd) => {
                // Q = V + A - mean(A)
                let dv = dq.sum_axis(Axis(1)).insert_axis(Axis(1));
                let mean = dq.mean_axis(Axis(1)).expect("nonempty").insert_axis(Axis(1));
                let da = &dq - &mean;
                accumulate_dense(&mut grads, vd, feats, &dv);
                let df = dv.dot(&self.weights(vd).t());
                (da, Some(df))
            }
        };
        accumulate_dense(&mut grads, lay.out, feats, &d_adv);
        let df = d_adv.dot(&self.weights(lay.out).t());
        let mut delta = match d_feat.take() {
            Some(v) => v + df,
            None => df,
        };

        for l in (0..lay.hidden.len()).rev() {
            let c = &cache.hidden[l];
            let d = lay.hidden[l];
            // ReLU
            delta.zip_mut_with(&c.pre_act, |g, &p| {
                if p <= 0.0 {
                    *g = 0.0
                }
            });
            let dz = match lay.norm_of[l] {
                None => delta,
                Some(n) => {
                    let xhat = c.xhat.as_ref().expect("cached");
                    let inv_std = c.inv_std.as_ref().expect("cached");
                    let width = d.fan_out;
                    let dgain = (&delta * xhat).sum_axis(Axis(0));
                    let dbias = delta.sum_axis(Axis(0));
                    for (g, v) in grads[n.gain..n.bias].iter_mut().zip(dgain.iter()) {
                        *g += v;
                    }
                    for (g, v) in grads[n.bias..n.bias + width].iter_mut().zip(dbias.iter()) {
                        *g += v;
                    }
                    let gain = ArrayView1::from(&self.values[n.gain..n.bias]);
                    let dxhat = &delta * &gain;
                    standardize_backward(&dxhat, xhat, inv_std)
                }
            };
            accumulate_dense(&mut grads, d, &c.input, &dz);
            delta = dz.dot(&self.weights(d).t());
        }
        grads
    }
}

fn accumulate_dense(grads: &mut [f64], d: Dense, input: &Array2<f64>, dout: &Array2<f64>) {
    let dw = input.t().dot(dout);
    for (g, v) in grads[d.w..d.w + d.fan_in * d.fan_out].iter_mut().zip(dw.iter()) {
        *g += v;
    }
    let db = dout.sum_axis(Axis(0));
    for (g, v) in grads[d.b..d.b + d.fan_out].iter_mut().zip(db.iter()) {
        *g += v;
    }
}

/// Row-wise standardization to zero mean and unit variance.
fn standardize(z: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let width = z.ncols() as f64;
    let mut xhat = z.clone();
    let mut inv = Array1::zeros(z.nrows());
    for (i, mut row) in xhat.outer_iter_mut().enumerate() {
        let mean = row.sum() / width;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / width;
        let is = 1.0 / (var + NORM_EPS).sqrt();
        row.mapv_inplace(|v| (v - mean) * is);
        inv[i] = is;
    }
    (xhat, inv)
}

fn standardize_backward(dxhat: &Array2<f64>, xhat: &Array2<f64>, inv_std: &Array1<f64>) -> Array2<f64> {
    let width = dxhat.ncols() as f64;
    let mut dz = Array2::zeros(dxhat.raw_dim());
    for i in 0..dxhat.nrows() {
        let g = dxhat.slice(s![i, ..]);
        let xh = xhat.slice(s![i, ..]);
        let sum_g = g.sum();
        let sum_gx = g.dot(&xh);
        let scale = inv_std[i] / width;
        for j in 0..dxhat.ncols() {
            dz[[i, j]] = scale * (width * g[j] - sum_g - xh[j] * sum_gx);
        }
    }
    dz
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(head: Head, norm: bool) -> MlpConfig {
        MlpConfig { input_dim: 4, output_dim: 3, hidden: vec![6, 6], head, normalization: norm, seed: 3 }
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(Head::Dueling, true);
        c.hidden.clear();
        assert!(QNetworkParams::init(&c).is_err());
        c.head = Head::Plain;
        assert!(QNetworkParams::init(&c).is_ok());
        c.input_dim = 0;
        assert!(QNetworkParams::init(&c).is_err());
    }

    #[test]
    fn shared_norm_slots() {
        let c = cfg(Head::Plain, true);
        let p = QNetworkParams::init(&c).unwrap();
        // 4*6+6, 6*6+6, 6*3+3, one shared 6-wide gain/bias pair
        assert_eq!(p.len(), 30 + 42 + 21 + 12);
        let mut c2 = c.clone();
        c2.hidden = vec![6, 5];
        assert_eq!(QNetworkParams::init(&c2).unwrap().len(), 30 + 35 + 18 + 12 + 10);
    }

    #[test]
    fn same_seed_same_params() {
        let a = QNetworkParams::init(&cfg(Head::Dueling, true)).unwrap();
        let b = QNetworkParams::init(&cfg(Head::Dueling, true)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn weights_within_glorot_bound() {
        let c = MlpConfig { input_dim: 32, output_dim: 32, hidden: vec![32], head: Head::Plain, normalization: false, seed: 9 };
        let p = QNetworkParams::init(&c).unwrap();
        let bound = (6.0f64 / 64.0).sqrt();
        assert!(p.values().iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn dueling_combination() {
        // V = 5, A = [1, 3] -> Q = [4, 6]: force it through a 1-unit network
        let c = MlpConfig { input_dim: 1, output_dim: 2, hidden: vec![1], head: Head::Dueling, normalization: false, seed: 0 };
        let mut p = QNetworkParams::init(&c).unwrap();
        let lay = p.layout.0.clone();
        let v = p.values_mut();
        v[lay.hidden[0].w] = 1.0;
        v[lay.hidden[0].b] = 0.0;
        v[lay.out.w..lay.out.w + 2].copy_from_slice(&[0.0, 0.0]);
        v[lay.out.b..lay.out.b + 2].copy_from_slice(&[1.0, 3.0]);
        let vd = lay.value.unwrap();
        v[vd.w] = 0.0;
        v[vd.b] = 5.0;
        assert_eq!(p.forward(&[1.0]).unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn matched_targets_give_zero_loss_and_grads() {
        let p = QNetworkParams::init(&cfg(Head::Dueling, true)).unwrap();
        let x = Array2::from_shape_fn((3, 4), |(i, j)| ((i * 4 + j) as f64 * 0.37).sin());
        let q = p.forward_batch(x.view()).unwrap();
        let actions = [0, 2, 1];
        let targets: Vec<f64> = actions.iter().enumerate().map(|(i, &a)| q[[i, a]]).collect();
        let (loss, g) = p.loss_and_grads(x.view(), &actions, &targets).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn duplicated_batch_matches_single() {
        let p = QNetworkParams::init(&cfg(Head::Plain, true)).unwrap();
        let row = [0.0, 1.0, 1.0, 0.0];
        let one = ArrayView2::from_shape((1, 4), &row).unwrap();
        let rows: Vec<f64> = row.iter().cycle().take(16).copied().collect();
        let four = ArrayView2::from_shape((4, 4), &rows).unwrap();
        let (l1, g1) = p.loss_and_grads(one, &[1], &[2.5]).unwrap();
        let (l4, g4) = p.loss_and_grads(four, &[1; 4], &[2.5; 4]).unwrap();
        assert!((l1 - l4).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g4) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_input_errors() {
        let p = QNetworkParams::init(&cfg(Head::Plain, false)).unwrap();
        let x = Array2::<f64>::zeros((1, 4));
        assert!(p.loss_and_grads(x.view(), &[0], &[f64::NAN]).is_err());
        assert!(p.loss_and_grads(x.view(), &[5], &[0.0]).is_err());
        assert!(p.loss_and_grads(Array2::<f64>::zeros((0, 4)).view(), &[], &[]).is_err());
        assert!(p.forward(&[0.0; 3]).is_err());
    }

    #[test]
    fn checkpoint_json_is_exact() {
        let p = QNetworkParams::init(&cfg(Head::Dueling, true)).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: QNetworkParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back.values(), p.values());
        let x = [0.3, -1.0, 2.0, 0.0];
        assert_eq!(back.forward(&x).unwrap(), p.forward(&x).unwrap());
    }

    #[test]
    fn checkpoint_length_checked() {
        let p = QNetworkParams::init(&cfg(Head::Plain, false)).unwrap();
        let mut v = serde_json::to_value(&p).unwrap();
        v["values"].as_array_mut().unwrap().pop();
        assert!(serde_json::from_value::<QNetworkParams>(v).is_err());
    }
}
