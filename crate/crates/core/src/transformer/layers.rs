//! Forward and backward passes of the building blocks. Every forward
//! returns a cache holding what its backward needs; backward adds
//! parameter gradients into `g` and returns the input gradient.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{AttnIdx, DecoderIdx, EncoderIdx, FfnIdx, LinearIdx, NormIdx};
use super::tensor::{gemm, Matrix, Scalar};

const NORM_EPS: f64 = 1e-5;

pub(crate) fn linear_fwd<T: Scalar>(p: &[Matrix<T>], idx: LinearIdx, x: &Matrix<T>) -> Matrix<T> {
    let (w, b) = (&p[idx.w], &p[idx.b]);
    let mut y = Matrix::zeros(x.rows, w.cols);
    for i in 0..x.rows {
        y.row_mut(i).copy_from_slice(b.row(0));
    }
    gemm(T::one(), x.view(), w.view(), T::one(), y.view_mut());
    y
}

pub(crate) fn linear_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: LinearIdx,
    x: &Matrix<T>,
    dy: &Matrix<T>,
) -> Matrix<T> {
    gemm(
        T::one(),
        x.view().t(),
        dy.view(),
        T::one(),
        g[idx.w].view_mut(),
    );
    let gb = g[idx.b].row_mut(0);
    for i in 0..dy.rows {
        for (a, &d) in gb.iter_mut().zip(dy.row(i)) {
            *a = *a + d;
        }
    }
    let mut dx = Matrix::zeros(x.rows, x.cols);
    gemm(
        T::one(),
        dy.view(),
        p[idx.w].view().t(),
        T::zero(),
        dx.view_mut(),
    );
    dx
}

/// Inverted dropout in place. Returns the mask (already scaled), or `None`
/// when dropout is off.
pub(crate) fn dropout_fwd<T: Scalar>(
    x: &mut Matrix<T>,
    rate: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<Vec<T>> {
    let rng = rng?;
    if rate <= 0.0 {
        return None;
    }
    let keep = T::c(1.0 / (1.0 - rate));
    let mask: Vec<T> = (0..x.data.len())
        .map(|_| {
            if rng.gen::<f64>() < rate {
                T::zero()
            } else {
                keep
            }
        })
        .collect();
    for (v, &m) in x.data.iter_mut().zip(&mask) {
        *v = *v * m;
    }
    Some(mask)
}

pub(crate) fn dropout_bwd<T: Scalar>(dx: &mut Matrix<T>, mask: &Option<Vec<T>>) {
    if let Some(mask) = mask {
        for (v, &m) in dx.data.iter_mut().zip(mask) {
            *v = *v * m;
        }
    }
}

pub(crate) struct NormCache<T> {
    xhat: Matrix<T>,
    inv_std: Vec<T>,
}

pub(crate) fn norm_fwd<T: Scalar>(
    p: &[Matrix<T>],
    idx: NormIdx,
    x: &Matrix<T>,
) -> (Matrix<T>, NormCache<T>) {
    let d = x.cols;
    let n = T::c(d as f64);
    let eps = T::c(NORM_EPS);
    let (gamma, beta) = (p[idx.gamma].row(0), p[idx.beta].row(0));
    let mut y = Matrix::zeros(x.rows, d);
    let mut xhat = Matrix::zeros(x.rows, d);
    let mut inv_std = Vec::with_capacity(x.rows);
    for i in 0..x.rows {
        let row = x.row(i);
        let mean = row.iter().copied().sum::<T>() / n;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let is = T::one() / (var + eps).sqrt();
        inv_std.push(is);
        let (xh, yr) = (xhat.row_mut(i), y.row_mut(i));
        for c in 0..d {
            let h = (row[c] - mean) * is;
            xh[c] = h;
        }
        for c in 0..d {
            yr[c] = gamma[c] * xh[c] + beta[c];
        }
    }
    (y, NormCache { xhat, inv_std })
}

pub(crate) fn norm_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: NormIdx,
    cache: &NormCache<T>,
    dy: &Matrix<T>,
) -> Matrix<T> {
    let d = dy.cols;
    let n = T::c(d as f64);
    let gamma = p[idx.gamma].row(0);
    let mut dx = Matrix::zeros(dy.rows, d);
    let mut dgamma = vec![T::zero(); d];
    let mut dbeta = vec![T::zero(); d];
    let mut dxhat = vec![T::zero(); d];
    for i in 0..dy.rows {
        let (dyr, xh) = (dy.row(i), cache.xhat.row(i));
        let mut sum = T::zero();
        let mut dot = T::zero();
        for c in 0..d {
            dgamma[c] = dgamma[c] + dyr[c] * xh[c];
            dbeta[c] = dbeta[c] + dyr[c];
            dxhat[c] = dyr[c] * gamma[c];
            sum = sum + dxhat[c];
            dot = dot + dxhat[c] * xh[c];
        }
        let is = cache.inv_std[i];
        let out = dx.row_mut(i);
        for c in 0..d {
            out[c] = is / n * (n * dxhat[c] - sum - xh[c] * dot);
        }
    }
    for (a, b) in g[idx.gamma].row_mut(0).iter_mut().zip(dgamma) {
        *a = *a + b;
    }
    for (a, b) in g[idx.beta].row_mut(0).iter_mut().zip(dbeta) {
        *a = *a + b;
    }
    dx
}

pub(crate) struct FfnCache<T> {
    x: Matrix<T>,
    h: Matrix<T>,
}

pub(crate) fn ffn_fwd<T: Scalar>(
    p: &[Matrix<T>],
    idx: FfnIdx,
    x: &Matrix<T>,
) -> (Matrix<T>, FfnCache<T>) {
    let mut h = linear_fwd(p, idx.inner, x);
    for v in &mut h.data {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let y = linear_fwd(p, idx.outer, &h);
    (y, FfnCache { x: x.clone(), h })
}

pub(crate) fn ffn_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: FfnIdx,
    cache: &FfnCache<T>,
    dy: &Matrix<T>,
) -> Matrix<T> {
    let mut dh = linear_bwd(p, g, idx.outer, &cache.h, dy);
    for (d, &h) in dh.data.iter_mut().zip(&cache.h.data) {
        if h <= T::zero() {
            *d = T::zero();
        }
    }
    linear_bwd(p, g, idx.inner, &cache.x, &dh)
}

pub(crate) struct AttnCache<T> {
    q_in: Matrix<T>,
    kv_in: Matrix<T>,
    q: Matrix<T>,
    k: Matrix<T>,
    v: Matrix<T>,
    probs: Vec<Matrix<T>>,
    o: Matrix<T>,
}

/// Multi-head scaled dot-product attention. `key_mask[j]` hides key `j`;
/// `causal` hides keys after the query position.
pub(crate) fn attn_fwd<T: Scalar>(
    p: &[Matrix<T>],
    idx: AttnIdx,
    heads: usize,
    q_in: &Matrix<T>,
    kv_in: &Matrix<T>,
    key_mask: &[bool],
    causal: bool,
) -> (Matrix<T>, AttnCache<T>) {
    let (n, m, d) = (q_in.rows, kv_in.rows, q_in.cols);
    debug_assert_eq!(key_mask.len(), m);
    let dh = d / heads;
    let scale = T::c(1.0 / (dh as f64).sqrt());
    let q = linear_fwd(p, idx.q, q_in);
    let k = linear_fwd(p, idx.k, kv_in);
    let v = linear_fwd(p, idx.v, kv_in);
    let mut o = Matrix::zeros(n, d);
    let mut probs = Vec::with_capacity(heads);
    for h in 0..heads {
        let mut s = Matrix::zeros(n, m);
        gemm(
            scale,
            q.view().cols(h * dh, dh),
            k.view().cols(h * dh, dh).t(),
            T::zero(),
            s.view_mut(),
        );
        for i in 0..n {
            let row = s.row_mut(i);
            let visible = |j: usize| !key_mask[j] && !(causal && j > i);
            let max = (0..m)
                .filter(|&j| visible(j))
                .map(|j| row[j])
                .fold(T::neg_infinity(), T::max);
            let mut sum = T::zero();
            for (j, x) in row.iter_mut().enumerate() {
                *x = if visible(j) {
                    (*x - max).exp()
                } else {
                    T::zero()
                };
                sum = sum + *x;
            }
            if sum > T::zero() {
                for x in row.iter_mut() {
                    *x = *x / sum;
                }
            }
        }
        gemm(
            T::one(),
            s.view(),
            v.view().cols(h * dh, dh),
            T::zero(),
            o.view_mut().cols(h * dh, dh),
        );
        probs.push(s);
    }
    let out = linear_fwd(p, idx.o, &o);
    let cache = AttnCache {
        q_in: q_in.clone(),
        kv_in: kv_in.clone(),
        q,
        k,
        v,
        probs,
        o,
    };
    (out, cache)
}

/// Returns (d q_in, d kv_in).
pub(crate) fn attn_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: AttnIdx,
    heads: usize,
    c: &AttnCache<T>,
    dout: &Matrix<T>,
) -> (Matrix<T>, Matrix<T>) {
    let (n, m, d) = (c.q.rows, c.k.rows, c.q.cols);
    let dh = d / heads;
    let scale = T::c(1.0 / (dh as f64).sqrt());
    let d_o = linear_bwd(p, g, idx.o, &c.o, dout);
    let mut dq = Matrix::zeros(n, d);
    let mut dk = Matrix::zeros(m, d);
    let mut dv = Matrix::zeros(m, d);
    let mut dp = Matrix::zeros(n, m);
    for h in 0..heads {
        let pr = &c.probs[h];
        gemm(
            T::one(),
            pr.view().t(),
            d_o.view().cols(h * dh, dh),
            T::zero(),
            dv.view_mut().cols(h * dh, dh),
        );
        gemm(
            T::one(),
            d_o.view().cols(h * dh, dh),
            c.v.view().cols(h * dh, dh).t(),
            T::zero(),
            dp.view_mut(),
        );
        for i in 0..n {
            let (pr_row, dp_row) = (pr.row(i), dp.row_mut(i));
            let dot: T = pr_row.iter().zip(dp_row.iter()).map(|(&a, &b)| a * b).sum();
            for (x, &pv) in dp_row.iter_mut().zip(pr_row) {
                *x = pv * (*x - dot);
            }
        }
        gemm(
            scale,
            dp.view(),
            c.k.view().cols(h * dh, dh),
            T::zero(),
            dq.view_mut().cols(h * dh, dh),
        );
        gemm(
            scale,
            dp.view().t(),
            c.q.view().cols(h * dh, dh),
            T::zero(),
            dk.view_mut().cols(h * dh, dh),
        );
    }
    let dq_in = linear_bwd(p, g, idx.q, &c.q_in, &dq);
    let mut dkv_in = linear_bwd(p, g, idx.k, &c.kv_in, &dk);
    dkv_in.add_assign(&linear_bwd(p, g, idx.v, &c.kv_in, &dv));
    (dq_in, dkv_in)
}

fn add<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let mut out = a.clone();
    out.add_assign(b);
    out
}

pub(crate) struct EncoderCache<T> {
    attn: AttnCache<T>,
    drop1: Option<Vec<T>>,
    norm1: NormCache<T>,
    ffn: FfnCache<T>,
    drop2: Option<Vec<T>>,
    norm2: NormCache<T>,
}

pub(crate) fn encoder_fwd<T: Scalar>(
    p: &[Matrix<T>],
    idx: &EncoderIdx,
    heads: usize,
    rate: f64,
    x: &Matrix<T>,
    key_mask: &[bool],
    mut rng: Option<&mut ChaCha8Rng>,
) -> (Matrix<T>, EncoderCache<T>) {
    let (mut a, attn) = attn_fwd(p, idx.attn, heads, x, x, key_mask, false);
    let drop1 = dropout_fwd(&mut a, rate, rng.as_deref_mut());
    let (x1, norm1) = norm_fwd(p, idx.norm1, &add(x, &a));
    let (mut f, ffn) = ffn_fwd(p, idx.ffn, &x1);
    let drop2 = dropout_fwd(&mut f, rate, rng.as_deref_mut());
    let (x2, norm2) = norm_fwd(p, idx.norm2, &add(&x1, &f));
    let cache = EncoderCache {
        attn,
        drop1,
        norm1,
        ffn,
        drop2,
        norm2,
    };
    (x2, cache)
}

pub(crate) fn encoder_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: &EncoderIdx,
    heads: usize,
    c: &EncoderCache<T>,
    dy: &Matrix<T>,
) -> Matrix<T> {
    let dr2 = norm_bwd(p, g, idx.norm2, &c.norm2, dy);
    let mut df = dr2.clone();
    dropout_bwd(&mut df, &c.drop2);
    let mut dx1 = dr2;
    dx1.add_assign(&ffn_bwd(p, g, idx.ffn, &c.ffn, &df));
    let dr1 = norm_bwd(p, g, idx.norm1, &c.norm1, &dx1);
    let mut da = dr1.clone();
    dropout_bwd(&mut da, &c.drop1);
    let (dq, dkv) = attn_bwd(p, g, idx.attn, heads, &c.attn, &da);
    let mut dx = dr1;
    dx.add_assign(&dq);
    dx.add_assign(&dkv);
    dx
}

pub(crate) struct DecoderCache<T> {
    self_attn: AttnCache<T>,
    drop1: Option<Vec<T>>,
    norm1: NormCache<T>,
    cross: AttnCache<T>,
    drop2: Option<Vec<T>>,
    norm2: NormCache<T>,
    ffn: FfnCache<T>,
    drop3: Option<Vec<T>>,
    norm3: NormCache<T>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn decoder_fwd<T: Scalar>(
    p: &[Matrix<T>],
    idx: &DecoderIdx,
    heads: usize,
    rate: f64,
    y: &Matrix<T>,
    memory: &Matrix<T>,
    memory_mask: &[bool],
    mut rng: Option<&mut ChaCha8Rng>,
) -> (Matrix<T>, DecoderCache<T>) {
    let no_mask = vec![false; y.rows];
    let (mut a, self_attn) = attn_fwd(p, idx.self_attn, heads, y, y, &no_mask, true);
    let drop1 = dropout_fwd(&mut a, rate, rng.as_deref_mut());
    let (y1, norm1) = norm_fwd(p, idx.norm1, &add(y, &a));
    let (mut b, cross) = attn_fwd(p, idx.cross_attn, heads, &y1, memory, memory_mask, false);
    let drop2 = dropout_fwd(&mut b, rate, rng.as_deref_mut());
    let (y2, norm2) = norm_fwd(p, idx.norm2, &add(&y1, &b));
    let (mut f, ffn) = ffn_fwd(p, idx.ffn, &y2);
    let drop3 = dropout_fwd(&mut f, rate, rng.as_deref_mut());
    let (y3, norm3) = norm_fwd(p, idx.norm3, &add(&y2, &f));
    let cache = DecoderCache {
        self_attn,
        drop1,
        norm1,
        cross,
        drop2,
        norm2,
        ffn,
        drop3,
        norm3,
    };
    (y3, cache)
}

/// Returns (d y, d memory).
pub(crate) fn decoder_bwd<T: Scalar>(
    p: &[Matrix<T>],
    g: &mut [Matrix<T>],
    idx: &DecoderIdx,
    heads: usize,
    c: &DecoderCache<T>,
    dy: &Matrix<T>,
) -> (Matrix<T>, Matrix<T>) {
    let dr3 = norm_bwd(p, g, idx.norm3, &c.norm3, dy);
    let mut df = dr3.clone();
    dropout_bwd(&mut df, &c.drop3);
    let mut dy2 = dr3;
    dy2.add_assign(&ffn_bwd(p, g, idx.ffn, &c.ffn, &df));

    let dr2 = norm_bwd(p, g, idx.norm2, &c.norm2, &dy2);
    let mut db = dr2.clone();
    dropout_bwd(&mut db, &c.drop2);
    let (dq, dmem) = attn_bwd(p, g, idx.cross_attn, heads, &c.cross, &db);
    let mut dy1 = dr2;
    dy1.add_assign(&dq);

    let dr1 = norm_bwd(p, g, idx.norm1, &c.norm1, &dy1);
    let mut da = dr1.clone();
    dropout_bwd(&mut da, &c.drop1);
    let (dq, dkv) = attn_bwd(p, g, idx.self_attn, heads, &c.self_attn, &da);
    let mut dy0 = dr1;
    dy0.add_assign(&dq);
    dy0.add_assign(&dkv);
    (dy0, dmem)
}

/// Sinusoidal position encodings for positions `0..n`.
pub fn positional_encoding<T: Scalar>(n: usize, d: usize) -> Matrix<T> {
    let mut pe = Matrix::zeros(n, d);
    for pos in 0..n {
        let row = pe.row_mut(pos);
        for i in 0..d {
            let angle = pos as f64 / 10000f64.powf((i - i % 2) as f64 / d as f64);
            row[i] = T::c(if i % 2 == 0 { angle.sin() } else { angle.cos() });
        }
    }
    pe
}

/// `sqrt(d) * E[:, id] + PE[pos]` for each position.
pub(crate) fn embed_fwd<T: Scalar>(e: &Matrix<T>, ids: &[u32]) -> Matrix<T> {
    let (d, v) = (e.rows, e.cols);
    let scale = T::c((d as f64).sqrt());
    let mut x = positional_encoding(ids.len(), d);
    for (i, &id) in ids.iter().enumerate() {
        let id = (id as usize).min(v - 1);
        let row = x.row_mut(i);
        for c in 0..d {
            row[c] = row[c] + scale * e.data[c * v + id];
        }
    }
    x
}

pub(crate) fn embed_bwd<T: Scalar>(ge: &mut Matrix<T>, ids: &[u32], dx: &Matrix<T>) {
    let (d, v) = (ge.rows, ge.cols);
    let scale = T::c((d as f64).sqrt());
    for (i, &id) in ids.iter().enumerate() {
        let id = (id as usize).min(v - 1);
        for (c, &g) in dx.row(i).iter().enumerate() {
            ge.data[c * v + id] = ge.data[c * v + id] + scale * g;
        }
    }
}
