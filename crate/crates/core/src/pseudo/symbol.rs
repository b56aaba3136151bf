use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{LatticeBox, ModeRecord, TorusFunction};
use crate::toeplitz::ToeplitzOperator;

/// Extension rule for `|ξ| > K_xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    PowerLaw,
    Zero,
}

/// Composition modes of the `#` product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SharpMode {
    Full,
    Graded(usize),
    Below(usize),
    Remainder(usize),
}

/// Deepest ξ-derivative the finite-difference stencil supports.
pub const P_MAX: usize = 4;

pub fn jap_xi(xi: f64) -> f64 {
    xi.abs().max(1.0)
}

/// Symbol `a(φ, x, ξ)` sampled on integer `ξ ∈ [−K_xi, K_xi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    bx: LatticeBox,
    pub order_m: f64,
    k_xi: usize,
    slices: Vec<TorusFunction>,
    pub tail: TailModel,
}

impl Symbol {
    pub fn default_k_xi(bx: &LatticeBox) -> usize {
        2 * bx.k_x
    }

    pub fn from_fn(
        bx: LatticeBox,
        k_xi: usize,
        order_m: f64,
        tail: TailModel,
        f: impl Fn(i64) -> TorusFunction,
    ) -> Self {
        let slices = (-(k_xi as i64)..=k_xi as i64).map(f).collect();
        Symbol {
            bx,
            order_m,
            k_xi,
            slices,
            tail,
        }
    }

    /// Slices listed for `ξ = −K_xi, …, K_xi`.
    pub fn from_slices(bx: LatticeBox, order_m: f64, tail: TailModel, slices: Vec<TorusFunction>) -> Result<Self> {
        if slices.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!("{} slices is not 2K_xi + 1", slices.len())));
        }
        for s in &slices {
            bx.check_same(&s.lattice())?;
        }
        Ok(Symbol {
            bx,
            order_m,
            k_xi: slices.len() / 2,
            slices,
            tail,
        })
    }

    pub fn zeros(bx: LatticeBox, k_xi: usize, order_m: f64) -> Self {
        Self::from_fn(bx, k_xi, order_m, TailModel::Zero, |_| TorusFunction::zeros(bx))
    }

    /// Fourier multiplier `m(ξ)` evaluated in closed form.
    pub fn multiplier(bx: LatticeBox, k_xi: usize, order_m: f64, m: impl Fn(f64) -> C64) -> Self {
        Self::from_fn(bx, k_xi, order_m, TailModel::PowerLaw, |xi| {
            let mut u = TorusFunction::zeros(bx);
            u.set(&vec![0; bx.nu], 0, m(xi as f64)).unwrap();
            u
        })
    }

    /// `u(φ, x)·m(ξ)`.
    pub fn product(u: &TorusFunction, k_xi: usize, order_m: f64, m: impl Fn(f64) -> C64) -> Self {
        Self::from_fn(u.lattice(), k_xi, order_m, TailModel::PowerLaw, |xi| u.scale(m(xi as f64)))
    }

    /// ξ-independent symbol.
    pub fn function(u: &TorusFunction, k_xi: usize) -> Self {
        Self::product(u, k_xi, 0.0, |_| C64::new(1.0, 0.0))
    }

    pub fn lattice(&self) -> LatticeBox {
        self.bx
    }

    pub fn k_xi(&self) -> usize {
        self.k_xi
    }

    pub fn slices(&self) -> &[TorusFunction] {
        &self.slices
    }

    pub fn slice(&self, xi: i64) -> &TorusFunction {
        &self.slices[(xi + self.k_xi as i64) as usize]
    }

    /// `a(·, ·, ξ)` for any integer ξ, using the tail model outside the band.
    pub fn value(&self, xi: i64) -> TorusFunction {
        let k = self.k_xi as i64;
        if xi.abs() <= k {
            return self.slice(xi).clone();
        }
        match self.tail {
            TailModel::Zero => TorusFunction::zeros(self.bx),
            TailModel::PowerLaw => {
                let edge = self.slice(k * xi.signum());
                edge.scale_re((jap_xi(xi as f64) / jap_xi(k as f64)).powf(self.order_m))
            }
        }
    }

    fn value_ref(&self, xi: i64) -> std::borrow::Cow<'_, TorusFunction> {
        if xi.unsigned_abs() as usize <= self.k_xi {
            std::borrow::Cow::Borrowed(self.slice(xi))
        } else {
            std::borrow::Cow::Owned(self.value(xi))
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        self.bx.check_same(&other.bx)?;
        if self.k_xi != other.k_xi {
            return Err(Error::BoxMismatch(format!("K_xi {} vs {}", self.k_xi, other.k_xi)));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, order_m: f64, f: impl Fn(&TorusFunction, &TorusFunction) -> Result<TorusFunction>) -> Result<Self> {
        self.check(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        let tail = if self.tail == TailModel::Zero && other.tail == TailModel::Zero {
            TailModel::Zero
        } else {
            TailModel::PowerLaw
        };
        Ok(Symbol {
            bx: self.bx,
            order_m,
            k_xi: self.k_xi,
            slices,
            tail,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, self.order_m.max(other.order_m), |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, self.order_m.max(other.order_m), |a, b| a.sub(b))
    }

    /// Pointwise product `a(φ,x,ξ) b(φ,x,ξ)` (not the `#` product).
    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        self.zip(other, self.order_m + other.order_m, |a, b| a.multiply(b))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for s in out.slices.iter_mut() {
            *s = s.scale(c);
        }
        out
    }

    pub fn map_slices(&self, order_m: f64, f: impl Fn(i64, &TorusFunction) -> TorusFunction) -> Self {
        let k = self.k_xi as i64;
        Symbol {
            bx: self.bx,
            order_m,
            k_xi: self.k_xi,
            slices: (-k..=k).map(|xi| f(xi, self.slice(xi))).collect(),
            tail: self.tail,
        }
    }

    pub fn with_order(mut self, order_m: f64) -> Self {
        self.order_m = order_m;
        self
    }

    /// `∂_x a`.
    pub fn dx(&self) -> Self {
        self.map_slices(self.order_m, |_, u| u.dx())
    }

    /// Fourth-order central difference for `∂_ξ^n a` on the integer grid.
    pub fn dxi(&self, n: usize) -> Self {
        let mut cur = self.clone();
        for _ in 0..n {
            let k = cur.k_xi as i64;
            let next: Vec<TorusFunction> = (-k..=k)
                .map(|xi| {
                    let f = |d: i64| cur.value_ref(xi + d).into_owned();
                    let c = f(2)
                        .scale_re(-1.0)
                        .add(&f(1).scale_re(8.0))
                        .and_then(|s| s.sub(&f(-1).scale_re(8.0)))
                        .and_then(|s| s.add(&f(-2)))
                        .expect("same box");
                    c.scale_re(1.0 / 12.0)
                })
                .collect();
            cur = Symbol {
                bx: cur.bx,
                order_m: cur.order_m - 1.0,
                k_xi: cur.k_xi,
                slices: next,
                tail: cur.tail,
            };
        }
        cur
    }

    /// Symbol of the conjugate operator: `conj(a(φ, x, −ξ))`.
    pub fn conj_symbol(&self) -> Self {
        let k = self.k_xi as i64;
        Symbol {
            bx: self.bx,
            order_m: self.order_m,
            k_xi: self.k_xi,
            slices: (-k..=k).map(|xi| self.slice(-xi).conj_fn()).collect(),
            tail: self.tail,
        }
    }

    /// `A_j^k(ℓ) = â(ℓ, j−k, k)` on the operator box `op_box`.
    pub fn quantize_on(&self, op_box: LatticeBox) -> ToeplitzOperator {
        let mut a = ToeplitzOperator::zeros(op_box);
        let band = a.band().clone();
        let n = op_box.n_j();
        let kx = op_box.k_x as i64;
        let lr = self.bx.l_range();
        let snj = self.bx.n_j() as i64;
        let skx = self.bx.k_x as i64;
        let values: Vec<TorusFunction> = (-kx..=kx).map(|k| self.value(k)).collect();
        for li in 0..lr.len() {
            let l = lr.vector(li);
            let Some(bi) = band.index(&l) else { continue };
            let row_nonzero = values.iter().any(|v| {
                v.coeffs()[li * snj as usize..(li + 1) * snj as usize]
                    .iter()
                    .any(|c| c.re != 0.0 || c.im != 0.0)
            });
            if !row_nonzero {
                continue;
            }
            let s = a.slice_mut(bi);
            for jj in 0..n as i64 {
                for kk in 0..n as i64 {
                    let d = jj - kk;
                    if d.abs() > skx {
                        continue;
                    }
                    let v = &values[kk as usize];
                    s[(jj * n as i64 + kk) as usize] = v.coeffs()[li * snj as usize + (d + skx) as usize];
                }
            }
        }
        a
    }

    pub fn quantize(&self) -> ToeplitzOperator {
        self.quantize_on(self.bx)
    }

    /// `max_{β ≤ p} sup_ξ ‖∂_ξ^β a(ξ)‖_s ⟨ξ⟩^{−m+β}`.
    pub fn symbol_norm(&self, s: f64, p: usize) -> Result<f64> {
        if p > P_MAX || 2 * p > self.k_xi {
            return Err(Error::InvalidParameter(format!(
                "derivative depth {p} exceeds the stencil range for K_xi = {}",
                self.k_xi
            )));
        }
        let mut best: f64 = 0.0;
        for beta in 0..=p {
            let d = self.dxi(beta);
            let k = self.k_xi as i64;
            for xi in -k..=k {
                let w = jap_xi(xi as f64).powf(-self.order_m + beta as f64);
                best = best.max(d.slice(xi).sobolev_norm(s) * w);
            }
        }
        Ok(best)
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let k = self.k_xi as i64;
        serde_json::json!({
            "order_m": self.order_m,
            "slices": (-k..=k).map(|xi| serde_json::json!({
                "xi": xi,
                "fn": self.slice(xi).to_records(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(bx: LatticeBox, v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameter(format!("symbol json: {m}"));
        let order_m = v["order_m"].as_f64().ok_or_else(|| bad("order_m"))?;
        let arr = v["slices"].as_array().ok_or_else(|| bad("slices"))?;
        let k_xi = arr
            .iter()
            .filter_map(|s| s["xi"].as_i64())
            .map(|x| x.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut sym = Symbol::zeros(bx, k_xi, order_m);
        sym.tail = TailModel::PowerLaw;
        for s in arr {
            let xi = s["xi"].as_i64().ok_or_else(|| bad("xi"))?;
            let recs: Vec<ModeRecord> =
                serde_json::from_value(s["fn"].clone()).map_err(|e| bad(&e.to_string()))?;
            sym.slices[(xi + k_xi as i64) as usize] = TorusFunction::from_records(bx, &recs)?;
        }
        Ok(sym)
    }
}

/// Symbol whose quantization on `op.lattice()` reproduces `op` entrywise.
/// The function box is doubled in both directions so that every entry
/// of the band fits; ξ runs over the operator's x-box with a zero tail.
pub fn dequantize(op: &ToeplitzOperator) -> Symbol {
    let bx = op.lattice();
    let wide = LatticeBox {
        nu: bx.nu,
        k_phi: 2 * bx.k_phi,
        k_x: 2 * bx.k_x,
    };
    let kx = bx.k_x as i64;
    let band = op.band().clone();
    let mut slices: Vec<TorusFunction> = (0..=2 * kx).map(|_| TorusFunction::zeros(wide)).collect();
    let n = bx.n_j();
    for bi in op.support() {
        let l = band.vector(bi);
        let s = op.slice(bi).unwrap();
        for kk in 0..n {
            let xi_slot = kk;
            for jj in 0..n {
                let c = s[jj * n + kk];
                if c.re != 0.0 || c.im != 0.0 {
                    let d = jj as i64 - kk as i64;
                    slices[xi_slot].set(&l, d, c).unwrap();
                }
            }
        }
    }
    Symbol {
        bx: wide,
        order_m: 0.0,
        k_xi: bx.k_x,
        slices,
        tail: TailModel::Zero,
    }
}

/// `a # b` in the requested mode.
pub fn compose_sharp(a: &Symbol, b: &Symbol, mode: SharpMode) -> Result<Symbol> {
    a.check(b)?;
    match mode {
        SharpMode::Full => sharp_full(a, b),
        SharpMode::Graded(n) => sharp_graded(a, b, n),
        SharpMode::Below(n) => {
            let mut acc = Symbol::zeros(a.bx, a.k_xi, a.order_m + b.order_m);
            for k in 0..n {
                acc = acc.add(&sharp_graded(a, b, k)?)?;
            }
            Ok(acc.with_order(a.order_m + b.order_m))
        }
        SharpMode::Remainder(n) => {
            let full = sharp_full(a, b)?;
            let below = compose_sharp(a, b, SharpMode::Below(n))?;
            Ok(full.sub(&below)?.with_order(a.order_m + b.order_m - n as f64))
        }
    }
}

fn sharp_full(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    let bx = a.bx;
    let lr = bx.l_range();
    let nj = bx.n_j();
    let kx = bx.k_x as i64;
    let k = a.k_xi as i64;
    let mut slices = Vec::with_capacity(a.slices.len());
    for xi in -k..=k {
        let bs = b.slice(xi);
        let mut acc = TorusFunction::zeros(bx);
        for h in -kx..=kx {
            // b̂(·, h, ξ) e^{ihx} as a function
            let mut part = TorusFunction::zeros(bx);
            let mut any = false;
            for li in 0..lr.len() {
                let c = bs.coeffs()[li * nj + (h + kx) as usize];
                if c.re != 0.0 || c.im != 0.0 {
                    part.coeffs_mut()[li * nj + (h + kx) as usize] = c;
                    any = true;
                }
            }
            if !any {
                continue;
            }
            let av = a.value_ref(xi + h);
            acc = acc.add(&av.multiply(&part)?)?;
        }
        slices.push(acc);
    }
    Ok(Symbol {
        bx,
        order_m: a.order_m + b.order_m,
        k_xi: a.k_xi,
        slices,
        tail: TailModel::PowerLaw,
    })
}

fn sharp_graded(a: &Symbol, b: &Symbol, n: usize) -> Result<Symbol> {
    if n > P_MAX {
        return Err(Error::InvalidParameter(format!("graded order {n} exceeds {P_MAX}")));
    }
    let da = a.dxi(n);
    let mut db = b.clone();
    for _ in 0..n {
        db = db.dx();
    }
    let fact: f64 = (1..=n).map(|x| x as f64).product();
    // 1/(n! iⁿ) = (−i)ⁿ / n!
    let c = C64::new(0.0, -1.0).powu(n as u32) / fact;
    let p = da.pointwise(&db)?.scale(c);
    Ok(p.with_order(a.order_m + b.order_m - n as f64))
}

/// `a ⋆ b = a#b − b#a`.
pub fn star_commutator(a: &Symbol, b: &Symbol, mode: SharpMode) -> Result<Symbol> {
    compose_sharp(a, b, mode)?.sub(&compose_sharp(b, a, mode)?)
}
